#pragma once

#include <stdexcept>
#include <string>

namespace racesim {

/// Malformed or inconsistent configuration (files, parameters, schemas).
/// These are startup errors: a CI run must fail loudly before simulating.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string &what) : std::runtime_error(what) {}
};

/// A Cartesian point could not be projected onto a reference line within
/// the capture distance. Usually means a mis-specified scenario.
class ProjectionError : public std::runtime_error {
  public:
    explicit ProjectionError(const std::string &what) : std::runtime_error(what) {}
};

/// Numerical divergence of the vehicle model (NaN/Inf in state).
class ModelError : public std::runtime_error {
  public:
    explicit ModelError(const std::string &what) : std::runtime_error(what) {}
};

/// File I/O failure (missing file, unreadable CSV, ...).
class IoError : public std::runtime_error {
  public:
    explicit IoError(const std::string &what) : std::runtime_error(what) {}
};

} // namespace racesim
