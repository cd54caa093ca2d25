#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace racesim::simbus {

/// Tree of named numeric fields. Each node is either a scalar (float64),
/// a fixed-length float64 vector, or a map of named children. Dot-separated
/// paths ("pose.position") address subtrees; vector elements appear in
/// flattened form with index suffixes ("pose.position.0").
class Payload {
  public:
    using Vec = std::vector<double>;
    using Map = std::map<std::string, Payload>;

    Payload() : node_(Map{}) {}
    Payload(double v) : node_(v) {} // NOLINT: implicit by design for terse schema literals
    Payload(Vec v) : node_(std::move(v)) {}

    static Payload map() { return Payload(); }

    bool is_scalar() const { return std::holds_alternative<double>(node_); }
    bool is_vector() const { return std::holds_alternative<Vec>(node_); }
    bool is_map() const { return std::holds_alternative<Map>(node_); }

    double scalar() const { return std::get<double>(node_); }
    double &scalar() { return std::get<double>(node_); }
    const Vec &vec() const { return std::get<Vec>(node_); }
    Vec &vec() { return std::get<Vec>(node_); }
    const Map &children() const { return std::get<Map>(node_); }
    Map &children() { return std::get<Map>(node_); }

    /// Insert or replace the node at a dot-path, creating intermediate maps.
    Payload &set(const std::string &path, Payload value);

    /// Node lookup by dot-path; nullptr when absent.
    const Payload *find(const std::string &path) const;
    Payload *find(const std::string &path);

    /// Node lookup by dot-path; throws ConfigError when absent.
    const Payload &at(const std::string &path) const;
    Payload &at(const std::string &path);

    double get_scalar(const std::string &path) const { return at(path).scalar(); }
    const Vec &get_vec(const std::string &path) const { return at(path).vec(); }

    /// True when other has the identical tree structure, leaf kinds and
    /// vector lengths (values ignored).
    bool same_shape(const Payload &other) const;

    /// Visit every leaf in deterministic (lexicographic) order.
    void for_each_leaf(const std::function<void(const std::string &, const Payload &)> &fn) const;
    void for_each_leaf_mut(const std::function<void(const std::string &, Payload &)> &fn);

    /// Flattened column names: scalars keep their path, vectors expand to
    /// path.0, path.1, ...
    std::vector<std::string> flat_names() const;
    std::vector<double> flat_values() const;

    bool operator==(const Payload &other) const { return node_ == other.node_; }

  private:
    std::variant<double, Vec, Map> node_;

    void walk(const std::string &prefix,
              const std::function<void(const std::string &, const Payload &)> &fn) const;
    void walk_mut(const std::string &prefix,
                  const std::function<void(const std::string &, Payload &)> &fn);
};

} // namespace racesim::simbus
