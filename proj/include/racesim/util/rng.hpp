#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace racesim {

/// Derive an independent stream seed from the scenario seed and a stream
/// name (FNV-1a over the name, mixed with the base seed). Every consumer of
/// randomness owns exactly one named stream so runs are reproducible and
/// streams are decoupled from each other.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view stream) {
    std::uint64_t h = 14695981039346656037ull;
    for (char c : stream) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ull;
    }
    // splitmix64 finalizer over the combination
    std::uint64_t z = base ^ h;
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Deterministic Gaussian sampler. Uses explicit Box-Muller over mt19937_64
/// uniforms instead of std::normal_distribution, whose output sequence is
/// implementation-defined and would break frozen expected values.
class GaussianStream {
  public:
    GaussianStream() : engine_(0) {}
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}
    GaussianStream(std::uint64_t base, std::string_view stream) : engine_(derive_seed(base, stream)) {}

    double uniform() {
        // 53-bit mantissa uniform in (0, 1]
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Standard normal draw.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace racesim
