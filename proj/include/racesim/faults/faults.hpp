#pragma once

#include "racesim/simbus/bus.hpp"
#include "racesim/util/rng.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace racesim::faults {

/// Perturbations attached to one addressed field (leaf or subtree). The
/// fault types are independent and may coexist; application order is fixed:
/// repetition override, then multiplier, then offset, then Gaussian noise.
struct FieldFault {
    std::optional<double> mult;
    std::optional<double> offset;

    struct Repeat {
        std::int64_t count = 1;
        std::optional<std::vector<double>> value; // scalar broadcast or full vector
    };
    std::optional<Repeat> repeat;

    struct Gauss {
        double mean = 0.0;
        double variance = 0.0;
    };
    std::optional<Gauss> gauss;

    bool empty() const { return !mult && !offset && !repeat && !gauss; }
};

/// Fault configuration of one topic: an optional delivery delay in
/// milliseconds (-1 stops publication entirely) plus per-field faults.
struct TopicFault {
    std::string module; // grouping label from the YAML, reporting only
    std::optional<std::int64_t> delay_ms;
    std::map<std::string, FieldFault> field_faults; // keyed by dot-path

    std::int64_t delay() const { return delay_ms.value_or(0); }
};

struct FaultSpec {
    std::map<std::string, TopicFault> topics;

    bool empty() const { return topics.empty(); }

    /// Parse the YAML fault document (module -> list of {name, delay,
    /// field_faults}). Throws ConfigError on malformed input.
    static FaultSpec parse_yaml_string(const std::string &text);
    static FaultSpec parse_yaml_file(const std::string &path);

    /// Merge a patch: topic delays and field faults in the patch replace the
    /// active ones, untouched entries survive.
    void merge(const FaultSpec &patch);
};

/// Transparent fault-injection proxy. Producers of every configured topic T
/// are remapped to T/_raw; the proxy subscribes to the raw topics and
/// republishes on the originals, applying the configured perturbations.
/// Unconfigured topics and fields pass through bit-exact, stamps preserved.
/// Reconfiguration patches apply atomically between scheduler steps.
class FaultProxyNode : public simbus::BusNode {
  public:
    FaultProxyNode(FaultSpec spec, std::uint64_t seed);

    simbus::NodeDecl decl() const override;
    void tick(simbus::TickContext &ctx) override;

    /// Wire the proxy into the bus: validates every configured topic and
    /// field path against registered schemas, declares the raw topics and
    /// remaps all producers. Call after every publisher is registered.
    void install(simbus::SimBus &bus, std::size_t own_index);

    /// Merge a patch into the active spec. Topics must already be proxied
    /// (list them in the startup spec, faults may be identity). Repeat
    /// counters of patched fields reset.
    void reconfigure(const FaultSpec &patch);

    /// Pre-registered patches triggered by scenario commands.
    std::size_t register_patch(FaultSpec patch);
    void apply_patch(std::size_t id);

    static std::string raw_topic(const std::string &topic) { return topic + "/_raw"; }

  private:
    FaultSpec spec_;
    std::uint64_t seed_;
    bool installed_ = false;

    struct RepeatState {
        std::int64_t remaining = 0;
        std::optional<simbus::Payload> held;
    };
    std::map<std::pair<std::string, std::string>, RepeatState> repeat_state_;
    std::map<std::string, GaussianStream> gauss_rng_; // per topic
    std::map<std::string, std::deque<std::pair<simbus::Tick, simbus::Message>>> delay_queues_;
    std::vector<FaultSpec> patches_;

    void validate_against(const simbus::SimBus &bus) const;
    void reset_repeat_states(const FaultSpec &for_spec);
    void apply_field_faults(const std::string &topic, simbus::Payload &payload);
};

} // namespace racesim::faults
