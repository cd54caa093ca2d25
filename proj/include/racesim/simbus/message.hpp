#pragma once

#include "racesim/simbus/payload.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace racesim::simbus {

/// Simulation time is an integer count of 1 ms base steps; the double
/// representation is derived and only used where seconds are convenient.
using Tick = std::int64_t;

constexpr double kBaseStepSeconds = 1e-3;

inline double tick_to_sec(Tick t) { return static_cast<double>(t) * kBaseStepSeconds; }

/// One published datum: topic-addressed, stamped with the sim time at
/// publication, sequence-numbered per (publisher, topic).
struct Message {
    std::string topic;
    Tick stamp_tick = 0;
    std::uint64_t seq = 0;
    std::size_t publisher = 0; // node registration index

    Payload payload;

    double stamp() const { return tick_to_sec(stamp_tick); }

    bool operator==(const Message &other) const = default;
};

/// Trace entry: the message plus the sim time at which the bus delivered it.
/// Delivery can trail the stamp when a fault delays the message.
struct TraceEntry {
    Message msg;
    Tick delivery_tick = 0;

    bool operator==(const TraceEntry &other) const = default;
};

/// Ordered record of every message delivered during a run.
struct RunTrace {
    std::vector<TraceEntry> entries;
    std::vector<std::string> node_names; // by registration index
    Tick end_tick = 0;

    /// Canonical byte serialization used for determinism comparisons.
    std::string serialize() const;
};

} // namespace racesim::simbus
