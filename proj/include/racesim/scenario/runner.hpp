#pragma once

#include "racesim/scenario/config.hpp"
#include "racesim/telemetry/report.hpp"

#include <optional>
#include <string>

namespace racesim::scenario {

/// Command-line overrides applied on top of the scenario configuration.
/// The loaded files are never modified; every run works on its own copy.
struct RunOptions {
    std::optional<double> speedup;
    std::optional<bool> ground_truth;
    std::optional<std::uint64_t> seed;
    std::optional<simbus::PacingMode> pacing;
    std::optional<bool> overview_only;
    std::string out_dir; // empty: no artifacts written
};

struct RunResult {
    ScenarioConfig config; // effective configuration of this run
    simbus::RunTrace trace;
    telemetry::RunOutcome outcome;
    telemetry::RunReport report;

    int exit_code() const { return report.passed() ? 0 : 1; }
};

/// Execute one scenario end to end: assemble the bus, run the event loop,
/// post-process telemetry and (optionally) write logs + reports to out_dir.
RunResult run_scenario(const std::string &dir, const RunOptions &opts);

/// Same, from already-loaded configuration (tests build these directly).
RunResult run_scenario(ScenarioConfig cfg, ScenarioScript script, const RunOptions &opts);

/// Re-run the telemetry pipeline on stored logs without re-simulating.
/// Expects the layout written by run_scenario: run_meta.json, logs/,
/// inputs/. Reports are rewritten in place; returns the refreshed report.
telemetry::RunReport regenerate_report(const std::string &log_dir, bool full);

} // namespace racesim::scenario
