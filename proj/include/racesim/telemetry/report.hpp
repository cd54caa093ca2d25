#pragma once

#include "racesim/telemetry/analysis.hpp"

#include <map>
#include <string>
#include <vector>

namespace racesim::telemetry {

/// Aggregated result of one simulation run; the JSON serialization of this
/// structure is the pipeline contract (empty errors <=> run passed).
struct RunReport {
    std::string scenario;
    std::uint64_t seed = 0;
    int laps_completed = 0;
    double best_lap_time = 0.0; // 0: no complete lap
    double total_distance = 0.0;
    bool timed_out = false;
    SafetyStopInfo safety_stop;

    std::vector<TestError> errors;
    std::vector<LapMetrics> laps;
    std::map<std::string, scenario::Threshold> thresholds;
    GhostAnalysis ghosts;
    bool has_ghosts = false;

    bool passed() const { return errors.empty(); }
};

enum class ReportMode { overview_only, full };

/// Extra context the module reports need beyond the master table.
struct ReportInputs {
    const MasterTable &master;
    const FrenetTrack &frenet;
    const trackgeom::TrackModel &track;
    const scenario::ScenarioConfig &config;
    /// delivery delay stats per topic (sim seconds), measured on the trace
    std::map<std::string, double> max_topic_delay;
};

/// Build the report content from the analysis results.
RunReport assemble_report(const TestContext &ctx, const std::vector<TestError> &errors);

/// Serialize report.json (schema-stable, byte-deterministic).
std::string report_to_json(const RunReport &report);

/// Write report.json, report.md and the collision schematics; full mode
/// adds the localization / control / perception module reports.
void emit_reports(const RunReport &report, const ReportInputs &inputs, ReportMode mode,
                  const std::string &out_dir);

} // namespace racesim::telemetry
