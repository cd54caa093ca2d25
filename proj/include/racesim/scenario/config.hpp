#pragma once

#include "racesim/faults/faults.hpp"
#include "racesim/plant/sensors.hpp"
#include "racesim/plant/vehicle.hpp"
#include "racesim/simbus/bus.hpp"
#include "racesim/trackgeom/track.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace racesim::scenario {

struct GhostConfig {
    std::string line_file; // empty: reuse the ego racing line
    double s0 = 0.0;
    double speed = 0.0;
    double length = 4.9;
    double width = 1.9;
};

/// Simulation half of the configuration document (document 1).
struct SimConfig {
    std::string track_file;
    std::string line_file;
    trackgeom::FrenetPose init;
    double v0 = 0.0;
    double speedup = 1.0;
    simbus::PacingMode pacing = simbus::PacingMode::as_fast_as_possible;
    bool ground_truth_mode = false;
    std::uint64_t seed = 0;
    double max_sim_time = 600.0;
    std::string fault_file; // optional, relative to the scenario directory
    std::vector<GhostConfig> ghosts;
    std::vector<std::string> tags;
    plant::VehicleParams vehicle;
    plant::SensorSuite sensors;
};

struct Threshold {
    double yellow = 0.0;
    double red = 0.0;
};

/// Report/test half of the configuration (document 2).
struct ReportConfig {
    std::vector<std::string> tests; // enabled test names
    double freq_bound = 100.0;      // Hz cap for the master table grid
    std::map<std::string, Threshold> thresholds;
    double min_distance = 50.0;       // car_started threshold, meters
    double stop_speed = 0.5;          // m/s, "stopped" definition
    double stop_duration = 2.0;       // s of standstill for car_stopped
    bool full_reports = false;        // module reports in addition to overview

    bool test_enabled(const std::string &name) const;
    static std::vector<std::string> default_tests();
};

struct ScenarioConfig {
    std::string name; // directory basename
    std::string dir;
    SimConfig sim;
    std::map<std::string, double> param_overrides; // node/param -> value
    ReportConfig report;
};

/// One command fired at a (lap, s) point: either a node parameter or a
/// fault patch.
struct CommandItem {
    enum class Kind { parameter, fault_patch };
    Kind kind = Kind::parameter;
    std::string target; // node/param
    double value = 0.0;
    faults::FaultSpec patch;
};

struct CommandGroup {
    int lap = 1;
    double s = 0.0;
    std::vector<CommandItem> items;
};

struct ScenarioScript {
    std::vector<CommandGroup> groups; // sorted by (lap, s)
    double end_after_laps = 1.0;      // laps past the last fired group
    double heartbeat_grace = 0.5;     // s of heartbeat after completion
};

/// Load a scenario directory: config.yaml (two YAML documents) and
/// scenario.yaml, plus the optional fault file referenced by the config.
/// Throws ConfigError/IoError with a descriptive message on any problem.
std::pair<ScenarioConfig, ScenarioScript> load_scenario(const std::string &dir);

/// Config document parsers, exposed for tests.
ScenarioConfig parse_config_documents(const std::string &yaml_text, const std::string &name,
                                      const std::string &dir);
ScenarioScript parse_script(const std::string &yaml_text);

} // namespace racesim::scenario
