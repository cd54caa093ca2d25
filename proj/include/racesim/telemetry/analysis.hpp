#pragma once

#include "racesim/plant/sensors.hpp"
#include "racesim/plant/vehicle.hpp"
#include "racesim/scenario/config.hpp"
#include "racesim/telemetry/table.hpp"
#include "racesim/trackgeom/track.hpp"

#include <optional>
#include <string>
#include <vector>

namespace racesim::telemetry {

/// Oriented rectangle (vehicle footprint) for collision checks.
struct Obb {
    double cx = 0.0;
    double cy = 0.0;
    double yaw = 0.0;
    double length = 0.0;
    double width = 0.0;
};

/// Exact separating-axis overlap test for two oriented rectangles.
bool obb_overlap(const Obb &a, const Obb &b);

/// Ego ground-truth Frenet states per master-table row, with an unwrapped
/// progress odometer and hysteresis lap latching (seam jitter never
/// double-counts a lap).
struct FrenetTrack {
    std::vector<double> s;
    std::vector<double> d;
    std::vector<double> odometer;
    std::vector<int> lap;
    std::vector<std::size_t> lap_starts; // row index where each lap begins
    int laps_completed = 0;              // full laps
};

FrenetTrack build_frenet_track(const MasterTable &master, const trackgeom::TrackModel &track);

struct LapMetrics {
    int lap = 0;
    bool complete = false;
    double lap_time = 0.0;
    double max_speed = 0.0;
    double avg_speed = 0.0;
    double mean_lateral_error = 0.0;
    double max_lateral_error = 0.0;
    double max_heading_error = 0.0;
    double max_yaw_rate = 0.0;
    double avg_yaw_rate = 0.0;
    double max_understeer_deg = 0.0;
    double avg_understeer_deg = 0.0;
    double max_sideslip_deg = 0.0;
    double avg_sideslip_deg = 0.0;
    double max_lateral_velocity = 0.0;
    double avg_lateral_velocity = 0.0;
};

std::vector<LapMetrics> compute_lap_metrics(const MasterTable &master, const FrenetTrack &frenet,
                                            const plant::VehicleParams &vehicle);

struct TestError {
    std::string test;
    std::string description;
    int lap = 0;
    double s = 0.0;
    double d = 0.0;
};

struct CollisionRecord {
    int ghost = 0;
    std::size_t row = 0;
    double time = 0.0;
    int lap = 0;
    double s = 0.0;
    double d = 0.0;
};

struct OvertakeRecord {
    int ghost = 0;
    bool collision = false;
    int start_lap = 0;
    double start_s = 0.0;
    int end_lap = 0;
    double end_s = 0.0;
    double time_to_overtake = 0.0;
    double avg_delta_speed = 0.0;
};

struct GhostAnalysis {
    std::vector<CollisionRecord> collisions;
    std::vector<OvertakeRecord> overtakes;
};

/// Collision scan (OBB overlap per grid row) and overtake detection over
/// the -30 m / +20 m window of wrapped longitudinal gap.
GhostAnalysis analyze_ghosts(const MasterTable &master, const FrenetTrack &frenet,
                             const trackgeom::TrackModel &track,
                             const std::vector<scenario::GhostConfig> &ghosts,
                             const plant::VehicleParams &vehicle);

/// Everything the test battery needs to know about how the run ended.
struct RunOutcome {
    bool timed_out = false;
    int shutdown_reason = -1; // StopDetectorNode reason, -1: never shut down
};

struct TestContext {
    const MasterTable &master;
    const FrenetTrack &frenet;
    const trackgeom::TrackModel &track;
    const scenario::ScenarioConfig &config;
    const std::vector<LapMetrics> &laps;
    const GhostAnalysis &ghosts;
    RunOutcome outcome;
    /// raw per-topic tables; event-like topics (/errors) are checked here,
    /// never through the nearest-neighbor grid
    const std::map<std::string, TopicTable> *tables = nullptr;
};

/// Execute every enabled test; each failure carries its (lap, s, d)
/// location from ground truth.
std::vector<TestError> run_tests(const TestContext &ctx);

/// True when a commanded safety stop completed: stop latched and the car
/// halted inside the track.
struct SafetyStopInfo {
    bool commanded = false;
    bool completed_on_track = false;
    int reason = 0;
};
SafetyStopInfo safety_stop_info(const MasterTable &master, const FrenetTrack &frenet,
                                const trackgeom::TrackModel &track);

} // namespace racesim::telemetry
