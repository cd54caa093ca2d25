#pragma once

#include "racesim/scenario/config.hpp"
#include "racesim/simbus/bus.hpp"
#include "racesim/trackgeom/track.hpp"

#include <memory>
#include <vector>

namespace racesim::scenario {

/// Command resolved against the parameter registry / fault proxy at
/// assembly time; what the manager actually publishes.
struct ResolvedCommand {
    int kind = 0; // 0 parameter, 1 fault patch
    std::size_t id = 0;
    double value = 0.0;
};

struct ResolvedGroup {
    int lap = 1;
    double s = 0.0;
    std::vector<ResolvedCommand> commands;
};

/// Fires script groups when the ego ground-truth position first reaches
/// their (lap, s) point, publishes the heartbeat while the scenario is
/// active, and stops it a grace period after the terminal lap completes.
/// Groups already behind the spawn point wait for the next pass of their
/// track position instead of firing immediately.
class ScenarioManagerNode : public simbus::BusNode {
  public:
    ScenarioManagerNode(std::shared_ptr<const trackgeom::TrackModel> track,
                        std::vector<ResolvedGroup> groups, double end_after_laps,
                        double heartbeat_grace, double period = 0.02,
                        double heartbeat_period = 0.1);

    simbus::NodeDecl decl() const override;
    void start(simbus::SimBus &bus) override;
    void tick(simbus::TickContext &ctx) override;

    int lap() const { return lap_; }
    std::size_t groups_fired() const { return fired_count_; }

  private:
    std::shared_ptr<const trackgeom::TrackModel> track_;
    std::vector<ResolvedGroup> groups_;
    std::vector<double> group_progress_; // odometer value at which each fires
    std::vector<bool> fired_;
    double end_after_laps_;
    double heartbeat_grace_;
    double period_;
    double heartbeat_period_;

    bool spawn_seen_ = false;
    double spawn_s_ = 0.0;
    double odometer_ = 0.0; // unwrapped track progress since spawn lap origin
    double prev_s_ = 0.0;
    int lap_ = 1;
    double next_lap_threshold_ = 0.0;
    std::size_t fired_count_ = 0;
    double complete_time_ = -1.0; // sim time when the terminal condition held
    int terminal_lap_ = 0;
    std::uint64_t heartbeat_count_ = 0;
};

/// Decides when the run ends: stale heartbeat (scenario complete), a fatal
/// stack error once the vehicle has halted, or the hard wall on sim time.
/// Publishes a single /sim/shutdown message with the reason.
class StopDetectorNode : public simbus::BusNode {
  public:
    StopDetectorNode(double heartbeat_period, double max_sim_time, double suppress_window = 3.0,
                     double period = 0.02);

    simbus::NodeDecl decl() const override;
    void start(simbus::SimBus &bus) override;
    void tick(simbus::TickContext &ctx) override;

    static constexpr int kReasonScenarioComplete = 0;
    static constexpr int kReasonFatalStop = 1;
    static constexpr int kReasonTimeout = 2;

  private:
    double heartbeat_period_;
    double max_sim_time_;
    double suppress_window_;
    double period_;

    bool heartbeat_seen_ = false;
    double last_heartbeat_ = 0.0;
    bool fatal_seen_ = false;
    double vehicle_speed_ = 0.0;
    bool shutdown_sent_ = false;
};

} // namespace racesim::scenario
