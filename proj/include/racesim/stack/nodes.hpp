#pragma once

#include "racesim/plant/vehicle.hpp"
#include "racesim/simbus/bus.hpp"
#include "racesim/stack/params.hpp"
#include "racesim/trackgeom/track.hpp"

#include <memory>
#include <vector>

namespace racesim::stack {

/// Localization muxer: publishes ground truth on /loc/odom during the
/// warm-up window (or the whole run in ground-truth mode), then forwards
/// the filter output transparently. The cut is a single clean switch.
class LocMuxerNode : public simbus::BusNode {
  public:
    LocMuxerNode(ParamScope params, double period = 0.01);

    simbus::NodeDecl decl() const override;
    void start(simbus::SimBus &bus) override;
    void tick(simbus::TickContext &ctx) override;

  private:
    double period_;
    double warmup_ = 3.0;
    double ground_truth_mode_ = 0.0;
};

/// Dimensions of one opponent as the planner needs them.
struct OpponentDims {
    double length = 4.9;
    double width = 1.9;
};

/// Samples the racing line ahead of the vehicle, caps speeds with the
/// mission performance cap, and engages an offset maneuver with a safety
/// tunnel when a slower opponent is ahead. Falls back to following at a
/// distance when no offset fits the track.
class PlannerNode : public simbus::BusNode {
  public:
    PlannerNode(std::shared_ptr<const trackgeom::TrackModel> track,
                std::shared_ptr<const trackgeom::RacingLine> line,
                std::vector<OpponentDims> opponents, plant::VehicleParams vehicle,
                ParamScope params, double period = 0.05);

    simbus::NodeDecl decl() const override;
    void start(simbus::SimBus &bus) override;
    void tick(simbus::TickContext &ctx) override;

  private:
    std::shared_ptr<const trackgeom::TrackModel> track_;
    std::shared_ptr<const trackgeom::RacingLine> line_;
    std::vector<OpponentDims> opponents_;
    plant::VehicleParams vehicle_;
    double period_;

    // tunables
    double point_spacing_ = 5.0;
    double engage_distance_ = 150.0;
    double disengage_ahead_ = 20.0;
    double clearance_widths_ = 2.5;
    double edge_margin_ = 1.0;
    double shift_ramp_ = 80.0;
    double lead_in_ = 60.0;
    double overtake_side_ = 1.0; // +1 shift left, -1 shift right
    double follow_gap_ = 30.0;

    struct OppSnapshot {
        trackgeom::Vec2 pos;
        double speed = 0.0;
        bool valid = false;
    };

    simbus::Payload loc_latest_;
    bool have_loc_ = false;
    double cap_held_ = 0.0;
    double authorized_held_ = 0.0;
    bool stop_latched_ = false;
    std::vector<OppSnapshot> opps_held_;
    std::vector<bool> engaged_;
    bool warned_infeasible_ = false;
};

/// Pure-pursuit lateral control with speed-scheduled lookahead plus a PI
/// longitudinal loop on the planned target speed. The integrator is
/// warm-initialized so the first commanded force holds the spawn speed.
class ControllerNode : public simbus::BusNode {
  public:
    ControllerNode(plant::VehicleParams vehicle, ParamScope params, double period = 0.01);

    simbus::NodeDecl decl() const override;
    void start(simbus::SimBus &bus) override;
    void tick(simbus::TickContext &ctx) override;

  private:
    plant::VehicleParams vehicle_;
    double period_;

    double lookahead_time_ = 0.5;
    double lookahead_min_ = 8.0;
    double lookahead_max_ = 45.0;
    double kp_speed_ = 900.0;
    double ki_speed_ = 250.0;
    double brake_hold_ = 3000.0;

    bool warm_initialized_ = false;
    double integral_force_ = 0.0;
    simbus::Payload loc_;
    simbus::Payload plan_;
    bool have_loc_ = false;
    bool have_plan_ = false;
    bool emergency_ = false;
};

/// Collects stack errors and the localization covariance; latches a stop
/// command on any fatal error or covariance above the threshold. Errors in
/// the first seconds of an automatic simulation are suppressed so that
/// high-speed spawns can settle. A dead localization escalates to the
/// emergency profile (straight steering, full brakes).
class SafetyNode : public simbus::BusNode {
  public:
    SafetyNode(ParamScope params, double period = 0.01);

    simbus::NodeDecl decl() const override;
    void start(simbus::SimBus &bus) override;
    void tick(simbus::TickContext &ctx) override;

    bool stop_latched() const { return stop_latched_; }

  private:
    double period_;
    double suppress_window_ = 3.0;
    double autosim_mode_ = 1.0;
    double cov_threshold_ = 0.03;

    bool stop_latched_ = false;
    bool emergency_ = false;
    int reason_ = 0;
    bool own_error_raised_ = false;
};

/// Holds the performance cap and the start authorization. With
/// spawn_on_track enabled the pit-out sequence is bypassed and driving is
/// authorized immediately.
class MissionNode : public simbus::BusNode {
  public:
    MissionNode(ParamScope params, double period = 0.05);

    simbus::NodeDecl decl() const override;
    void start(simbus::SimBus &bus) override;
    void tick(simbus::TickContext &ctx) override;

  private:
    double period_;
    double spawn_on_track_ = 1.0;
    double performance_cap_ = 75.0;
};

} // namespace racesim::stack
