#pragma once

#include "racesim/plant/vehicle.hpp"
#include "racesim/simbus/bus.hpp"
#include "racesim/stack/params.hpp"
#include "racesim/trackgeom/track.hpp"
#include "racesim/util/rng.hpp"

#include <cstdint>
#include <deque>
#include <memory>
#include <vector>

namespace racesim::plant {

/// Per-sensor emulation settings. Periods must be multiples of the base
/// step; sigmas are standard deviations of the injected Gaussian noise.
struct SensorSuite {
    double gt_period = 0.01;

    double gps_period = 0.05;
    double gps_sigma = 0.30;
    double gps_satellites = 12.0;

    std::size_t imu_count = 2;
    double imu_period = 0.01;
    double imu_accel_sigma = 0.05;
    double imu_gyro_sigma = 0.002;
    double imu_accel_bias = 0.01;
    double imu_gyro_bias = 0.0005;

    double wheel_period = 0.01;
    double wheel_sigma = 0.05;

    double lio_period = 0.05;
    double lio_pos_sigma = 0.03;
    double lio_yaw_sigma = 0.005;
    double lio_latency = 0.05;
};

/// Vehicle plant: steps the single-track model every base step and emits
/// ground truth plus noisy sensor topics at their configured periods. All
/// noise derives from the scenario seed via named streams, one per sensor,
/// so identical seeds give identical streams and sensors stay independent.
class PlantNode : public simbus::BusNode {
  public:
    PlantNode(VehicleState initial, VehicleParams params, SensorSuite suite, std::uint64_t seed);

    simbus::NodeDecl decl() const override;
    void start(simbus::SimBus &bus) override;
    void tick(simbus::TickContext &ctx) override;

    const VehicleState &state() const { return state_; }

  private:
    VehicleState state_;
    VehicleParams params_;
    SensorSuite suite_;
    double steer_cmd_ = 0.0;
    double force_cmd_ = 0.0;

    GaussianStream gps_rng_;
    std::vector<GaussianStream> imu_rng_;
    GaussianStream wheel_rng_;
    GaussianStream lio_rng_;

    // pose history for LIO latency emulation
    std::deque<std::array<double, 4>> pose_history_; // tick, x, y, yaw
    simbus::Tick lio_latency_ticks_ = 0;

    void emit_gt(simbus::TickContext &ctx);
    void emit_gps(simbus::TickContext &ctx);
    void emit_imu(simbus::TickContext &ctx, std::size_t i);
    void emit_wheel(simbus::TickContext &ctx);
    void emit_lio(simbus::TickContext &ctx);
};

/// Open-loop opponent: advances along its line at its commanded speed and
/// never reacts to the ego vehicle.
struct GhostOpponent {
    std::shared_ptr<trackgeom::RacingLine> line;
    double s0 = 0.0;
    double speed = 0.0;
    double length = 4.90;
    double width = 1.90;
};

/// Publishes the truth feed (/gt/opponents) and the detection feed
/// (/perception/opponents, the one eligible for fault injection).
class GhostsNode : public simbus::BusNode {
  public:
    GhostsNode(std::vector<GhostOpponent> ghosts, stack::ParamScope params, double period = 0.02);

    simbus::NodeDecl decl() const override;
    void start(simbus::SimBus &bus) override;
    void tick(simbus::TickContext &ctx) override;

    std::size_t count() const { return ghosts_.size(); }

  private:
    struct GhostState {
        double s = 0.0;
        double lap = 1.0;
        double speed = 0.0; // runtime-tunable
    };
    std::vector<GhostOpponent> ghosts_;
    std::vector<GhostState> states_;
    double period_;
};

} // namespace racesim::plant
