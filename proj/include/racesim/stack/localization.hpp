#pragma once

#include "racesim/simbus/bus.hpp"
#include "racesim/stack/params.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>

namespace racesim::stack {

/// Measurement sources fused by the localization filter, in the order they
/// appear in the published status vector.
enum class LocSource : int { gps = 0, lio = 1, imu = 2, wheel = 3 };

enum class SourceStatus : int { ok = 0, banned = 1, stale = 2 };

/// Constant-velocity Kalman filter over [x y yaw vx vy]: IMU drives the
/// prediction, GPS position / LIO pose / wheel speed corrections carry the
/// innovation gate. A source whose innovation chi^2 exceeds the gate for M
/// consecutive messages is banned for the rest of the run. The filter
/// publishes nothing for its first second of input, and reports a fatal
/// watchdog error (then goes silent) when every input stays quiet beyond
/// the watchdog timeout.
class LocalizationNode : public simbus::BusNode {
  public:
    LocalizationNode(ParamScope params, std::size_t imu_count, double period = 0.01);

    simbus::NodeDecl decl() const override;
    void tick(simbus::TickContext &ctx) override;

    struct Config {
        double q_pos = 1e-3;  // m^2/s process noise on position
        double q_yaw = 1e-4;  // rad^2/s
        double q_vel = 5e-3;  // (m/s)^2/s
        double gate_chi2 = 50.0;
        double gate_consecutive = 5.0; // M consecutive exceedances ban a source
        double stale_timeout = 0.5;    // s without a message -> stale
        double watchdog_timeout = 0.5; // s with *no* input at all -> fatal
        double init_delay = 1.0;       // s of silence after the first input
        double r_gps = 0.09;           // measurement variances (m^2, rad^2, ...)
        double r_lio_pos = 0.0009;
        double r_lio_yaw = 2.5e-5;
        double r_wheel = 0.0025;
    };

    const Config &config() const { return cfg_; }

  private:
    Config cfg_;
    std::size_t imu_count_;
    double period_;

    bool has_input_ = false;
    simbus::Tick first_input_tick_ = 0;
    simbus::Tick last_input_tick_ = 0;
    bool initialized_ = false;
    bool dead_ = false;

    Eigen::Matrix<double, 5, 1> x_ = Eigen::Matrix<double, 5, 1>::Zero();
    Eigen::Matrix<double, 5, 5> p_ = Eigen::Matrix<double, 5, 5>::Identity();
    double last_gyro_ = 0.0;
    double last_accel_[2] = {0.0, 0.0};

    std::array<SourceStatus, 4> status_{SourceStatus::ok, SourceStatus::ok, SourceStatus::ok,
                                        SourceStatus::ok};
    std::array<int, 4> gate_strikes_{0, 0, 0, 0};
    std::array<simbus::Tick, 4> last_seen_{-1, -1, -1, -1};

    void predict(double dt);
    /// Generic gated update; returns false when the measurement was the
    /// final strike and the source just got banned.
    void correct(LocSource source, const Eigen::VectorXd &z, const Eigen::MatrixXd &h,
                 const Eigen::MatrixXd &r, bool wrap_yaw_component, int yaw_row);
    void publish_estimate(simbus::TickContext &ctx);
};

} // namespace racesim::stack
