#include "racesim/stack/localization.hpp"

#include "racesim/topics.hpp"
#include "racesim/trackgeom/polyline.hpp"

#include <cmath>

namespace racesim::stack {

using simbus::Payload;
using simbus::Tick;

LocalizationNode::LocalizationNode(ParamScope params, std::size_t imu_count, double period)
    : imu_count_(imu_count), period_(period) {
    params.declare("q_pos", &cfg_.q_pos);
    params.declare("q_yaw", &cfg_.q_yaw);
    params.declare("q_vel", &cfg_.q_vel);
    params.declare("gate_chi2", &cfg_.gate_chi2);
    params.declare("gate_consecutive", &cfg_.gate_consecutive);
    params.declare("stale_timeout", &cfg_.stale_timeout);
    params.declare("watchdog_timeout", &cfg_.watchdog_timeout);
    params.declare("init_delay", &cfg_.init_delay);
    params.declare("r_gps", &cfg_.r_gps);
    params.declare("r_lio_pos", &cfg_.r_lio_pos);
    params.declare("r_lio_yaw", &cfg_.r_lio_yaw);
    params.declare("r_wheel", &cfg_.r_wheel);
}

simbus::NodeDecl LocalizationNode::decl() const {
    simbus::NodeDecl d;
    d.name = "localization";
    d.period_s = period_;
    d.subscriptions = {topics::kGpsFix, topics::kLioOdom, topics::kWheelSpeed, "/imu/*"};
    d.publications = {topics::kLocOdom};
    // the muxer owns /loc/odom; the filter output is diverted to the raw topic
    d.remaps = {{topics::kLocOdom, topics::kLocOdomRaw}};
    return d;
}

void LocalizationNode::predict(double dt) {
    const double yaw = x_(2);
    const double vx = x_(3);
    const double vy = x_(4);
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    const double w = last_gyro_;

    x_(0) += (vx * c - vy * s) * dt;
    x_(1) += (vx * s + vy * c) * dt;
    x_(2) = trackgeom::wrap_angle(x_(2) + w * dt);
    x_(3) += (last_accel_[0] + w * vy) * dt;
    x_(4) += (last_accel_[1] - w * vx) * dt;

    Eigen::Matrix<double, 5, 5> f = Eigen::Matrix<double, 5, 5>::Identity();
    f(0, 2) = (-vx * s - vy * c) * dt;
    f(0, 3) = c * dt;
    f(0, 4) = -s * dt;
    f(1, 2) = (vx * c - vy * s) * dt;
    f(1, 3) = s * dt;
    f(1, 4) = c * dt;
    f(3, 4) = w * dt;
    f(4, 3) = -w * dt;

    Eigen::Matrix<double, 5, 5> q = Eigen::Matrix<double, 5, 5>::Zero();
    q(0, 0) = q(1, 1) = cfg_.q_pos * dt;
    q(2, 2) = cfg_.q_yaw * dt;
    q(3, 3) = q(4, 4) = cfg_.q_vel * dt;

    p_ = f * p_ * f.transpose() + q;
}

void LocalizationNode::correct(LocSource source, const Eigen::VectorXd &z,
                               const Eigen::MatrixXd &h, const Eigen::MatrixXd &r,
                               bool wrap_yaw_component, int yaw_row) {
    auto idx = static_cast<std::size_t>(source);
    if (status_[idx] == SourceStatus::banned) {
        return;
    }

    Eigen::VectorXd innovation = z - h * x_;
    if (wrap_yaw_component) {
        innovation(yaw_row) = trackgeom::wrap_angle(innovation(yaw_row));
    }
    Eigen::MatrixXd s_mat = h * p_ * h.transpose() + r;
    double chi2 = innovation.dot(s_mat.ldlt().solve(innovation));

    if (chi2 > cfg_.gate_chi2) {
        if (++gate_strikes_[idx] >= static_cast<int>(cfg_.gate_consecutive)) {
            status_[idx] = SourceStatus::banned;
            return;
        }
    } else {
        gate_strikes_[idx] = 0;
    }

    // the measurement is fused even while it accumulates strikes; the gate
    // only removes the source once the exceedances are persistent
    Eigen::MatrixXd k = p_ * h.transpose() * s_mat.inverse();
    x_ += k * innovation;
    x_(2) = trackgeom::wrap_angle(x_(2));
    p_ = (Eigen::Matrix<double, 5, 5>::Identity() - k * h) * p_;
}

void LocalizationNode::tick(simbus::TickContext &ctx) {
    if (dead_) {
        return;
    }
    Tick now = ctx.tick();

    auto imu_msgs = ctx.take_matching("/imu/*");
    auto gps_msgs = ctx.take(topics::kGpsFix);
    auto lio_msgs = ctx.take(topics::kLioOdom);
    auto wheel_msgs = ctx.take(topics::kWheelSpeed);

    bool any_input = !imu_msgs.empty() || !gps_msgs.empty() || !lio_msgs.empty() ||
                     !wheel_msgs.empty();
    if (any_input) {
        if (!has_input_) {
            has_input_ = true;
            first_input_tick_ = now;
        }
        last_input_tick_ = now;
    }
    if (!has_input_) {
        return;
    }
    if (simbus::tick_to_sec(now - last_input_tick_) > cfg_.watchdog_timeout) {
        ctx.raise_error(ErrorCode::localization_watchdog, Severity::fatal);
        dead_ = true;
        return;
    }

    // primary IMU (index 0 topic) feeds the prediction inputs
    for (const auto &m : imu_msgs) {
        if (m.topic == topics::imu_topic(0)) {
            last_gyro_ = m.payload.get_scalar("gyro");
            last_accel_[0] = m.payload.get_vec("accel")[0];
            last_accel_[1] = m.payload.get_vec("accel")[1];
            last_seen_[static_cast<std::size_t>(LocSource::imu)] = now;
        }
    }

    if (!initialized_) {
        // seed the state from the first LIO pose and wheel speed
        if (!lio_msgs.empty()) {
            const auto &m = lio_msgs.back();
            x_(0) = m.payload.get_vec("pose.position")[0];
            x_(1) = m.payload.get_vec("pose.position")[1];
            x_(2) = m.payload.get_scalar("pose.yaw");
            if (!wheel_msgs.empty()) {
                x_(3) = wheel_msgs.back().payload.get_scalar("speed");
            }
            p_ = Eigen::Matrix<double, 5, 5>::Identity() * 0.1;
            p_(2, 2) = 0.01;
            initialized_ = true;
        }
        return;
    }

    predict(period_);

    for (const auto &m : gps_msgs) {
        Eigen::VectorXd z(2);
        z << m.payload.get_vec("position")[0], m.payload.get_vec("position")[1];
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 5);
        h(0, 0) = 1.0;
        h(1, 1) = 1.0;
        Eigen::MatrixXd r = Eigen::MatrixXd::Identity(2, 2) * cfg_.r_gps;
        correct(LocSource::gps, z, h, r, false, 0);
        last_seen_[static_cast<std::size_t>(LocSource::gps)] = now;
    }
    for (const auto &m : lio_msgs) {
        Eigen::VectorXd z(3);
        z << m.payload.get_vec("pose.position")[0], m.payload.get_vec("pose.position")[1],
            m.payload.get_scalar("pose.yaw");
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 5);
        h(0, 0) = 1.0;
        h(1, 1) = 1.0;
        h(2, 2) = 1.0;
        Eigen::MatrixXd r = Eigen::MatrixXd::Zero(3, 3);
        r(0, 0) = r(1, 1) = cfg_.r_lio_pos;
        r(2, 2) = cfg_.r_lio_yaw;
        correct(LocSource::lio, z, h, r, true, 2);
        last_seen_[static_cast<std::size_t>(LocSource::lio)] = now;
    }
    for (const auto &m : wheel_msgs) {
        Eigen::VectorXd z(1);
        z << m.payload.get_scalar("speed");
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(1, 5);
        h(0, 3) = 1.0;
        Eigen::MatrixXd r = Eigen::MatrixXd::Identity(1, 1) * cfg_.r_wheel;
        correct(LocSource::wheel, z, h, r, false, 0);
        last_seen_[static_cast<std::size_t>(LocSource::wheel)] = now;
    }

    for (std::size_t i = 0; i < status_.size(); ++i) {
        if (status_[i] == SourceStatus::banned) {
            continue;
        }
        bool is_stale = last_seen_[i] < 0 ||
                        simbus::tick_to_sec(now - last_seen_[i]) > cfg_.stale_timeout;
        status_[i] = is_stale ? SourceStatus::stale : SourceStatus::ok;
    }

    // the first second of input is the internal initialization window
    if (simbus::tick_to_sec(now - first_input_tick_) < cfg_.init_delay) {
        return;
    }
    publish_estimate(ctx);
}

void LocalizationNode::publish_estimate(simbus::TickContext &ctx) {
    Payload p = topics::loc_odom_schema();
    p.at("pose.position").vec() = {x_(0), x_(1)};
    p.at("pose.yaw").scalar() = x_(2);
    p.at("pose.covariance").vec() = {p_(0, 0), p_(1, 1), p_(2, 2)};
    p.at("twist.linear").vec() = {x_(3), x_(4)};
    p.at("twist.yaw_rate").scalar() = last_gyro_;
    p.at("twist.covariance").vec() = {p_(3, 3), p_(4, 4)};
    p.at("position_covariance").scalar() = std::max(p_(0, 0), p_(1, 1));
    auto &st = p.at("status").vec();
    for (std::size_t i = 0; i < status_.size(); ++i) {
        st[i] = static_cast<double>(static_cast<int>(status_[i]));
    }
    ctx.publish(topics::kLocOdom, std::move(p));
}

} // namespace racesim::stack
