#include "racesim/plant/sensors.hpp"

#include "racesim/topics.hpp"

#include <cmath>

namespace racesim::plant {

using simbus::Payload;
using simbus::Tick;

namespace {

Tick period_ticks(double period_s, const char *what) {
    Tick t = static_cast<Tick>(std::llround(period_s / simbus::kBaseStepSeconds));
    if (t < 1 || std::abs(period_s - simbus::tick_to_sec(t)) > 1e-9) {
        throw ConfigError(std::string(what) + " period must be a multiple of the 1 ms base step");
    }
    return t;
}

} // namespace

PlantNode::PlantNode(VehicleState initial, VehicleParams params, SensorSuite suite,
                     std::uint64_t seed)
    : state_(initial), params_(params), suite_(suite), gps_rng_(seed, "sensor/gps"),
      wheel_rng_(seed, "sensor/wheel"), lio_rng_(seed, "sensor/lio") {
    for (std::size_t i = 0; i < suite_.imu_count; ++i) {
        imu_rng_.emplace_back(seed, "sensor/imu" + std::to_string(i));
    }
    lio_latency_ticks_ = period_ticks(std::max(suite_.lio_latency, simbus::kBaseStepSeconds), "lio latency");
    if (suite_.lio_latency == 0.0) {
        lio_latency_ticks_ = 0;
    }
    steer_cmd_ = initial.steer;
    force_cmd_ = initial.drive_force;
}

simbus::NodeDecl PlantNode::decl() const {
    simbus::NodeDecl d;
    d.name = "plant";
    d.period_s = simbus::kBaseStepSeconds;
    d.subscriptions = {topics::kCmdActuation};
    d.publications = {topics::kGtOdom, topics::kGpsFix, topics::kWheelSpeed, topics::kLioOdom};
    for (std::size_t i = 0; i < suite_.imu_count; ++i) {
        d.publications.push_back(topics::imu_topic(i));
    }
    return d;
}

void PlantNode::start(simbus::SimBus &bus) {
    bus.declare_topic(topics::kGtOdom, topics::gt_odom_schema());
    bus.declare_topic(topics::kGpsFix, topics::gps_schema());
    bus.declare_topic(topics::kWheelSpeed, topics::wheel_schema());
    bus.declare_topic(topics::kLioOdom, topics::lio_schema());
    for (std::size_t i = 0; i < suite_.imu_count; ++i) {
        bus.declare_topic(topics::imu_topic(i), topics::imu_schema());
    }
}

void PlantNode::tick(simbus::TickContext &ctx) {
    for (const auto &msg : ctx.take(topics::kCmdActuation)) {
        steer_cmd_ = msg.payload.get_scalar("steer");
        force_cmd_ = msg.payload.get_scalar("force");
    }

    // sensors sample the state at the step boundary, then the plant advances
    Tick now = ctx.tick();
    pose_history_.push_back({static_cast<double>(now), state_.x, state_.y, state_.yaw});
    while (pose_history_.size() > static_cast<std::size_t>(lio_latency_ticks_) + 1) {
        pose_history_.pop_front();
    }

    if (now % period_ticks(suite_.gt_period, "gt") == 0) {
        emit_gt(ctx);
    }
    if (now % period_ticks(suite_.gps_period, "gps") == 0) {
        emit_gps(ctx);
    }
    for (std::size_t i = 0; i < suite_.imu_count; ++i) {
        if (now % period_ticks(suite_.imu_period, "imu") == 0) {
            emit_imu(ctx, i);
        }
    }
    if (now % period_ticks(suite_.wheel_period, "wheel") == 0) {
        emit_wheel(ctx);
    }
    if (now % period_ticks(suite_.lio_period, "lio") == 0) {
        emit_lio(ctx);
    }

    state_ = step_vehicle(state_, params_, steer_cmd_, force_cmd_, simbus::kBaseStepSeconds);
}

void PlantNode::emit_gt(simbus::TickContext &ctx) {
    Payload p = topics::gt_odom_schema();
    p.at("pose.position").vec() = {state_.x, state_.y};
    p.at("pose.yaw").scalar() = state_.yaw;
    p.at("twist.linear").vec() = {state_.vx, state_.vy};
    p.at("twist.yaw_rate").scalar() = state_.yaw_rate;
    p.at("accel").vec() = {state_.ax, state_.ay};
    p.at("steer").scalar() = state_.steer;
    p.at("drive_force").scalar() = state_.drive_force;
    p.at("speed").scalar() = state_.speed();
    ctx.publish(topics::kGtOdom, std::move(p));
}

void PlantNode::emit_gps(simbus::TickContext &ctx) {
    Payload p = topics::gps_schema();
    p.at("position").vec() = {state_.x + gps_rng_.normal(0.0, suite_.gps_sigma),
                              state_.y + gps_rng_.normal(0.0, suite_.gps_sigma)};
    p.at("covariance").scalar() = suite_.gps_sigma * suite_.gps_sigma;
    p.at("satellites").scalar() = suite_.gps_satellites;
    ctx.publish(topics::kGpsFix, std::move(p));
}

void PlantNode::emit_imu(simbus::TickContext &ctx, std::size_t i) {
    Payload p = topics::imu_schema();
    auto &rng = imu_rng_[i];
    p.at("accel").vec() = {
        state_.ax + suite_.imu_accel_bias + rng.normal(0.0, suite_.imu_accel_sigma),
        state_.ay + suite_.imu_accel_bias + rng.normal(0.0, suite_.imu_accel_sigma)};
    p.at("gyro").scalar() =
        state_.yaw_rate + suite_.imu_gyro_bias + rng.normal(0.0, suite_.imu_gyro_sigma);
    ctx.publish(topics::imu_topic(i), std::move(p));
}

void PlantNode::emit_wheel(simbus::TickContext &ctx) {
    Payload p = topics::wheel_schema();
    p.at("speed").scalar() = std::max(0.0, state_.vx + wheel_rng_.normal(0.0, suite_.wheel_sigma));
    ctx.publish(topics::kWheelSpeed, std::move(p));
}

void PlantNode::emit_lio(simbus::TickContext &ctx) {
    const auto &past = pose_history_.front();
    Payload p = topics::lio_schema();
    p.at("pose.position").vec() = {past[1] + lio_rng_.normal(0.0, suite_.lio_pos_sigma),
                                   past[2] + lio_rng_.normal(0.0, suite_.lio_pos_sigma)};
    p.at("pose.yaw").scalar() =
        trackgeom::wrap_angle(past[3] + lio_rng_.normal(0.0, suite_.lio_yaw_sigma));
    ctx.publish(topics::kLioOdom, std::move(p));
}

GhostsNode::GhostsNode(std::vector<GhostOpponent> ghosts, stack::ParamScope params, double period)
    : ghosts_(std::move(ghosts)), period_(period) {
    states_.resize(ghosts_.size());
    for (std::size_t i = 0; i < ghosts_.size(); ++i) {
        states_[i].s = ghosts_[i].line->line().normalize_s(ghosts_[i].s0);
        states_[i].speed = ghosts_[i].speed;
        params.declare("g" + std::to_string(i) + ".speed", &states_[i].speed);
    }
}

simbus::NodeDecl GhostsNode::decl() const {
    simbus::NodeDecl d;
    d.name = "ghosts";
    d.period_s = period_;
    d.publications = {topics::kGtOpponents, topics::kPerceptionOpponents};
    return d;
}

void GhostsNode::start(simbus::SimBus &bus) {
    bus.declare_topic(topics::kGtOpponents, topics::opponents_schema(ghosts_.size()));
    bus.declare_topic(topics::kPerceptionOpponents, topics::opponents_schema(ghosts_.size()));
}

void GhostsNode::tick(simbus::TickContext &ctx) {
    Payload p = topics::opponents_schema(ghosts_.size());
    for (std::size_t i = 0; i < ghosts_.size(); ++i) {
        auto &st = states_[i];
        const auto &line = ghosts_[i].line->line();
        if (ctx.tick() > 0) {
            double s_new = st.s + st.speed * period_;
            if (s_new >= line.total_length()) {
                st.lap += 1.0;
            }
            st.s = line.normalize_s(s_new);
        }
        trackgeom::CartesianPose pose = frenet_to_cartesian(line, {st.s, 0.0, 0.0});
        std::string g = "g" + std::to_string(i);
        p.at(g + ".position").vec() = {pose.x, pose.y};
        p.at(g + ".yaw").scalar() = pose.yaw;
        p.at(g + ".speed").scalar() = st.speed;
        p.at(g + ".s").scalar() = st.s;
        p.at(g + ".lap").scalar() = st.lap;
    }
    Payload truth = p;
    ctx.publish(topics::kGtOpponents, std::move(truth));
    ctx.publish(topics::kPerceptionOpponents, std::move(p));
}

} // namespace racesim::plant
