#include "racesim/stack/nodes.hpp"

#include "racesim/topics.hpp"

#include <algorithm>
#include <cmath>

namespace racesim::stack {

using simbus::Payload;

ControllerNode::ControllerNode(plant::VehicleParams vehicle, ParamScope params, double period)
    : vehicle_(vehicle), period_(period) {
    params.declare("lookahead_time", &lookahead_time_);
    params.declare("lookahead_min", &lookahead_min_);
    params.declare("lookahead_max", &lookahead_max_);
    params.declare("kp_speed", &kp_speed_);
    params.declare("ki_speed", &ki_speed_);
    params.declare("brake_hold", &brake_hold_);
}

simbus::NodeDecl ControllerNode::decl() const {
    simbus::NodeDecl d;
    d.name = "controller";
    d.period_s = period_;
    d.subscriptions = {topics::kLocOdom, topics::kPlanTrajectory, topics::kCmdStop};
    d.publications = {topics::kCmdActuation, topics::kCtrlDebug};
    return d;
}

void ControllerNode::start(simbus::SimBus &bus) {
    bus.declare_topic(topics::kCmdActuation, topics::actuation_schema());
    bus.declare_topic(topics::kCtrlDebug, topics::ctrl_debug_schema());
}

namespace {

struct PlanView {
    const std::vector<double> *x = nullptr;
    const std::vector<double> *y = nullptr;
    const std::vector<double> *v = nullptr;
};

} // namespace

void ControllerNode::tick(simbus::TickContext &ctx) {
    static_assert(topics::kPlanPoints >= 2);

    // latched inputs
    auto loc_msgs = ctx.take(topics::kLocOdom);
    auto plan_msgs = ctx.take(topics::kPlanTrajectory);
    auto stop_msgs = ctx.take(topics::kCmdStop);
    if (!loc_msgs.empty()) {
        loc_ = loc_msgs.back().payload;
        have_loc_ = true;
    }
    if (!plan_msgs.empty()) {
        plan_ = plan_msgs.back().payload;
        have_plan_ = true;
    }
    for (const auto &m : stop_msgs) {
        emergency_ = emergency_ || m.payload.get_scalar("emergency") != 0.0;
    }

    if (emergency_) {
        // straight steering, hard braking, no trajectory needed
        Payload cmd = topics::actuation_schema();
        cmd.at("steer").scalar() = 0.0;
        cmd.at("force").scalar() = -vehicle_.brake_force_max;
        ctx.publish(topics::kCmdActuation, std::move(cmd));
        return;
    }
    if (!have_loc_ || !have_plan_) {
        return;
    }

    const auto &pos = loc_.get_vec("pose.position");
    double yaw = loc_.get_scalar("pose.yaw");
    const auto &tw = loc_.get_vec("twist.linear");
    double speed = std::hypot(tw[0], tw[1]);

    const auto &px = plan_.get_vec("x");
    const auto &py = plan_.get_vec("y");
    const auto &pv = plan_.get_vec("v");
    const std::size_t n = px.size();

    // nearest plan point
    std::size_t nearest = 0;
    double best_d2 = 1e18;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = px[i] - pos[0];
        double dy = py[i] - pos[1];
        double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
            best_d2 = d2;
            nearest = i;
        }
    }

    if (!warm_initialized_) {
        // start with the force that holds the current speed: no transient
        integral_force_ = vehicle_.drag_coeff * speed * speed;
        warm_initialized_ = true;
    }

    // speed-scheduled lookahead along the plan polyline
    double lookahead = std::clamp(lookahead_time_ * speed, lookahead_min_, lookahead_max_);
    double gx = px[n - 1];
    double gy = py[n - 1];
    double acc = 0.0;
    for (std::size_t i = nearest; i + 1 < n; ++i) {
        double seg = std::hypot(px[i + 1] - px[i], py[i + 1] - py[i]);
        if (acc + seg >= lookahead) {
            double t = (lookahead - acc) / seg;
            gx = px[i] + t * (px[i + 1] - px[i]);
            gy = py[i] + t * (py[i + 1] - py[i]);
            break;
        }
        acc += seg;
    }

    double alpha = trackgeom::wrap_angle(std::atan2(gy - pos[1], gx - pos[0]) - yaw);
    double steer =
        std::clamp(std::atan2(2.0 * vehicle_.wheelbase() * std::sin(alpha), lookahead),
                   -vehicle_.steer_max, vehicle_.steer_max);

    // PI speed loop with anti-windup at the force limits
    double v_target = pv[nearest];
    double err = v_target - speed;
    double force = kp_speed_ * err + integral_force_;
    if (force > -vehicle_.brake_force_max && force < vehicle_.force_max) {
        integral_force_ += ki_speed_ * err * period_;
    }
    force = std::clamp(force, -vehicle_.brake_force_max, vehicle_.force_max);

    if (v_target < 0.05) {
        integral_force_ = 0.0;
        if (speed < 0.5) {
            force = -brake_hold_; // hold the car once stopped
            steer = 0.0;
        }
    }

    Payload cmd = topics::actuation_schema();
    cmd.at("steer").scalar() = steer;
    cmd.at("force").scalar() = force;
    ctx.publish(topics::kCmdActuation, std::move(cmd));

    // tracking errors relative to the plan segment at the nearest point
    std::size_t seg_i = std::min(nearest, n - 2);
    double tx = px[seg_i + 1] - px[seg_i];
    double ty = py[seg_i + 1] - py[seg_i];
    double tlen = std::hypot(tx, ty);
    double lat_err = 0.0;
    double head_err = 0.0;
    if (tlen > 1e-9) {
        lat_err = ((pos[0] - px[seg_i]) * ty - (pos[1] - py[seg_i]) * tx) / tlen * -1.0;
        head_err = trackgeom::wrap_angle(yaw - std::atan2(ty, tx));
    }

    Payload dbg = topics::ctrl_debug_schema();
    dbg.at("lateral_error").scalar() = lat_err;
    dbg.at("heading_error").scalar() = head_err;
    dbg.at("speed_error").scalar() = err;
    dbg.at("target_speed").scalar() = v_target;
    dbg.at("lookahead").scalar() = lookahead;
    ctx.publish(topics::kCtrlDebug, std::move(dbg));
}

} // namespace racesim::stack
