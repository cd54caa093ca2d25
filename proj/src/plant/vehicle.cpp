#include "racesim/plant/vehicle.hpp"

#include "racesim/util/error.hpp"

#include <algorithm>
#include <cmath>

namespace racesim::plant {

double VehicleState::speed() const { return std::hypot(vx, vy); }

namespace {

double rate_limit(double current, double target, double rate, double dt) {
    double max_delta = rate * dt;
    return current + std::clamp(target - current, -max_delta, max_delta);
}

bool finite(const VehicleState &s) {
    return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.yaw) &&
           std::isfinite(s.vx) && std::isfinite(s.vy) && std::isfinite(s.yaw_rate);
}

} // namespace

VehicleState step_vehicle(const VehicleState &state, const VehicleParams &p, double steer_cmd,
                          double force_cmd, double dt) {
    VehicleState next = state;

    steer_cmd = std::clamp(steer_cmd, -p.steer_max, p.steer_max);
    force_cmd = std::clamp(force_cmd, -p.brake_force_max, p.force_max);
    next.steer = rate_limit(state.steer, steer_cmd, p.steer_rate_max, dt);
    next.drive_force = rate_limit(state.drive_force, force_cmd, p.force_rate_max, dt);

    const double drag = p.drag_coeff * state.vx * std::abs(state.vx);
    const double L = p.wheelbase();

    if (state.vx < p.blend_speed) {
        // kinematic bicycle; lateral states follow algebraically
        double ax = (next.drive_force - drag) / p.mass;
        next.vx = state.vx + ax * dt;
        if (next.vx < 0.0) {
            next.vx = 0.0; // braking holds the car, never reverses it
        }
        double beta = std::atan(p.lr / L * std::tan(next.steer));
        next.yaw_rate = next.vx * std::cos(beta) * std::tan(next.steer) / L;
        next.vy = next.vx * std::tan(beta);
        next.ax = ax;
        next.ay = next.vx * next.yaw_rate;
    } else {
        double alpha_f = next.steer - std::atan2(state.vy + p.lf * state.yaw_rate, state.vx);
        double alpha_r = -std::atan2(state.vy - p.lr * state.yaw_rate, state.vx);
        double fy_f = p.cornering_stiffness_front * alpha_f;
        double fy_r = p.cornering_stiffness_rear * alpha_r;

        double ax = (next.drive_force - drag - fy_f * std::sin(next.steer)) / p.mass +
                    state.vy * state.yaw_rate;
        double ay = (fy_f * std::cos(next.steer) + fy_r) / p.mass - state.vx * state.yaw_rate;
        double r_dot = (p.lf * fy_f * std::cos(next.steer) - p.lr * fy_r) / p.yaw_inertia;

        next.vx = state.vx + ax * dt;
        next.vy = state.vy + ay * dt;
        next.yaw_rate = state.yaw_rate + r_dot * dt;
        // specific force as an IMU would sense it
        next.ax = ax - state.vy * state.yaw_rate;
        next.ay = ay + state.vx * state.yaw_rate;
    }

    // semi-implicit: advance pose with the updated rates
    next.yaw = trackgeom::wrap_angle(state.yaw + next.yaw_rate * dt);
    next.x = state.x + (next.vx * std::cos(next.yaw) - next.vy * std::sin(next.yaw)) * dt;
    next.y = state.y + (next.vx * std::sin(next.yaw) + next.vy * std::cos(next.yaw)) * dt;

    if (!finite(next)) {
        throw ModelError("vehicle model diverged (non-finite state)");
    }
    return next;
}

VehicleState init_vehicle(const trackgeom::TrackModel &center, const trackgeom::RacingLine &traj,
                          const trackgeom::FrenetPose &pose, double v0,
                          const VehicleParams &params) {
    if (v0 < 0.0) {
        throw ConfigError("initial speed must be non-negative");
    }
    trackgeom::FrenetPose on_center = reproject_init(center, traj, pose);
    double margin =
        std::min(center.width_left_at(on_center.s) - on_center.d,
                 center.width_right_at(on_center.s) + on_center.d);
    if (margin < 0.0) {
        throw ConfigError("spawn pose lies outside the track (boundary margin " +
                          std::to_string(margin) + " m)");
    }

    trackgeom::CartesianPose cart = frenet_to_cartesian(traj.line(), pose);
    double kappa = traj.line().curvature_at(pose.s);

    VehicleState state;
    state.x = cart.x;
    state.y = cart.y;
    state.yaw = cart.yaw;
    state.vx = v0;
    state.vy = 0.0;
    state.yaw_rate = kappa * v0;
    state.steer = std::atan(params.wheelbase() * kappa);
    state.drive_force = params.drag_coeff * v0 * v0; // hold the spawn speed
    return state;
}

} // namespace racesim::plant
