#pragma once

#include "racesim/trackgeom/track.hpp"

namespace racesim::plant {

/// Single-track model parameters. Defaults approximate a full-scale
/// autonomous race car.
struct VehicleParams {
    double mass = 787.0;          // kg
    double yaw_inertia = 1000.0;  // kg m^2
    double lf = 1.68;             // m, CoG to front axle
    double lr = 1.29;             // m, CoG to rear axle
    double cornering_stiffness_front = 120000.0; // N/rad
    double cornering_stiffness_rear = 160000.0;  // N/rad
    double steer_max = 0.30;      // rad
    double force_max = 7100.0;    // N
    double brake_force_max = 20000.0; // N
    double drag_coeff = 1.10;     // N s^2/m^2
    double length = 4.90;         // m, bounding box
    double width = 1.90;          // m
    double steer_rate_max = 1.0;  // rad/s actuator limit
    double force_rate_max = 60000.0; // N/s actuator limit
    double blend_speed = 5.0;     // m/s, kinematic/dynamic switch

    double wheelbase() const { return lf + lr; }
};

struct VehicleState {
    double x = 0.0;
    double y = 0.0;
    double yaw = 0.0;
    double vx = 0.0; // body frame, forward
    double vy = 0.0; // body frame, left
    double yaw_rate = 0.0;
    double steer = 0.0;       // actual steering angle after rate limiting
    double drive_force = 0.0; // actual longitudinal force after rate limiting
    double ax = 0.0;          // body-frame accelerations of the last step
    double ay = 0.0;

    double speed() const;
};

/// Advance the model by dt with rate-limited commands. Dynamic single-track
/// with linear tires above the blend speed, kinematic bicycle below;
/// semi-implicit Euler. Throws ModelError if the state leaves the finite
/// domain.
VehicleState step_vehicle(const VehicleState &state, const VehicleParams &params,
                          double steer_cmd, double force_cmd, double dt);

/// Place the vehicle on a driving trajectory via the two-step re-projection
/// and pre-load steering/yaw rate with the local curvature so that high
/// speed spawns start transient-free. Throws ConfigError when the spawn
/// point lies outside the track.
VehicleState init_vehicle(const trackgeom::TrackModel &center, const trackgeom::RacingLine &traj,
                          const trackgeom::FrenetPose &pose, double v0,
                          const VehicleParams &params);

} // namespace racesim::plant
