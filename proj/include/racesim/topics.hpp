#pragma once

#include "racesim/simbus/payload.hpp"

#include <cstddef>
#include <string>

namespace racesim::topics {

using simbus::Payload;

inline constexpr const char *kGtOdom = "/gt/odom";
inline constexpr const char *kGpsFix = "/gps/fix";
inline constexpr const char *kWheelSpeed = "/wheel/speed";
inline constexpr const char *kLioOdom = "/lio/odom";
inline constexpr const char *kGtOpponents = "/gt/opponents";
inline constexpr const char *kPerceptionOpponents = "/perception/opponents";
inline constexpr const char *kLocOdom = "/loc/odom";
inline constexpr const char *kLocOdomRaw = "/loc/odom_raw";
inline constexpr const char *kPlanTrajectory = "/plan/trajectory";
inline constexpr const char *kCmdActuation = "/cmd/actuation";
inline constexpr const char *kCtrlDebug = "/ctrl/debug";
inline constexpr const char *kCmdStop = "/cmd/stop";
inline constexpr const char *kMissionState = "/mission/state";
inline constexpr const char *kErrors = "/errors";
inline constexpr const char *kScenarioCommands = "/scenario/commands";
inline constexpr const char *kScenarioHeartbeat = "/scenario/heartbeat";
inline constexpr const char *kScenarioStatus = "/scenario/status";
inline constexpr const char *kSimShutdown = "/sim/shutdown";

inline std::string imu_topic(std::size_t i) { return "/imu/" + std::to_string(i) + "/data"; }

/// Number of trajectory points in every published plan.
inline constexpr std::size_t kPlanPoints = 60;

inline Payload gt_odom_schema() {
    Payload p;
    p.set("pose.position", Payload::Vec(2, 0.0));
    p.set("pose.yaw", 0.0);
    p.set("twist.linear", Payload::Vec(2, 0.0));
    p.set("twist.yaw_rate", 0.0);
    p.set("accel", Payload::Vec(2, 0.0));
    p.set("steer", 0.0);
    p.set("drive_force", 0.0);
    p.set("speed", 0.0);
    return p;
}

inline Payload gps_schema() {
    Payload p;
    p.set("position", Payload::Vec(2, 0.0));
    p.set("covariance", 0.0);
    p.set("satellites", 0.0);
    return p;
}

inline Payload imu_schema() {
    Payload p;
    p.set("accel", Payload::Vec(2, 0.0));
    p.set("gyro", 0.0);
    return p;
}

inline Payload wheel_schema() {
    Payload p;
    p.set("speed", 0.0);
    return p;
}

inline Payload lio_schema() {
    Payload p;
    p.set("pose.position", Payload::Vec(2, 0.0));
    p.set("pose.yaw", 0.0);
    return p;
}

inline Payload opponents_schema(std::size_t n_ghosts) {
    Payload p;
    for (std::size_t i = 0; i < n_ghosts; ++i) {
        std::string g = "g" + std::to_string(i);
        p.set(g + ".position", Payload::Vec(2, 0.0));
        p.set(g + ".yaw", 0.0);
        p.set(g + ".speed", 0.0);
        p.set(g + ".s", 0.0);
        p.set(g + ".lap", 0.0);
    }
    return p;
}

inline Payload loc_odom_schema() {
    Payload p;
    p.set("pose.position", Payload::Vec(2, 0.0));
    p.set("pose.yaw", 0.0);
    p.set("pose.covariance", Payload::Vec(3, 0.0)); // var(x), var(y), var(yaw)
    p.set("twist.linear", Payload::Vec(2, 0.0));
    p.set("twist.yaw_rate", 0.0);
    p.set("twist.covariance", Payload::Vec(2, 0.0)); // var(vx), var(vy)
    p.set("position_covariance", 0.0);               // max of the two position axes
    p.set("status", Payload::Vec(4, 0.0));           // gps, lio, imu, wheel: 0 ok 1 banned 2 stale
    return p;
}

inline Payload plan_schema() {
    Payload p;
    p.set("x", Payload::Vec(kPlanPoints, 0.0));
    p.set("y", Payload::Vec(kPlanPoints, 0.0));
    p.set("v", Payload::Vec(kPlanPoints, 0.0));
    p.set("s", Payload::Vec(kPlanPoints, 0.0));
    p.set("tunnel.lo", Payload::Vec(kPlanPoints, 0.0)); // lateral bound, centerline frame
    p.set("tunnel.hi", Payload::Vec(kPlanPoints, 0.0));
    p.set("tunnel.active", 0.0);
    p.set("mode", 0.0); // 0 race, 1 overtake, 2 follow, 3 stop
    return p;
}

inline Payload actuation_schema() {
    Payload p;
    p.set("steer", 0.0);
    p.set("force", 0.0);
    return p;
}

inline Payload ctrl_debug_schema() {
    Payload p;
    p.set("lateral_error", 0.0);
    p.set("heading_error", 0.0);
    p.set("speed_error", 0.0);
    p.set("target_speed", 0.0);
    p.set("lookahead", 0.0);
    return p;
}

inline Payload cmd_stop_schema() {
    Payload p;
    p.set("active", 0.0);
    p.set("emergency", 0.0);
    p.set("reason", 0.0); // ErrorCode of the trigger
    return p;
}

inline Payload mission_state_schema() {
    Payload p;
    p.set("authorized", 0.0);
    p.set("cap", 0.0);
    return p;
}

inline Payload scenario_command_schema() {
    Payload p;
    p.set("kind", 0.0); // 0 = node parameter, 1 = fault patch
    p.set("id", 0.0);   // parameter id / patch id
    p.set("value", 0.0);
    return p;
}

inline Payload heartbeat_schema() {
    Payload p;
    p.set("count", 0.0);
    return p;
}

inline Payload scenario_status_schema() {
    Payload p;
    p.set("lap", 0.0);
    p.set("s", 0.0);
    p.set("groups_fired", 0.0);
    return p;
}

inline Payload shutdown_schema() {
    Payload p;
    p.set("reason", 0.0); // 0 scenario complete, 1 fatal stop, 2 timeout
    return p;
}

} // namespace racesim::topics
