#pragma once

#include <string>

namespace racesim {

/// Numeric error codes carried on the /errors topic (payloads are numeric
/// trees, so errors travel as codes; descriptions live here).
enum class ErrorCode : int {
    none = 0,
    callback_exception = 1,   // a node callback threw; converted by the scheduler
    localization_watchdog = 10, // localization input silent beyond watchdog
    localization_diverged = 11,
    planner_no_feasible_path = 20,
    safety_covariance_stop = 30, // covariance threshold stop latched
    safety_fatal_stop = 31,      // stop latched because of a fatal stack error
    mission_not_authorized = 40,
};

enum class Severity : int { warning = 0, fatal = 1 };

inline std::string error_code_description(ErrorCode code) {
    switch (code) {
    case ErrorCode::none: return "no error";
    case ErrorCode::callback_exception: return "node callback raised an exception";
    case ErrorCode::localization_watchdog: return "localization input silent beyond watchdog timeout";
    case ErrorCode::localization_diverged: return "localization estimate diverged";
    case ErrorCode::planner_no_feasible_path: return "no feasible overtake path; falling back to follow-at-distance";
    case ErrorCode::safety_covariance_stop: return "localization covariance exceeded safety threshold";
    case ErrorCode::safety_fatal_stop: return "safety stop latched after fatal stack error";
    case ErrorCode::mission_not_authorized: return "mission has not authorized driving";
    }
    return "unknown error code";
}

} // namespace racesim
