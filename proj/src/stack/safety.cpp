#include "racesim/stack/nodes.hpp"

#include "racesim/topics.hpp"

namespace racesim::stack {

using simbus::Payload;

SafetyNode::SafetyNode(ParamScope params, double period) : period_(period) {
    params.declare("suppress_window", &suppress_window_);
    params.declare("autosim_mode", &autosim_mode_);
    params.declare("cov_threshold", &cov_threshold_);
}

simbus::NodeDecl SafetyNode::decl() const {
    simbus::NodeDecl d;
    d.name = "safety";
    d.period_s = period_;
    d.subscriptions = {topics::kErrors, topics::kLocOdom};
    d.publications = {topics::kCmdStop};
    return d;
}

void SafetyNode::start(simbus::SimBus &bus) {
    bus.declare_topic(topics::kCmdStop, topics::cmd_stop_schema());
}

void SafetyNode::tick(simbus::TickContext &ctx) {
    bool suppressed = autosim_mode_ != 0.0 && ctx.now() < suppress_window_;

    for (const auto &m : ctx.take(topics::kErrors)) {
        if (m.payload.get_scalar("severity") !=
            static_cast<double>(static_cast<int>(Severity::fatal))) {
            continue;
        }
        if (autosim_mode_ != 0.0 && m.stamp() < suppress_window_) {
            continue; // startup noise is ignored in automatic simulations
        }
        auto code = static_cast<ErrorCode>(static_cast<int>(m.payload.get_scalar("code")));
        if (!stop_latched_) {
            stop_latched_ = true;
            reason_ = static_cast<int>(code);
        }
        if (code == ErrorCode::localization_watchdog) {
            emergency_ = true; // localization is dead: brake hard, steer straight
        }
    }

    for (const auto &m : ctx.take(topics::kLocOdom)) {
        if (suppressed || stop_latched_) {
            continue;
        }
        if (m.payload.get_scalar("position_covariance") > cov_threshold_) {
            stop_latched_ = true;
            reason_ = static_cast<int>(ErrorCode::safety_covariance_stop);
        }
    }

    if (stop_latched_ && !own_error_raised_ &&
        reason_ == static_cast<int>(ErrorCode::safety_covariance_stop)) {
        // make the commanded stop visible to the stop detector and reports
        ctx.raise_error(ErrorCode::safety_covariance_stop, Severity::fatal);
        own_error_raised_ = true;
    }

    Payload p = topics::cmd_stop_schema();
    p.at("active").scalar() = stop_latched_ ? 1.0 : 0.0;
    p.at("emergency").scalar() = emergency_ ? 1.0 : 0.0;
    p.at("reason").scalar() = static_cast<double>(reason_);
    ctx.publish(topics::kCmdStop, std::move(p));
}

} // namespace racesim::stack
