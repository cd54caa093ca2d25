#include "racesim/scenario/manager.hpp"

#include "racesim/topics.hpp"

#include <cmath>

namespace racesim::scenario {

using simbus::Payload;

ScenarioManagerNode::ScenarioManagerNode(std::shared_ptr<const trackgeom::TrackModel> track,
                                         std::vector<ResolvedGroup> groups, double end_after_laps,
                                         double heartbeat_grace, double period,
                                         double heartbeat_period)
    : track_(std::move(track)), groups_(std::move(groups)), end_after_laps_(end_after_laps),
      heartbeat_grace_(heartbeat_grace), period_(period), heartbeat_period_(heartbeat_period) {
    fired_.assign(groups_.size(), false);
    group_progress_.assign(groups_.size(), 0.0);
}

simbus::NodeDecl ScenarioManagerNode::decl() const {
    simbus::NodeDecl d;
    d.name = "scenario_manager";
    d.period_s = period_;
    d.subscriptions = {topics::kGtOdom};
    d.publications = {topics::kScenarioCommands, topics::kScenarioHeartbeat,
                      topics::kScenarioStatus};
    return d;
}

void ScenarioManagerNode::start(simbus::SimBus &bus) {
    bus.declare_topic(topics::kScenarioCommands, topics::scenario_command_schema());
    bus.declare_topic(topics::kScenarioHeartbeat, topics::heartbeat_schema());
    bus.declare_topic(topics::kScenarioStatus, topics::scenario_status_schema());
}

void ScenarioManagerNode::tick(simbus::TickContext &ctx) {
    const double L = track_->total_length();

    for (const auto &m : ctx.take(topics::kGtOdom)) {
        const auto &pos = m.payload.get_vec("pose.position");
        trackgeom::Projection proj = track_->line().project({pos[0], pos[1]});
        if (!spawn_seen_) {
            spawn_seen_ = true;
            spawn_s_ = proj.s;
            prev_s_ = proj.s;
            odometer_ = proj.s;
            next_lap_threshold_ = L; // lap 2 starts when progress first reaches L
            // groups whose track point lies at or behind the spawn wait for
            // the next pass instead of firing on the spot
            for (std::size_t i = 0; i < groups_.size(); ++i) {
                double p = static_cast<double>(groups_[i].lap - 1) * L + groups_[i].s;
                while (p <= odometer_) {
                    p += L;
                }
                group_progress_[i] = p;
            }
        } else {
            odometer_ += track_->line().signed_s_delta(proj.s, prev_s_);
            prev_s_ = proj.s;
        }
    }
    if (!spawn_seen_) {
        return;
    }

    // hysteresis lap latch: jitter across the seam cannot double-count
    while (odometer_ >= next_lap_threshold_) {
        lap_ += 1;
        next_lap_threshold_ += L;
    }

    for (std::size_t i = 0; i < groups_.size(); ++i) {
        if (fired_[i] || odometer_ < group_progress_[i]) {
            continue;
        }
        fired_[i] = true;
        ++fired_count_;
        for (const auto &cmd : groups_[i].commands) {
            Payload p = topics::scenario_command_schema();
            p.at("kind").scalar() = static_cast<double>(cmd.kind);
            p.at("id").scalar() = static_cast<double>(cmd.id);
            p.at("value").scalar() = cmd.value;
            ctx.publish(topics::kScenarioCommands, std::move(p));
        }
        if (fired_count_ == groups_.size()) {
            terminal_lap_ = lap_ + static_cast<int>(end_after_laps_);
        }
    }
    if (groups_.empty() && terminal_lap_ == 0) {
        terminal_lap_ = 1 + static_cast<int>(end_after_laps_);
    }

    bool complete = fired_count_ == groups_.size() && terminal_lap_ > 0 && lap_ >= terminal_lap_;
    if (complete && complete_time_ < 0.0) {
        complete_time_ = ctx.now();
    }

    bool heartbeat_due =
        ctx.tick() % static_cast<simbus::Tick>(std::llround(heartbeat_period_ / simbus::kBaseStepSeconds)) == 0;
    bool heartbeat_alive = complete_time_ < 0.0 || ctx.now() < complete_time_ + heartbeat_grace_;
    if (heartbeat_due && heartbeat_alive) {
        Payload hb = topics::heartbeat_schema();
        hb.at("count").scalar() = static_cast<double>(heartbeat_count_++);
        ctx.publish(topics::kScenarioHeartbeat, std::move(hb));
    }

    Payload status = topics::scenario_status_schema();
    status.at("lap").scalar() = static_cast<double>(lap_);
    status.at("s").scalar() = prev_s_;
    status.at("groups_fired").scalar() = static_cast<double>(fired_count_);
    ctx.publish(topics::kScenarioStatus, std::move(status));
}

StopDetectorNode::StopDetectorNode(double heartbeat_period, double max_sim_time,
                                   double suppress_window, double period)
    : heartbeat_period_(heartbeat_period), max_sim_time_(max_sim_time),
      suppress_window_(suppress_window), period_(period) {}

simbus::NodeDecl StopDetectorNode::decl() const {
    simbus::NodeDecl d;
    d.name = "stop_detector";
    d.period_s = period_;
    d.subscriptions = {topics::kScenarioHeartbeat, topics::kErrors, topics::kGtOdom};
    d.publications = {topics::kSimShutdown};
    return d;
}

void StopDetectorNode::start(simbus::SimBus &bus) {
    bus.declare_topic(topics::kSimShutdown, topics::shutdown_schema());
}

void StopDetectorNode::tick(simbus::TickContext &ctx) {
    for (const auto &m : ctx.take(topics::kScenarioHeartbeat)) {
        heartbeat_seen_ = true;
        last_heartbeat_ = m.stamp();
    }
    for (const auto &m : ctx.take(topics::kErrors)) {
        bool fatal = m.payload.get_scalar("severity") ==
                     static_cast<double>(static_cast<int>(Severity::fatal));
        if (fatal && m.stamp() >= suppress_window_) {
            fatal_seen_ = true;
        }
    }
    for (const auto &m : ctx.take(topics::kGtOdom)) {
        vehicle_speed_ = m.payload.get_scalar("speed");
    }
    if (shutdown_sent_) {
        return;
    }

    int reason = -1;
    if (ctx.now() >= max_sim_time_) {
        reason = kReasonTimeout;
    } else if (fatal_seen_ && vehicle_speed_ < 0.5) {
        // wait for the stop to complete so the braking phase stays in the logs
        reason = kReasonFatalStop;
    } else if (heartbeat_seen_ && ctx.now() - last_heartbeat_ > 3.0 * heartbeat_period_) {
        reason = kReasonScenarioComplete;
    }
    if (reason >= 0) {
        Payload p = topics::shutdown_schema();
        p.at("reason").scalar() = static_cast<double>(reason);
        ctx.publish(topics::kSimShutdown, std::move(p));
        shutdown_sent_ = true;
    }
}

} // namespace racesim::scenario
