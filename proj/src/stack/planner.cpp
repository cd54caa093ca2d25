#include "racesim/stack/nodes.hpp"

#include "racesim/topics.hpp"

#include <algorithm>
#include <cmath>

namespace racesim::stack {

using simbus::Payload;
using trackgeom::Projection;

PlannerNode::PlannerNode(std::shared_ptr<const trackgeom::TrackModel> track,
                         std::shared_ptr<const trackgeom::RacingLine> line,
                         std::vector<OpponentDims> opponents, plant::VehicleParams vehicle,
                         ParamScope params, double period)
    : track_(std::move(track)), line_(std::move(line)), opponents_(std::move(opponents)),
      vehicle_(vehicle), period_(period) {
    engaged_.assign(opponents_.size(), false);
    opps_held_.assign(opponents_.size(), OppSnapshot{});
    params.declare("point_spacing", &point_spacing_);
    params.declare("engage_distance", &engage_distance_);
    params.declare("disengage_ahead", &disengage_ahead_);
    params.declare("clearance_widths", &clearance_widths_);
    params.declare("edge_margin", &edge_margin_);
    params.declare("shift_ramp", &shift_ramp_);
    params.declare("lead_in", &lead_in_);
    params.declare("overtake_side", &overtake_side_);
    params.declare("follow_gap", &follow_gap_);
}

simbus::NodeDecl PlannerNode::decl() const {
    simbus::NodeDecl d;
    d.name = "planner";
    d.period_s = period_;
    d.subscriptions = {topics::kLocOdom, topics::kPerceptionOpponents, topics::kMissionState,
                       topics::kCmdStop};
    d.publications = {topics::kPlanTrajectory};
    return d;
}

void PlannerNode::start(simbus::SimBus &bus) {
    bus.declare_topic(topics::kPlanTrajectory, topics::plan_schema());
}

void PlannerNode::tick(simbus::TickContext &ctx) {
    auto loc_msgs = ctx.take(topics::kLocOdom);
    if (!loc_msgs.empty()) {
        loc_latest_ = loc_msgs.back().payload;
        have_loc_ = true;
    }
    for (const auto &m : ctx.take(topics::kMissionState)) {
        authorized_held_ = m.payload.get_scalar("authorized");
        cap_held_ = m.payload.get_scalar("cap");
    }
    for (const auto &m : ctx.take(topics::kCmdStop)) {
        stop_latched_ = stop_latched_ || m.payload.get_scalar("active") != 0.0;
    }
    for (const auto &m : ctx.take(topics::kPerceptionOpponents)) {
        for (std::size_t i = 0; i < opponents_.size(); ++i) {
            std::string g = "g" + std::to_string(i);
            const auto &gp = m.payload.get_vec(g + ".position");
            opps_held_[i] = {{gp[0], gp[1]}, m.payload.get_scalar(g + ".speed"), true};
        }
    }
    if (!have_loc_) {
        return;
    }

    const auto &pos = loc_latest_.get_vec("pose.position");
    trackgeom::Vec2 ego{pos[0], pos[1]};

    const auto &line = line_->line();
    Projection ego_proj = line.project(ego);
    double ego_s = ego_proj.s;

    // engagement state machine per ghost
    double ref_speed = std::min(cap_held_, line_->speed_at(ego_s));
    int active_ghost = -1;
    double active_gap = 1e18;
    for (std::size_t i = 0; i < opps_held_.size(); ++i) {
        if (!opps_held_[i].valid) {
            continue;
        }
        double ghost_s = line.project(opps_held_[i].pos).s;
        double gap = line.signed_s_delta(ghost_s, ego_s); // positive: ghost ahead
        if (!engaged_[i]) {
            if (gap > 0.0 && gap <= engage_distance_ && opps_held_[i].speed + 0.5 < ref_speed) {
                engaged_[i] = true;
                warned_infeasible_ = false;
            }
        } else if (gap <= -(disengage_ahead_ + shift_ramp_ + 20.0)) {
            // hold the engagement until the ego has traversed the ramp back
            // to the racing line; the plan never snaps sideways
            engaged_[i] = false;
        }
        if (engaged_[i] && gap < active_gap) {
            active_gap = gap;
            active_ghost = static_cast<int>(i);
        }
    }

    double mode = 0.0;
    bool shift_active = false;
    double ghost_line_s = 0.0;
    double ghost_center_s = 0.0;
    double ghost_d_center = 0.0;
    double target_d = 0.0;
    double follow_speed = 0.0;

    if (stop_latched_ || authorized_held_ == 0.0) {
        mode = 3.0;
    } else if (active_ghost >= 0) {
        const OppSnapshot &opp = opps_held_[static_cast<std::size_t>(active_ghost)];
        ghost_line_s = line.project(opp.pos).s;
        Projection gc = track_->line().project(opp.pos);
        ghost_center_s = gc.s;
        ghost_d_center = gc.d;

        double clearance = clearance_widths_ * vehicle_.width;
        double half_w = vehicle_.width / 2.0;
        bool feasible = false;
        for (double side : {overtake_side_, -overtake_side_}) {
            double cand = ghost_d_center + side * clearance;
            double upper = track_->width_left_at(gc.s) - edge_margin_ - half_w;
            double lower = -(track_->width_right_at(gc.s) - edge_margin_ - half_w);
            if (cand >= lower && cand <= upper) {
                target_d = cand;
                feasible = true;
                break;
            }
        }
        if (feasible) {
            mode = 1.0;
            shift_active = true;
        } else {
            mode = 2.0;
            follow_speed = std::max(0.0, opp.speed);
            if (!warned_infeasible_) {
                ctx.raise_error(ErrorCode::planner_no_feasible_path, Severity::warning);
                warned_infeasible_ = true;
            }
        }
    }

    Payload plan = topics::plan_schema();
    auto &px = plan.at("x").vec();
    auto &py = plan.at("y").vec();
    auto &pv = plan.at("v").vec();
    auto &ps = plan.at("s").vec();
    auto &tlo = plan.at("tunnel.lo").vec();
    auto &thi = plan.at("tunnel.hi").vec();

    for (std::size_t i = 0; i < topics::kPlanPoints; ++i) {
        double s_i = line.normalize_s(ego_s + static_cast<double>(i) * point_spacing_);
        double v_i = std::min(line_->speed_at(s_i), cap_held_);

        trackgeom::Vec2 pt = line.point_at(s_i);
        double d_plan = 0.0;
        double s_center = 0.0;
        bool have_center = false;

        if (shift_active) {
            double rel = line.signed_s_delta(s_i, ghost_line_s);
            double w = 0.0;
            // full offset alongside the ghost; the return ramp starts once
            // the point is disengage_ahead past it
            if (rel >= -(lead_in_ + shift_ramp_) && rel <= disengage_ahead_ + shift_ramp_) {
                if (rel < -lead_in_) {
                    w = (rel + lead_in_ + shift_ramp_) / shift_ramp_;
                } else if (rel <= disengage_ahead_) {
                    w = 1.0;
                } else {
                    w = 1.0 - (rel - disengage_ahead_) / shift_ramp_;
                }
                w = std::clamp(w, 0.0, 1.0);
            }
            if (w > 0.0) {
                Projection pc = track_->line().project(pt);
                s_center = pc.s;
                have_center = true;
                d_plan = pc.d + w * (target_d - pc.d);
                trackgeom::CartesianPose cart =
                    frenet_to_cartesian(track_->line(), {s_center, d_plan, 0.0});
                pt = {cart.x, cart.y};
            }
        }

        px[i] = pt.x;
        py[i] = pt.y;
        ps[i] = s_i;
        if (mode == 3.0) {
            pv[i] = 0.0;
        } else if (mode == 2.0) {
            pv[i] = std::min(v_i, follow_speed);
        } else {
            pv[i] = v_i;
        }

        if (shift_active) {
            if (!have_center) {
                Projection pc = track_->line().project(pt);
                s_center = pc.s;
                d_plan = pc.d;
            }
            double lo = d_plan - 1.5 * vehicle_.width;
            double hi = d_plan + 1.5 * vehicle_.width;
            // keep the tunnel clear of the ghost footprint alongside it
            double rel_c = track_->line().signed_s_delta(s_center, ghost_center_s);
            double ghost_len = opponents_[static_cast<std::size_t>(active_ghost)].length;
            if (std::abs(rel_c) < ghost_len + vehicle_.length) {
                double g_clear = opponents_[static_cast<std::size_t>(active_ghost)].width / 2.0 +
                                 vehicle_.width / 2.0;
                if (target_d > ghost_d_center) {
                    lo = std::max(lo, ghost_d_center + g_clear);
                } else {
                    hi = std::min(hi, ghost_d_center - g_clear);
                }
            }
            lo = std::max(lo, -track_->width_right_at(s_center) + edge_margin_ / 2.0);
            hi = std::min(hi, track_->width_left_at(s_center) - edge_margin_ / 2.0);
            tlo[i] = lo;
            thi[i] = hi;
        }
    }

    plan.at("tunnel.active").scalar() = shift_active ? 1.0 : 0.0;
    plan.at("mode").scalar() = mode;
    ctx.publish(topics::kPlanTrajectory, std::move(plan));
}

} // namespace racesim::stack
