#include "racesim/stack/nodes.hpp"

#include "racesim/topics.hpp"

namespace racesim::stack {

using simbus::Payload;

LocMuxerNode::LocMuxerNode(ParamScope params, double period) : period_(period) {
    params.declare("warmup", &warmup_);
    params.declare("ground_truth_mode", &ground_truth_mode_);
}

simbus::NodeDecl LocMuxerNode::decl() const {
    simbus::NodeDecl d;
    d.name = "loc_muxer";
    d.period_s = period_;
    d.subscriptions = {topics::kGtOdom, topics::kLocOdomRaw};
    d.publications = {topics::kLocOdom};
    return d;
}

void LocMuxerNode::start(simbus::SimBus &bus) {
    bus.declare_topic(topics::kLocOdom, topics::loc_odom_schema());
    bus.declare_topic(topics::kLocOdomRaw, topics::loc_odom_schema());
}

void LocMuxerNode::tick(simbus::TickContext &ctx) {
    auto gt_msgs = ctx.take(topics::kGtOdom);
    auto raw_msgs = ctx.take(topics::kLocOdomRaw);

    bool use_gt = ground_truth_mode_ != 0.0 || ctx.now() < warmup_;
    if (use_gt) {
        if (gt_msgs.empty()) {
            return;
        }
        const auto &m = gt_msgs.back();
        Payload p = topics::loc_odom_schema();
        p.at("pose.position").vec() = m.payload.get_vec("pose.position");
        p.at("pose.yaw").scalar() = m.payload.get_scalar("pose.yaw");
        p.at("pose.covariance").vec() = {1e-6, 1e-6, 1e-8};
        p.at("twist.linear").vec() = m.payload.get_vec("twist.linear");
        p.at("twist.yaw_rate").scalar() = m.payload.get_scalar("twist.yaw_rate");
        p.at("twist.covariance").vec() = {1e-6, 1e-6};
        p.at("position_covariance").scalar() = 1e-6;
        ctx.publish_stamped(topics::kLocOdom, std::move(p), m.stamp_tick);
    } else {
        for (const auto &m : raw_msgs) {
            ctx.publish_stamped(topics::kLocOdom, m.payload, m.stamp_tick);
        }
    }
}

} // namespace racesim::stack
