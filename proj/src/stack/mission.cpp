#include "racesim/stack/nodes.hpp"

#include "racesim/topics.hpp"

namespace racesim::stack {

using simbus::Payload;

MissionNode::MissionNode(ParamScope params, double period) : period_(period) {
    params.declare("spawn_on_track", &spawn_on_track_);
    params.declare("performance_cap", &performance_cap_);
}

simbus::NodeDecl MissionNode::decl() const {
    simbus::NodeDecl d;
    d.name = "mission";
    d.period_s = period_;
    d.publications = {topics::kMissionState};
    return d;
}

void MissionNode::start(simbus::SimBus &bus) {
    bus.declare_topic(topics::kMissionState, topics::mission_state_schema());
}

void MissionNode::tick(simbus::TickContext &ctx) {
    Payload p = topics::mission_state_schema();
    // the pit-lane startup sequence is not modeled: without spawn_on_track
    // the mission never authorizes driving and the car stays put
    p.at("authorized").scalar() = spawn_on_track_ != 0.0 ? 1.0 : 0.0;
    p.at("cap").scalar() = performance_cap_;
    ctx.publish(topics::kMissionState, std::move(p));
}

} // namespace racesim::stack
