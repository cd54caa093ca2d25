#pragma once

#include "racesim/error_codes.hpp"
#include "racesim/simbus/message.hpp"
#include "racesim/simbus/payload.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace racesim::simbus {

enum class PacingMode { as_fast_as_possible, wall_clock_scaled };

/// Simulation clock. Time only advances through the scheduler, one base
/// step (1 ms) at a time; speedup and pacing affect wall-clock behavior
/// only, never the simulated results.
struct SimClock {
    Tick now = 0;
    double speedup = 1.0;
    PacingMode pacing = PacingMode::as_fast_as_possible;

    double now_sec() const { return tick_to_sec(now); }
};

/// Static description of a node: identity, period, and its topic wiring.
/// Remap rules rewrite this node's publications before resolution; a topic
/// matches at most one rule.
struct NodeDecl {
    std::string name;
    double period_s = kBaseStepSeconds;
    std::vector<std::string> subscriptions; // exact topic, or prefix ending in '*'
    std::vector<std::string> publications;
    std::vector<std::pair<std::string, std::string>> remaps;
};

class SimBus;

/// Per-callback view of the bus handed to a node while it runs.
class TickContext {
  public:
    TickContext(SimBus &bus, std::size_t node_index) : bus_(bus), node_(node_index) {}

    Tick tick() const;
    double now() const { return tick_to_sec(tick()); }

    /// Publish stamped with the current sim time.
    void publish(const std::string &topic, Payload payload);
    /// Publish preserving an earlier stamp (proxy/muxer forwarding).
    void publish_stamped(const std::string &topic, Payload payload, Tick stamp_tick);

    /// Drain the inbox for one exact topic, in arrival order.
    std::vector<Message> take(const std::string &topic);
    /// Drain every inbox topic matching a pattern, merged in arrival order.
    std::vector<Message> take_matching(const std::string &pattern);

    /// Report a stack error (message on /errors).
    void raise_error(ErrorCode code, Severity severity);

  private:
    SimBus &bus_;
    std::size_t node_;
};

class BusNode {
  public:
    virtual ~BusNode() = default;
    virtual NodeDecl decl() const = 0;
    /// Invoked once before the run starts, after every node is registered.
    virtual void start(SimBus &) {}
    virtual void tick(TickContext &ctx) = 0;
};

/// Read-only bus view available to the end-of-run predicate.
class BusState {
  public:
    explicit BusState(const SimBus &bus) : bus_(bus) {}
    double sim_time() const;
    bool seen(const std::string &topic) const;
    const Message *last(const std::string &topic) const;

  private:
    const SimBus &bus_;
};

/// Deterministic single-threaded event loop with topic pub/sub.
///
/// Each base step: every node whose period divides the current tick runs,
/// in registration order; messages published during those callbacks are
/// delivered together at the end of the step (appended to subscriber
/// inboxes and to the run trace). A callback that throws is converted into
/// a fatal message on /errors; the scheduler never crashes.
class SimBus {
  public:
    SimBus();

    void declare_topic(const std::string &topic, Payload schema);
    bool has_topic(const std::string &topic) const { return schemas_.count(topic) > 0; }
    const Payload &topic_schema(const std::string &topic) const;

    /// Register a node. Registration order is execution order within a step.
    std::size_t add_node(std::shared_ptr<BusNode> node);

    std::size_t node_count() const { return nodes_.size(); }
    const std::string &node_name(std::size_t index) const { return nodes_[index].decl.name; }
    std::size_t node_index(const std::string &name) const;

    /// Add a publication remap rule to one node (at most one rule per topic).
    void add_remap(std::size_t node_index, const std::string &from, const std::string &to);
    /// Remap publications of `from` for every node except `except`.
    void remap_all_publishers(const std::string &from, const std::string &to, std::size_t except);

    /// Observer invoked for each delivered message at the end of a step.
    void set_delivery_hook(std::function<void(const Message &)> hook) { delivery_hook_ = std::move(hook); }

    using EndPredicate = std::function<bool(const BusState &)>;

    /// Run until the predicate first holds (checked at step boundaries) or
    /// max_ticks elapse. Returns the full delivery trace.
    RunTrace run(SimClock clock, const EndPredicate &end_predicate, Tick max_ticks);

    const SimClock &clock() const { return clock_; }

  private:
    friend class TickContext;
    friend class BusState;

    struct NodeRec {
        std::shared_ptr<BusNode> node;
        NodeDecl decl;
        Tick period_ticks = 1;
        std::map<std::string, std::string> remap; // from -> to
        // inbox: per-topic arrival-ordered queue; the counter makes merged
        // drains across topics deterministic
        std::map<std::string, std::deque<std::pair<std::uint64_t, Message>>> inbox;
    };

    SimClock clock_;
    std::map<std::string, Payload> schemas_;
    std::vector<NodeRec> nodes_;
    std::map<std::pair<std::size_t, std::string>, std::uint64_t> seq_;
    std::vector<Message> pending_;
    std::map<std::string, Message> last_delivered_;
    std::uint64_t arrival_counter_ = 0;
    std::function<void(const Message &)> delivery_hook_;
    RunTrace trace_;
    bool running_ = false;

    void publish_from(std::size_t node_index, const std::string &topic, Payload payload,
                      Tick stamp_tick);
    void deliver_pending();
    static bool pattern_matches(const std::string &pattern, const std::string &topic);
};

} // namespace racesim::simbus
