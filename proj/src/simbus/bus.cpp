#include "racesim/simbus/bus.hpp"

#include "racesim/util/csv.hpp"
#include "racesim/util/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

namespace racesim::simbus {

std::string RunTrace::serialize() const {
    std::ostringstream out;
    for (const auto &name : node_names) {
        out << "node " << name << '\n';
    }
    for (const auto &e : entries) {
        out << e.delivery_tick << ' ' << e.msg.topic << ' ' << e.msg.stamp_tick << ' ' << e.msg.seq
            << ' ' << e.msg.publisher;
        e.msg.payload.for_each_leaf([&](const std::string &path, const Payload &leaf) {
            out << ' ' << path << '=';
            if (leaf.is_scalar()) {
                out << format_double(leaf.scalar());
            } else {
                for (std::size_t i = 0; i < leaf.vec().size(); ++i) {
                    out << (i ? "," : "") << format_double(leaf.vec()[i]);
                }
            }
        });
        out << '\n';
    }
    out << "end " << end_tick << '\n';
    return out.str();
}

Tick TickContext::tick() const { return bus_.clock_.now; }

void TickContext::publish(const std::string &topic, Payload payload) {
    bus_.publish_from(node_, topic, std::move(payload), bus_.clock_.now);
}

void TickContext::publish_stamped(const std::string &topic, Payload payload, Tick stamp_tick) {
    bus_.publish_from(node_, topic, std::move(payload), stamp_tick);
}

std::vector<Message> TickContext::take(const std::string &topic) {
    auto &inbox = bus_.nodes_[node_].inbox;
    auto it = inbox.find(topic);
    std::vector<Message> out;
    if (it != inbox.end()) {
        out.reserve(it->second.size());
        for (auto &[arrival, msg] : it->second) {
            out.push_back(std::move(msg));
        }
        it->second.clear();
    }
    return out;
}

std::vector<Message> TickContext::take_matching(const std::string &pattern) {
    auto &inbox = bus_.nodes_[node_].inbox;
    std::vector<std::pair<std::uint64_t, Message>> merged;
    for (auto &[topic, queue] : inbox) {
        if (!SimBus::pattern_matches(pattern, topic)) {
            continue;
        }
        for (auto &entry : queue) {
            merged.push_back(std::move(entry));
        }
        queue.clear();
    }
    std::sort(merged.begin(), merged.end(),
              [](const auto &a, const auto &b) { return a.first < b.first; });
    std::vector<Message> out;
    out.reserve(merged.size());
    for (auto &[arrival, msg] : merged) {
        out.push_back(std::move(msg));
    }
    return out;
}

void TickContext::raise_error(ErrorCode code, Severity severity) {
    Payload p;
    p.set("source", static_cast<double>(node_));
    p.set("code", static_cast<double>(static_cast<int>(code)));
    p.set("severity", static_cast<double>(static_cast<int>(severity)));
    bus_.publish_from(node_, "/errors", std::move(p), bus_.clock_.now);
}

double BusState::sim_time() const { return bus_.clock_.now_sec(); }

bool BusState::seen(const std::string &topic) const {
    return bus_.last_delivered_.count(topic) > 0;
}

const Message *BusState::last(const std::string &topic) const {
    auto it = bus_.last_delivered_.find(topic);
    return it == bus_.last_delivered_.end() ? nullptr : &it->second;
}

SimBus::SimBus() {
    Payload errors;
    errors.set("source", 0.0);
    errors.set("code", 0.0);
    errors.set("severity", 0.0);
    declare_topic("/errors", std::move(errors));
}

void SimBus::declare_topic(const std::string &topic, Payload schema) {
    if (topic.empty() || topic.front() != '/') {
        throw ConfigError("topic must start with '/': " + topic);
    }
    auto it = schemas_.find(topic);
    if (it != schemas_.end()) {
        if (!it->second.same_shape(schema)) {
            throw ConfigError("topic redeclared with different schema: " + topic);
        }
        return;
    }
    schemas_.emplace(topic, std::move(schema));
}

const Payload &SimBus::topic_schema(const std::string &topic) const {
    auto it = schemas_.find(topic);
    if (it == schemas_.end()) {
        throw ConfigError("topic has no registered schema: " + topic);
    }
    return it->second;
}

std::size_t SimBus::add_node(std::shared_ptr<BusNode> node) {
    if (running_) {
        throw ConfigError("cannot register nodes while the scheduler runs");
    }
    NodeRec rec;
    rec.decl = node->decl();
    rec.node = std::move(node);

    double period_ticks = rec.decl.period_s / kBaseStepSeconds;
    Tick rounded = static_cast<Tick>(std::llround(period_ticks));
    if (rounded < 1 || std::abs(period_ticks - static_cast<double>(rounded)) > 1e-9) {
        throw ConfigError("node '" + rec.decl.name + "' period " +
                          std::to_string(rec.decl.period_s) +
                          " s is not a positive integer multiple of the 1 ms base step");
    }
    rec.period_ticks = rounded;

    for (const auto &[from, to] : rec.decl.remaps) {
        if (!rec.remap.emplace(from, to).second) {
            throw ConfigError("node '" + rec.decl.name + "' has duplicate remap for " + from);
        }
    }
    for (const auto &other : nodes_) {
        if (other.decl.name == rec.decl.name) {
            throw ConfigError("duplicate node name: " + rec.decl.name);
        }
    }
    nodes_.push_back(std::move(rec));
    return nodes_.size() - 1;
}

std::size_t SimBus::node_index(const std::string &name) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].decl.name == name) {
            return i;
        }
    }
    throw ConfigError("unknown node: " + name);
}

void SimBus::add_remap(std::size_t node_index, const std::string &from, const std::string &to) {
    if (!nodes_[node_index].remap.emplace(from, to).second) {
        throw ConfigError("node '" + nodes_[node_index].decl.name + "' already remaps " + from);
    }
}

void SimBus::remap_all_publishers(const std::string &from, const std::string &to,
                                  std::size_t except) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (i != except) {
            nodes_[i].remap[from] = to;
        }
    }
}

bool SimBus::pattern_matches(const std::string &pattern, const std::string &topic) {
    if (!pattern.empty() && pattern.back() == '*') {
        return topic.compare(0, pattern.size() - 1, pattern, 0, pattern.size() - 1) == 0;
    }
    return pattern == topic;
}

void SimBus::publish_from(std::size_t node_index, const std::string &topic, Payload payload,
                          Tick stamp_tick) {
    const auto &remap = nodes_[node_index].remap;
    auto rit = remap.find(topic);
    const std::string &effective = (rit == remap.end()) ? topic : rit->second;

    const Payload &schema = topic_schema(effective);
    if (!payload.same_shape(schema)) {
        throw ConfigError("payload does not match schema of topic " + effective + " (published by " +
                          nodes_[node_index].decl.name + ")");
    }

    Message msg;
    msg.topic = effective;
    msg.stamp_tick = stamp_tick;
    msg.seq = seq_[{node_index, effective}]++;
    msg.publisher = node_index;
    msg.payload = std::move(payload);
    pending_.push_back(std::move(msg));
}

void SimBus::deliver_pending() {
    for (auto &msg : pending_) {
        trace_.entries.push_back(TraceEntry{msg, clock_.now});
        for (auto &rec : nodes_) {
            for (const auto &pattern : rec.decl.subscriptions) {
                if (pattern_matches(pattern, msg.topic)) {
                    rec.inbox[msg.topic].emplace_back(arrival_counter_, msg);
                    break;
                }
            }
        }
        ++arrival_counter_;
        if (delivery_hook_) {
            delivery_hook_(msg);
        }
        last_delivered_[msg.topic] = std::move(msg);
    }
    pending_.clear();
}

RunTrace SimBus::run(SimClock clock, const EndPredicate &end_predicate, Tick max_ticks) {
    if (clock.speedup < 1.0) {
        throw ConfigError("speedup factor must be >= 1");
    }
    clock_ = clock;
    clock_.now = 0;
    trace_ = RunTrace{};
    for (const auto &rec : nodes_) {
        trace_.node_names.push_back(rec.decl.name);
    }
    for (auto &rec : nodes_) {
        rec.node->start(*this);
    }

    running_ = true;
    BusState state(*this);
    const auto wall_start = std::chrono::steady_clock::now();

    for (clock_.now = 0; clock_.now <= max_ticks; ++clock_.now) {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            auto &rec = nodes_[i];
            if (clock_.now % rec.period_ticks != 0) {
                continue;
            }
            TickContext ctx(*this, i);
            try {
                rec.node->tick(ctx);
            } catch (const std::exception &) {
                // a failing callback becomes a fatal stack error, never a crash
                Payload p;
                p.set("source", static_cast<double>(i));
                p.set("code", static_cast<double>(static_cast<int>(ErrorCode::callback_exception)));
                p.set("severity", static_cast<double>(static_cast<int>(Severity::fatal)));
                publish_from(i, "/errors", std::move(p), clock_.now);
            }
        }
        deliver_pending();

        if (end_predicate && end_predicate(state)) {
            break;
        }

        if (clock_.pacing == PacingMode::wall_clock_scaled) {
            auto target = wall_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                           std::chrono::duration<double>(
                                               tick_to_sec(clock_.now + 1) / clock_.speedup));
            std::this_thread::sleep_until(target);
        }
    }

    running_ = false;
    trace_.end_tick = clock_.now;
    return std::move(trace_);
}

} // namespace racesim::simbus
