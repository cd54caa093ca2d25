#include "racesim/faults/faults.hpp"

#include "racesim/util/error.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>

namespace racesim::faults {

using simbus::Message;
using simbus::Payload;
using simbus::Tick;

namespace {

bool is_fault_key(const std::string &key) {
    return key == "fault_mult" || key == "fault_offset" || key == "fault_repeat" ||
           key == "fault_gauss";
}

FieldFault parse_fault_keys(const YAML::Node &node, const std::string &where) {
    FieldFault ff;
    if (auto m = node["fault_mult"]) {
        ff.mult = m.as<double>();
    }
    if (auto o = node["fault_offset"]) {
        ff.offset = o.as<double>();
    }
    if (auto r = node["fault_repeat"]) {
        if (!r.IsMap() || !r["count"]) {
            throw ConfigError(where + ": fault_repeat needs a count");
        }
        FieldFault::Repeat rep;
        rep.count = r["count"].as<std::int64_t>();
        if (rep.count < 1) {
            throw ConfigError(where + ": fault_repeat count must be >= 1");
        }
        if (auto v = r["value"]) {
            if (v.IsSequence()) {
                rep.value = v.as<std::vector<double>>();
            } else {
                rep.value = std::vector<double>{v.as<double>()};
            }
        }
        ff.repeat = rep;
    }
    if (auto g = node["fault_gauss"]) {
        if (!g.IsMap()) {
            throw ConfigError(where + ": fault_gauss needs mean and variance");
        }
        FieldFault::Gauss gauss;
        gauss.mean = g["mean"] ? g["mean"].as<double>() : 0.0;
        gauss.variance = g["variance"] ? g["variance"].as<double>() : 0.0;
        if (gauss.variance < 0.0) {
            throw ConfigError(where + ": fault_gauss variance must be >= 0");
        }
        ff.gauss = gauss;
    }
    return ff;
}

void parse_field_tree(const YAML::Node &node, const std::string &path,
                      std::map<std::string, FieldFault> &out, const std::string &where) {
    if (!node.IsMap()) {
        throw ConfigError(where + ": field_faults entries must be maps (at '" + path + "')");
    }
    FieldFault ff = parse_fault_keys(node, where + " '" + path + "'");
    if (!ff.empty()) {
        if (path.empty()) {
            throw ConfigError(where + ": fault keys are not allowed at the field_faults root");
        }
        out[path] = ff;
    }
    for (const auto &kv : node) {
        std::string key = kv.first.as<std::string>();
        if (is_fault_key(key)) {
            continue;
        }
        parse_field_tree(kv.second, path.empty() ? key : path + "." + key, out, where);
    }
}

} // namespace

namespace {

FaultSpec parse_yaml_node(const YAML::Node &root) {
    FaultSpec spec;
    if (root.IsNull() || (root.IsMap() && root.size() == 0)) {
        return spec;
    }
    if (!root.IsMap()) {
        throw ConfigError("fault YAML root must be a map of module -> topic list");
    }
    for (const auto &mod : root) {
        std::string module = mod.first.as<std::string>();
        if (!mod.second.IsSequence()) {
            throw ConfigError("fault module '" + module + "' must hold a list of topic entries");
        }
        for (const auto &entry : mod.second) {
            if (!entry.IsMap() || !entry["name"]) {
                throw ConfigError("fault entry under '" + module + "' needs a topic name");
            }
            TopicFault tf;
            tf.module = module;
            std::string topic = entry["name"].as<std::string>();
            std::string where = "fault entry " + topic;
            if (auto d = entry["delay"]) {
                tf.delay_ms = d.as<std::int64_t>();
                if (*tf.delay_ms < -1) {
                    throw ConfigError(where + ": delay must be >= 0 ms, or -1 to stop publication");
                }
            }
            if (auto ff = entry["field_faults"]) {
                parse_field_tree(ff, "", tf.field_faults, where);
            }
            if (!spec.topics.emplace(topic, std::move(tf)).second) {
                throw ConfigError("topic configured twice in fault spec: " + topic);
            }
        }
    }
    return spec;
}

} // namespace

FaultSpec FaultSpec::parse_yaml_string(const std::string &text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception &e) {
        throw ConfigError(std::string("fault YAML parse error: ") + e.what());
    }
    return parse_yaml_node(root);
}

FaultSpec FaultSpec::parse_yaml_file(const std::string &path) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    } catch (const YAML::BadFile &) {
        throw IoError("cannot open fault file: " + path);
    } catch (const YAML::Exception &e) {
        throw ConfigError("fault YAML parse error in " + path + ": " + e.what());
    }
    return parse_yaml_node(root);
}

void FaultSpec::merge(const FaultSpec &patch) {
    for (const auto &[topic, tf] : patch.topics) {
        auto it = topics.find(topic);
        if (it == topics.end()) {
            topics[topic] = tf;
            continue;
        }
        if (tf.delay_ms) {
            it->second.delay_ms = tf.delay_ms;
        }
        for (const auto &[path, ff] : tf.field_faults) {
            it->second.field_faults[path] = ff;
        }
    }
}

FaultProxyNode::FaultProxyNode(FaultSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), seed_(seed) {
    reset_repeat_states(spec_);
}

simbus::NodeDecl FaultProxyNode::decl() const {
    simbus::NodeDecl d;
    d.name = "fault_proxy";
    d.period_s = simbus::kBaseStepSeconds;
    for (const auto &[topic, tf] : spec_.topics) {
        d.subscriptions.push_back(raw_topic(topic));
        d.publications.push_back(topic);
    }
    return d;
}

void FaultProxyNode::validate_against(const simbus::SimBus &bus) const {
    for (const auto &[topic, tf] : spec_.topics) {
        if (!bus.has_topic(topic)) {
            throw ConfigError("fault spec references topic with no registered schema: " + topic);
        }
        const Payload &schema = bus.topic_schema(topic);
        for (const auto &[path, ff] : tf.field_faults) {
            const Payload *node = schema.find(path);
            if (!node) {
                throw ConfigError("fault spec addresses unknown field '" + path + "' on topic " +
                                  topic);
            }
            if (ff.repeat && ff.repeat->value && ff.repeat->value->size() > 1) {
                if (!node->is_vector() || node->vec().size() != ff.repeat->value->size()) {
                    throw ConfigError("fault_repeat value length does not match field '" + path +
                                      "' on topic " + topic);
                }
            }
        }
    }
}

void FaultProxyNode::install(simbus::SimBus &bus, std::size_t own_index) {
    validate_against(bus);
    for (const auto &[topic, tf] : spec_.topics) {
        bus.declare_topic(raw_topic(topic), bus.topic_schema(topic));
        bus.remap_all_publishers(topic, raw_topic(topic), own_index);
        gauss_rng_.emplace(topic, GaussianStream(seed_, "fault" + topic));
    }
    installed_ = true;
}

void FaultProxyNode::reset_repeat_states(const FaultSpec &for_spec) {
    for (const auto &[topic, tf] : for_spec.topics) {
        for (const auto &[path, ff] : tf.field_faults) {
            RepeatState st;
            if (ff.repeat) {
                st.remaining = ff.repeat->count;
            }
            repeat_state_[{topic, path}] = std::move(st);
        }
    }
}

void FaultProxyNode::reconfigure(const FaultSpec &patch) {
    spec_.merge(patch);
    reset_repeat_states(patch);
}

std::size_t FaultProxyNode::register_patch(FaultSpec patch) {
    for (const auto &[topic, tf] : patch.topics) {
        if (!spec_.topics.count(topic)) {
            throw ConfigError("runtime fault patch touches unproxied topic " + topic +
                              "; list it in the startup fault spec");
        }
    }
    patches_.push_back(std::move(patch));
    return patches_.size() - 1;
}

void FaultProxyNode::apply_patch(std::size_t id) {
    if (id >= patches_.size()) {
        throw ConfigError("unknown fault patch id " + std::to_string(id));
    }
    reconfigure(patches_[id]);
}

void FaultProxyNode::apply_field_faults(const std::string &topic, Payload &payload) {
    auto &tf = spec_.topics.at(topic);
    for (const auto &[path, ff] : tf.field_faults) {
        Payload *node = payload.find(path);
        if (!node) {
            throw ConfigError("fault field '" + path + "' missing from message on " + topic);
        }

        if (ff.repeat) {
            auto &st = repeat_state_[{topic, path}];
            if (st.remaining > 0) {
                if (!st.held) {
                    if (ff.repeat->value) {
                        // materialize the override onto the field's shape
                        Payload held = *node;
                        const auto &val = *ff.repeat->value;
                        held.for_each_leaf_mut([&](const std::string &, Payload &leaf) {
                            if (leaf.is_scalar()) {
                                leaf.scalar() = val[0];
                            } else if (val.size() == leaf.vec().size()) {
                                leaf.vec() = val;
                            } else {
                                std::fill(leaf.vec().begin(), leaf.vec().end(), val[0]);
                            }
                        });
                        st.held = std::move(held);
                    } else {
                        st.held = *node; // hold the first value after activation
                    }
                }
                *node = *st.held;
                st.remaining -= 1;
            }
        }

        double mult = ff.mult.value_or(1.0);
        double offset = ff.offset.value_or(0.0);
        double sigma = ff.gauss ? std::sqrt(ff.gauss->variance) : 0.0;
        double mean = ff.gauss ? ff.gauss->mean : 0.0;
        if (mult != 1.0 || offset != 0.0 || ff.gauss) {
            auto &rng = gauss_rng_.at(topic);
            node->for_each_leaf_mut([&](const std::string &, Payload &leaf) {
                auto apply = [&](double v) {
                    v = v * mult + offset;
                    if (ff.gauss) {
                        v += rng.normal(mean, sigma);
                    }
                    return v;
                };
                if (leaf.is_scalar()) {
                    leaf.scalar() = apply(leaf.scalar());
                } else {
                    for (double &v : leaf.vec()) {
                        v = apply(v);
                    }
                }
            });
        }
    }
}

void FaultProxyNode::tick(simbus::TickContext &ctx) {
    Tick now = ctx.tick();

    // delayed messages due now go out first: they are older than anything
    // arriving this step, and FIFO order per topic is preserved
    for (auto &[topic, queue] : delay_queues_) {
        while (!queue.empty() && queue.front().first <= now) {
            Message msg = std::move(queue.front().second);
            queue.pop_front();
            ctx.publish_stamped(topic, std::move(msg.payload), msg.stamp_tick);
        }
    }

    for (auto &[topic, tf] : spec_.topics) {
        auto msgs = ctx.take(raw_topic(topic));
        if (msgs.empty()) {
            continue;
        }
        std::int64_t delay_ms = tf.delay();
        for (auto &msg : msgs) {
            if (delay_ms == -1) {
                continue; // publication stopped
            }
            apply_field_faults(topic, msg.payload);
            if (delay_ms == 0) {
                ctx.publish_stamped(topic, std::move(msg.payload), msg.stamp_tick);
            } else {
                delay_queues_[topic].emplace_back(now + delay_ms, std::move(msg));
            }
        }
    }
}

} // namespace racesim::faults
