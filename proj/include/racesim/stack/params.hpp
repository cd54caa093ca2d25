#pragma once

#include "racesim/util/error.hpp"

#include <map>
#include <string>
#include <vector>

namespace racesim::stack {

/// Registry of runtime-tunable node parameters, addressable as
/// "node_name/param_path". Nodes declare parameters at construction;
/// startup overrides and scenario commands both resolve through here.
/// Unknown paths are configuration errors, never silent.
class ParamRegistry {
  public:
    void declare(const std::string &node, const std::string &param, double *storage) {
        std::string full = node + "/" + param;
        if (by_name_.count(full)) {
            throw ConfigError("parameter declared twice: " + full);
        }
        by_name_[full] = entries_.size();
        entries_.push_back({full, storage});
    }

    bool has(const std::string &full_name) const { return by_name_.count(full_name) > 0; }

    std::size_t id_of(const std::string &full_name) const {
        auto it = by_name_.find(full_name);
        if (it == by_name_.end()) {
            throw ConfigError("unknown parameter: " + full_name);
        }
        return it->second;
    }

    void set(const std::string &full_name, double value) { *entries_[id_of(full_name)].storage = value; }

    void set_by_id(std::size_t id, double value) {
        if (id >= entries_.size()) {
            throw ConfigError("parameter id out of range: " + std::to_string(id));
        }
        *entries_[id].storage = value;
    }

    double get(const std::string &full_name) const { return *entries_[id_of(full_name)].storage; }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(entries_.size());
        for (const auto &e : entries_) {
            out.push_back(e.name);
        }
        return out;
    }

  private:
    struct Entry {
        std::string name;
        double *storage;
    };
    std::vector<Entry> entries_;
    std::map<std::string, std::size_t> by_name_;
};

/// Declaration helper bound to one node's namespace.
class ParamScope {
  public:
    ParamScope(ParamRegistry &registry, std::string node) : registry_(registry), node_(std::move(node)) {}

    void declare(const std::string &param, double *storage) { registry_.declare(node_, param, storage); }

  private:
    ParamRegistry &registry_;
    std::string node_;
};

} // namespace racesim::stack
