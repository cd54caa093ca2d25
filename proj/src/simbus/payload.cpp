#include "racesim/simbus/payload.hpp"

#include "racesim/util/error.hpp"

namespace racesim::simbus {

namespace {

std::pair<std::string, std::string> split_head(const std::string &path) {
    auto dot = path.find('.');
    if (dot == std::string::npos) {
        return {path, {}};
    }
    return {path.substr(0, dot), path.substr(dot + 1)};
}

} // namespace

Payload &Payload::set(const std::string &path, Payload value) {
    if (path.empty()) {
        *this = std::move(value);
        return *this;
    }
    if (!is_map()) {
        node_ = Map{};
    }
    auto [head, rest] = split_head(path);
    Payload &child = children()[head];
    return child.set(rest, std::move(value));
}

const Payload *Payload::find(const std::string &path) const {
    if (path.empty()) {
        return this;
    }
    if (!is_map()) {
        return nullptr;
    }
    auto [head, rest] = split_head(path);
    auto it = children().find(head);
    if (it == children().end()) {
        return nullptr;
    }
    return it->second.find(rest);
}

Payload *Payload::find(const std::string &path) {
    return const_cast<Payload *>(static_cast<const Payload *>(this)->find(path));
}

const Payload &Payload::at(const std::string &path) const {
    const Payload *p = find(path);
    if (!p) {
        throw ConfigError("payload field not found: " + path);
    }
    return *p;
}

Payload &Payload::at(const std::string &path) {
    Payload *p = find(path);
    if (!p) {
        throw ConfigError("payload field not found: " + path);
    }
    return *p;
}

bool Payload::same_shape(const Payload &other) const {
    if (node_.index() != other.node_.index()) {
        return false;
    }
    if (is_vector()) {
        return vec().size() == other.vec().size();
    }
    if (is_map()) {
        const Map &a = children();
        const Map &b = other.children();
        if (a.size() != b.size()) {
            return false;
        }
        auto ia = a.begin();
        auto ib = b.begin();
        for (; ia != a.end(); ++ia, ++ib) {
            if (ia->first != ib->first || !ia->second.same_shape(ib->second)) {
                return false;
            }
        }
    }
    return true;
}

void Payload::walk(const std::string &prefix,
                   const std::function<void(const std::string &, const Payload &)> &fn) const {
    if (is_map()) {
        for (const auto &[name, child] : children()) {
            child.walk(prefix.empty() ? name : prefix + "." + name, fn);
        }
    } else {
        fn(prefix, *this);
    }
}

void Payload::walk_mut(const std::string &prefix,
                       const std::function<void(const std::string &, Payload &)> &fn) {
    if (is_map()) {
        for (auto &[name, child] : children()) {
            child.walk_mut(prefix.empty() ? name : prefix + "." + name, fn);
        }
    } else {
        fn(prefix, *this);
    }
}

void Payload::for_each_leaf(
    const std::function<void(const std::string &, const Payload &)> &fn) const {
    walk("", fn);
}

void Payload::for_each_leaf_mut(const std::function<void(const std::string &, Payload &)> &fn) {
    walk_mut("", fn);
}

std::vector<std::string> Payload::flat_names() const {
    std::vector<std::string> names;
    for_each_leaf([&](const std::string &path, const Payload &leaf) {
        if (leaf.is_scalar()) {
            names.push_back(path);
        } else {
            for (std::size_t i = 0; i < leaf.vec().size(); ++i) {
                names.push_back(path + "." + std::to_string(i));
            }
        }
    });
    return names;
}

std::vector<double> Payload::flat_values() const {
    std::vector<double> values;
    for_each_leaf([&](const std::string &, const Payload &leaf) {
        if (leaf.is_scalar()) {
            values.push_back(leaf.scalar());
        } else {
            values.insert(values.end(), leaf.vec().begin(), leaf.vec().end());
        }
    });
    return values;
}

} // namespace racesim::simbus
