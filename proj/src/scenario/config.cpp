#include "racesim/scenario/config.hpp"

#include "racesim/util/error.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace racesim::scenario {

namespace fs = std::filesystem;

std::vector<std::string> ReportConfig::default_tests() {
    return {"tracking_errors", "car_started",     "car_stopped",     "stack_errors",
            "track_boundaries", "dynamics_metrics", "ghost_collisions"};
}

bool ReportConfig::test_enabled(const std::string &name) const {
    return std::find(tests.begin(), tests.end(), name) != tests.end();
}

namespace {

const std::map<std::string, Threshold> kDefaultThresholds = {
    {"lateral_error", {1.0, 2.0}},   // m
    {"heading_error", {0.08, 0.15}}, // rad
    {"yaw_rate", {0.6, 1.0}},        // rad/s
    {"understeer", {2.0, 4.0}},      // deg
    {"sideslip", {4.0, 7.0}},        // deg
    {"lateral_velocity", {6.0, 10.0}} // m/s
};

double get_or(const YAML::Node &n, const char *key, double fallback) {
    if (auto v = n[key]) {
        return v.as<double>();
    }
    return fallback;
}

void parse_vehicle(const YAML::Node &n, plant::VehicleParams &v) {
    v.mass = get_or(n, "mass", v.mass);
    v.yaw_inertia = get_or(n, "yaw_inertia", v.yaw_inertia);
    v.lf = get_or(n, "lf", v.lf);
    v.lr = get_or(n, "lr", v.lr);
    v.cornering_stiffness_front = get_or(n, "cornering_stiffness_front", v.cornering_stiffness_front);
    v.cornering_stiffness_rear = get_or(n, "cornering_stiffness_rear", v.cornering_stiffness_rear);
    v.steer_max = get_or(n, "steer_max", v.steer_max);
    v.force_max = get_or(n, "force_max", v.force_max);
    v.brake_force_max = get_or(n, "brake_force_max", v.brake_force_max);
    v.drag_coeff = get_or(n, "drag_coeff", v.drag_coeff);
    v.length = get_or(n, "length", v.length);
    v.width = get_or(n, "width", v.width);
    v.steer_rate_max = get_or(n, "steer_rate_max", v.steer_rate_max);
    v.force_rate_max = get_or(n, "force_rate_max", v.force_rate_max);
    v.blend_speed = get_or(n, "blend_speed", v.blend_speed);
}

void parse_sensors(const YAML::Node &n, plant::SensorSuite &s) {
    s.gt_period = get_or(n, "gt_period", s.gt_period);
    s.gps_period = get_or(n, "gps_period", s.gps_period);
    s.gps_sigma = get_or(n, "gps_sigma", s.gps_sigma);
    s.gps_satellites = get_or(n, "gps_satellites", s.gps_satellites);
    if (auto c = n["imu_count"]) {
        s.imu_count = c.as<std::size_t>();
    }
    s.imu_period = get_or(n, "imu_period", s.imu_period);
    s.imu_accel_sigma = get_or(n, "imu_accel_sigma", s.imu_accel_sigma);
    s.imu_gyro_sigma = get_or(n, "imu_gyro_sigma", s.imu_gyro_sigma);
    s.imu_accel_bias = get_or(n, "imu_accel_bias", s.imu_accel_bias);
    s.imu_gyro_bias = get_or(n, "imu_gyro_bias", s.imu_gyro_bias);
    s.wheel_period = get_or(n, "wheel_period", s.wheel_period);
    s.wheel_sigma = get_or(n, "wheel_sigma", s.wheel_sigma);
    s.lio_period = get_or(n, "lio_period", s.lio_period);
    s.lio_pos_sigma = get_or(n, "lio_pos_sigma", s.lio_pos_sigma);
    s.lio_yaw_sigma = get_or(n, "lio_yaw_sigma", s.lio_yaw_sigma);
    s.lio_latency = get_or(n, "lio_latency", s.lio_latency);
}

} // namespace

ScenarioConfig parse_config_documents(const std::string &yaml_text, const std::string &name,
                                      const std::string &dir) {
    std::vector<YAML::Node> docs;
    try {
        docs = YAML::LoadAll(yaml_text);
    } catch (const YAML::Exception &e) {
        throw ConfigError("config YAML parse error: " + std::string(e.what()));
    }
    if (docs.size() != 2) {
        throw ConfigError("config file must contain exactly two YAML documents (stack + report), got " +
                          std::to_string(docs.size()));
    }

    ScenarioConfig cfg;
    cfg.name = name;
    cfg.dir = dir;
    cfg.report.tests = ReportConfig::default_tests();
    cfg.report.thresholds = kDefaultThresholds;

    const YAML::Node &doc1 = docs[0];
    YAML::Node sim = doc1["sim"];
    if (!sim || !sim.IsMap()) {
        throw ConfigError("config document 1 needs a 'sim' map");
    }
    if (!sim["track"] || !sim["racing_line"]) {
        throw ConfigError("sim config needs 'track' and 'racing_line' files");
    }
    cfg.sim.track_file = sim["track"].as<std::string>();
    cfg.sim.line_file = sim["racing_line"].as<std::string>();
    if (auto init = sim["init"]) {
        cfg.sim.init.s = get_or(init, "s", 0.0);
        cfg.sim.init.d = get_or(init, "d", 0.0);
        cfg.sim.init.mu = get_or(init, "mu", 0.0);
        cfg.sim.v0 = get_or(init, "v0", 0.0);
    }
    cfg.sim.speedup = get_or(sim, "speedup", 1.0);
    if (cfg.sim.speedup < 1.0) {
        throw ConfigError("speedup must be >= 1");
    }
    if (auto p = sim["pacing"]) {
        std::string mode = p.as<std::string>();
        if (mode == "as_fast_as_possible") {
            cfg.sim.pacing = simbus::PacingMode::as_fast_as_possible;
        } else if (mode == "wall_clock_scaled") {
            cfg.sim.pacing = simbus::PacingMode::wall_clock_scaled;
        } else {
            throw ConfigError("unknown pacing mode: " + mode);
        }
    }
    if (auto g = sim["ground_truth_mode"]) {
        cfg.sim.ground_truth_mode = g.as<bool>();
    }
    if (auto s = sim["seed"]) {
        cfg.sim.seed = s.as<std::uint64_t>();
    }
    cfg.sim.max_sim_time = get_or(sim, "max_sim_time", 600.0);
    if (auto f = sim["faults"]) {
        cfg.sim.fault_file = f.as<std::string>();
    }
    if (auto ghosts = sim["ghosts"]) {
        for (const auto &g : ghosts) {
            GhostConfig gc;
            if (auto lf = g["line"]) {
                gc.line_file = lf.as<std::string>();
            }
            gc.s0 = get_or(g, "s0", 0.0);
            gc.speed = get_or(g, "speed", 0.0);
            gc.length = get_or(g, "length", gc.length);
            gc.width = get_or(g, "width", gc.width);
            cfg.sim.ghosts.push_back(gc);
        }
    }
    if (auto tags = sim["tags"]) {
        for (const auto &t : tags) {
            cfg.sim.tags.push_back(t.as<std::string>());
        }
    }
    if (auto v = doc1["vehicle"]) {
        parse_vehicle(v, cfg.sim.vehicle);
    }
    if (auto s = doc1["sensors"]) {
        parse_sensors(s, cfg.sim.sensors);
    }
    if (auto params = doc1["parameters"]) {
        if (!params.IsMap()) {
            throw ConfigError("'parameters' must be a map of node/param -> value");
        }
        for (const auto &kv : params) {
            cfg.param_overrides[kv.first.as<std::string>()] = kv.second.as<double>();
        }
    }

    const YAML::Node &doc2 = docs[1];
    if (auto rep = doc2["report"]) {
        if (auto tests = rep["tests"]) {
            cfg.report.tests.clear();
            auto known = ReportConfig::default_tests();
            for (const auto &t : tests) {
                std::string name_t = t.as<std::string>();
                if (std::find(known.begin(), known.end(), name_t) == known.end()) {
                    throw ConfigError("unknown test in report config: " + name_t);
                }
                cfg.report.tests.push_back(name_t);
            }
        }
        cfg.report.freq_bound = get_or(rep, "freq_bound", cfg.report.freq_bound);
        cfg.report.min_distance = get_or(rep, "min_distance", cfg.report.min_distance);
        cfg.report.stop_speed = get_or(rep, "stop_speed", cfg.report.stop_speed);
        cfg.report.stop_duration = get_or(rep, "stop_duration", cfg.report.stop_duration);
        if (auto full = rep["full_reports"]) {
            cfg.report.full_reports = full.as<bool>();
        }
        if (auto th = rep["thresholds"]) {
            for (const auto &kv : th) {
                std::string metric = kv.first.as<std::string>();
                if (!kDefaultThresholds.count(metric)) {
                    throw ConfigError("unknown dynamics metric in thresholds: " + metric);
                }
                Threshold t = cfg.report.thresholds[metric];
                t.yellow = get_or(kv.second, "yellow", t.yellow);
                t.red = get_or(kv.second, "red", t.red);
                cfg.report.thresholds[metric] = t;
            }
        }
    }
    return cfg;
}

ScenarioScript parse_script(const std::string &yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception &e) {
        throw ConfigError("scenario YAML parse error: " + std::string(e.what()));
    }
    ScenarioScript script;
    if (root.IsNull()) {
        return script;
    }
    if (auto end = root["end"]) {
        script.end_after_laps = get_or(end, "after_lap", script.end_after_laps);
        script.heartbeat_grace = get_or(end, "grace", script.heartbeat_grace);
    }
    if (auto groups = root["groups"]) {
        for (const auto &g : groups) {
            CommandGroup cg;
            if (!g["lap"] || !g["s"]) {
                throw ConfigError("every scenario command group needs 'lap' and 's'");
            }
            cg.lap = g["lap"].as<int>();
            cg.s = g["s"].as<double>();
            if (cg.lap < 1) {
                throw ConfigError("command group lap must be >= 1");
            }
            if (auto params = g["parameters"]) {
                for (const auto &item : params) {
                    CommandItem ci;
                    if (item["fault_patch"]) {
                        ci.kind = CommandItem::Kind::fault_patch;
                        YAML::Emitter em;
                        em << item["fault_patch"];
                        ci.patch = faults::FaultSpec::parse_yaml_string(em.c_str());
                    } else if (item["target"] && item["value"]) {
                        ci.kind = CommandItem::Kind::parameter;
                        ci.target = item["target"].as<std::string>();
                        ci.value = item["value"].as<double>();
                    } else {
                        throw ConfigError(
                            "command items need either target/value or a fault_patch");
                    }
                    cg.items.push_back(std::move(ci));
                }
            }
            script.groups.push_back(std::move(cg));
        }
    }
    for (std::size_t i = 1; i < script.groups.size(); ++i) {
        const auto &a = script.groups[i - 1];
        const auto &b = script.groups[i];
        if (b.lap < a.lap || (b.lap == a.lap && b.s < a.s)) {
            throw ConfigError("scenario command groups must be sorted by (lap, s)");
        }
    }
    return script;
}

std::pair<ScenarioConfig, ScenarioScript> load_scenario(const std::string &dir) {
    fs::path base(dir);
    fs::path config_path = base / "config.yaml";
    fs::path script_path = base / "scenario.yaml";
    if (!fs::exists(config_path)) {
        throw IoError("scenario config not found: " + config_path.string());
    }
    std::ifstream cf(config_path);
    std::stringstream cbuf;
    cbuf << cf.rdbuf();

    std::string name = base.filename().string();
    if (name.empty()) {
        name = base.parent_path().filename().string();
    }
    ScenarioConfig cfg = parse_config_documents(cbuf.str(), name, base.string());

    ScenarioScript script;
    if (fs::exists(script_path)) {
        std::ifstream sf(script_path);
        std::stringstream sbuf;
        sbuf << sf.rdbuf();
        script = parse_script(sbuf.str());
    }
    return {cfg, script};
}

} // namespace racesim::scenario
