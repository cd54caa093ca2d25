#include "racesim/scenario/runner.hpp"

#include "racesim/faults/faults.hpp"
#include "racesim/scenario/manager.hpp"
#include "racesim/stack/localization.hpp"
#include "racesim/stack/nodes.hpp"
#include "racesim/stack/params.hpp"
#include "racesim/topics.hpp"
#include "racesim/util/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace racesim::scenario {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using simbus::PacingMode;
using simbus::Payload;
using telemetry::TopicTable;

namespace {

std::string resolve_path(const std::string &dir, const std::string &file) {
    fs::path p(file);
    if (p.is_absolute()) {
        return file;
    }
    return (fs::path(dir) / p).string();
}

telemetry::ColumnSelection build_selection(std::size_t n_ghosts) {
    telemetry::ColumnSelection sel;
    sel[topics::kGtOdom] = {};
    sel[topics::kCtrlDebug] = {};
    sel[topics::kLocOdom] = {};
    sel[topics::kCmdStop] = {};
    sel[topics::kMissionState] = {};
    sel[topics::kGpsFix] = {};
    sel[topics::kCmdActuation] = {};
    if (n_ghosts > 0) {
        sel[topics::kGtOpponents] = {};
        sel[topics::kPerceptionOpponents] = {};
    }
    return sel;
}

telemetry::ReportMode effective_mode(const ScenarioConfig &cfg, const RunOptions &opts) {
    bool full = cfg.report.full_reports;
    if (opts.overview_only.has_value()) {
        full = !*opts.overview_only;
    }
    return full ? telemetry::ReportMode::full : telemetry::ReportMode::overview_only;
}

/// Telemetry pipeline shared by live runs and report regeneration.
telemetry::RunReport analyze(const std::map<std::string, TopicTable> &tables,
                             const ScenarioConfig &cfg, const trackgeom::TrackModel &track,
                             const telemetry::RunOutcome &outcome,
                             const std::map<std::string, double> &delays,
                             telemetry::ReportMode mode, const std::string &out_dir) {
    telemetry::MasterTable master =
        telemetry::merge_tables(tables, build_selection(cfg.sim.ghosts.size()), cfg.report.freq_bound);
    telemetry::FrenetTrack frenet = telemetry::build_frenet_track(master, track);
    std::vector<telemetry::LapMetrics> laps =
        telemetry::compute_lap_metrics(master, frenet, cfg.sim.vehicle);
    telemetry::GhostAnalysis ghosts =
        telemetry::analyze_ghosts(master, frenet, track, cfg.sim.ghosts, cfg.sim.vehicle);

    telemetry::TestContext tctx{master, frenet, track, cfg, laps, ghosts, outcome, &tables};
    std::vector<telemetry::TestError> errors = telemetry::run_tests(tctx);
    telemetry::RunReport report = telemetry::assemble_report(tctx, errors);

    if (!out_dir.empty()) {
        telemetry::ReportInputs inputs{master, frenet, track, cfg, delays};
        telemetry::emit_reports(report, inputs, mode, out_dir);
    }
    return report;
}

void write_run_meta(const std::string &out_dir, const ScenarioConfig &cfg,
                    const telemetry::RunOutcome &outcome,
                    const std::map<std::string, double> &delays) {
    json meta;
    meta["scenario"] = cfg.name;
    meta["seed"] = cfg.sim.seed;
    meta["outcome"] = {{"timed_out", outcome.timed_out},
                       {"shutdown_reason", outcome.shutdown_reason}};
    meta["vehicle"] = {{"mass", cfg.sim.vehicle.mass},
                       {"lf", cfg.sim.vehicle.lf},
                       {"lr", cfg.sim.vehicle.lr},
                       {"length", cfg.sim.vehicle.length},
                       {"width", cfg.sim.vehicle.width},
                       {"blend_speed", cfg.sim.vehicle.blend_speed}};
    meta["report"] = {{"tests", cfg.report.tests},
                      {"freq_bound", cfg.report.freq_bound},
                      {"min_distance", cfg.report.min_distance},
                      {"stop_speed", cfg.report.stop_speed},
                      {"stop_duration", cfg.report.stop_duration},
                      {"full_reports", cfg.report.full_reports}};
    json th = json::object();
    for (const auto &[name, t] : cfg.report.thresholds) {
        th[name] = {{"yellow", t.yellow}, {"red", t.red}};
    }
    meta["thresholds"] = th;
    json ghosts = json::array();
    for (const auto &g : cfg.sim.ghosts) {
        ghosts.push_back({{"length", g.length}, {"width", g.width}});
    }
    meta["ghosts"] = ghosts;
    json params = json::object();
    for (const auto &[k, v] : cfg.param_overrides) {
        params[k] = v;
    }
    meta["param_overrides"] = params;
    json dl = json::object();
    for (const auto &[topic, d] : delays) {
        dl[topic] = d;
    }
    meta["max_topic_delay"] = dl;

    std::ofstream out(fs::path(out_dir) / "run_meta.json");
    if (!out) {
        throw IoError("cannot write run_meta.json in " + out_dir);
    }
    out << meta.dump(2) << "\n";
}

} // namespace

RunResult run_scenario(const std::string &dir, const RunOptions &opts) {
    auto [cfg, script] = load_scenario(dir);
    return run_scenario(std::move(cfg), std::move(script), opts);
}

RunResult run_scenario(ScenarioConfig cfg, ScenarioScript script, const RunOptions &opts) {
    // command-line overrides on the run's own copy of the configuration
    if (opts.speedup) {
        cfg.sim.speedup = *opts.speedup;
    }
    if (opts.ground_truth) {
        cfg.sim.ground_truth_mode = *opts.ground_truth;
    }
    if (opts.seed) {
        cfg.sim.seed = *opts.seed;
    }
    if (opts.pacing) {
        cfg.sim.pacing = *opts.pacing;
    }

    auto track = std::make_shared<trackgeom::TrackModel>(
        trackgeom::TrackModel::load_csv(resolve_path(cfg.dir, cfg.sim.track_file)));
    auto line = std::make_shared<trackgeom::RacingLine>(
        trackgeom::RacingLine::load_csv(resolve_path(cfg.dir, cfg.sim.line_file)));

    std::vector<plant::GhostOpponent> ghosts;
    std::vector<stack::OpponentDims> ghost_dims;
    for (const auto &g : cfg.sim.ghosts) {
        plant::GhostOpponent ghost;
        ghost.line = g.line_file.empty()
                         ? line
                         : std::make_shared<trackgeom::RacingLine>(trackgeom::RacingLine::load_csv(
                               resolve_path(cfg.dir, g.line_file)));
        ghost.s0 = g.s0;
        ghost.speed = g.speed;
        ghost.length = g.length;
        ghost.width = g.width;
        ghosts.push_back(std::move(ghost));
        ghost_dims.push_back({g.length, g.width});
    }

    // fault spec: startup faults plus identity entries for every topic any
    // runtime patch touches, so the proxy is wired for them from the start
    faults::FaultSpec fault_spec;
    if (!cfg.sim.fault_file.empty()) {
        fault_spec = faults::FaultSpec::parse_yaml_file(resolve_path(cfg.dir, cfg.sim.fault_file));
    }
    for (const auto &group : script.groups) {
        for (const auto &item : group.items) {
            if (item.kind != CommandItem::Kind::fault_patch) {
                continue;
            }
            for (const auto &[topic, tf] : item.patch.topics) {
                if (!fault_spec.topics.count(topic)) {
                    faults::TopicFault identity;
                    identity.module = tf.module;
                    fault_spec.topics[topic] = identity;
                }
            }
        }
    }

    stack::ParamRegistry registry;
    auto loc = std::make_shared<stack::LocalizationNode>(
        stack::ParamScope(registry, "localization"), cfg.sim.sensors.imu_count);
    auto muxer = std::make_shared<stack::LocMuxerNode>(stack::ParamScope(registry, "loc_muxer"));
    auto planner = std::make_shared<stack::PlannerNode>(track, line, ghost_dims, cfg.sim.vehicle,
                                                        stack::ParamScope(registry, "planner"));
    auto controller = std::make_shared<stack::ControllerNode>(
        cfg.sim.vehicle, stack::ParamScope(registry, "controller"));
    auto safety = std::make_shared<stack::SafetyNode>(stack::ParamScope(registry, "safety"));
    auto mission = std::make_shared<stack::MissionNode>(stack::ParamScope(registry, "mission"));
    auto ghosts_node = std::make_shared<plant::GhostsNode>(std::move(ghosts),
                                                           stack::ParamScope(registry, "ghosts"));
    auto proxy = std::make_shared<faults::FaultProxyNode>(fault_spec, cfg.sim.seed);

    // filter measurement noise defaults follow the sensor configuration
    registry.set("localization/r_gps",
                 std::max(cfg.sim.sensors.gps_sigma * cfg.sim.sensors.gps_sigma, 1e-4));
    registry.set("localization/r_lio_pos",
                 std::max(cfg.sim.sensors.lio_pos_sigma * cfg.sim.sensors.lio_pos_sigma, 1e-6));
    registry.set("localization/r_lio_yaw",
                 std::max(cfg.sim.sensors.lio_yaw_sigma * cfg.sim.sensors.lio_yaw_sigma, 1e-8));
    registry.set("localization/r_wheel",
                 std::max(cfg.sim.sensors.wheel_sigma * cfg.sim.sensors.wheel_sigma, 1e-4));
    if (cfg.sim.ground_truth_mode) {
        registry.set("loc_muxer/ground_truth_mode", 1.0);
    }

    plant::VehicleState init_state =
        plant::init_vehicle(*track, *line, cfg.sim.init, cfg.sim.v0, cfg.sim.vehicle);
    auto plant_node = std::make_shared<plant::PlantNode>(init_state, cfg.sim.vehicle,
                                                         cfg.sim.sensors, cfg.sim.seed);

    // startup parameter overrides; unknown paths fail loudly here
    for (const auto &[name, value] : cfg.param_overrides) {
        if (!registry.has(name)) {
            throw ConfigError("unknown parameter '" + name + "' in scenario configuration");
        }
        registry.set(name, value);
    }

    // resolve script commands against the registry and the fault proxy
    std::vector<ResolvedGroup> groups;
    for (const auto &group : script.groups) {
        ResolvedGroup rg;
        rg.lap = group.lap;
        rg.s = group.s;
        for (const auto &item : group.items) {
            ResolvedCommand cmd;
            if (item.kind == CommandItem::Kind::parameter) {
                cmd.kind = 0;
                cmd.id = registry.id_of(item.target); // throws on unknown path
                cmd.value = item.value;
            } else {
                cmd.kind = 1;
                cmd.id = proxy->register_patch(item.patch);
            }
            rg.commands.push_back(cmd);
        }
        groups.push_back(std::move(rg));
    }

    auto manager = std::make_shared<ScenarioManagerNode>(track, std::move(groups),
                                                         script.end_after_laps,
                                                         script.heartbeat_grace);
    double suppress_window = registry.get("safety/suppress_window");
    auto detector = std::make_shared<StopDetectorNode>(0.1, cfg.sim.max_sim_time, suppress_window);

    simbus::SimBus bus;
    bus.add_node(loc);
    bus.add_node(muxer);
    bus.add_node(planner);
    bus.add_node(controller);
    bus.add_node(safety);
    bus.add_node(mission);
    bus.add_node(ghosts_node);
    std::size_t proxy_index = bus.add_node(proxy);
    bus.add_node(manager);
    bus.add_node(detector);
    std::size_t plant_index = bus.add_node(plant_node);
    // every stack node must be registered before the plant starts stepping
    if (plant_index != bus.node_count() - 1) {
        throw ConfigError("plant must be the last registered node");
    }

    // all schemas exist before the proxy rewires producers
    bus.declare_topic(topics::kGtOdom, topics::gt_odom_schema());
    bus.declare_topic(topics::kGpsFix, topics::gps_schema());
    bus.declare_topic(topics::kWheelSpeed, topics::wheel_schema());
    bus.declare_topic(topics::kLioOdom, topics::lio_schema());
    for (std::size_t i = 0; i < cfg.sim.sensors.imu_count; ++i) {
        bus.declare_topic(topics::imu_topic(i), topics::imu_schema());
    }
    bus.declare_topic(topics::kGtOpponents, topics::opponents_schema(cfg.sim.ghosts.size()));
    bus.declare_topic(topics::kPerceptionOpponents, topics::opponents_schema(cfg.sim.ghosts.size()));
    bus.declare_topic(topics::kLocOdom, topics::loc_odom_schema());
    bus.declare_topic(topics::kLocOdomRaw, topics::loc_odom_schema());
    bus.declare_topic(topics::kPlanTrajectory, topics::plan_schema());
    bus.declare_topic(topics::kCmdActuation, topics::actuation_schema());
    bus.declare_topic(topics::kCtrlDebug, topics::ctrl_debug_schema());
    bus.declare_topic(topics::kCmdStop, topics::cmd_stop_schema());
    bus.declare_topic(topics::kMissionState, topics::mission_state_schema());
    bus.declare_topic(topics::kScenarioCommands, topics::scenario_command_schema());
    bus.declare_topic(topics::kScenarioHeartbeat, topics::heartbeat_schema());
    bus.declare_topic(topics::kScenarioStatus, topics::scenario_status_schema());
    bus.declare_topic(topics::kSimShutdown, topics::shutdown_schema());

    proxy->install(bus, proxy_index);

    // runtime commands take effect at step boundaries
    bus.set_delivery_hook([&registry, &proxy](const simbus::Message &msg) {
        if (msg.topic != topics::kScenarioCommands) {
            return;
        }
        auto id = static_cast<std::size_t>(msg.payload.get_scalar("id"));
        if (msg.payload.get_scalar("kind") == 0.0) {
            registry.set_by_id(id, msg.payload.get_scalar("value"));
        } else {
            proxy->apply_patch(id);
        }
    });

    simbus::SimClock clock;
    clock.speedup = cfg.sim.speedup;
    clock.pacing = cfg.sim.pacing;

    simbus::Tick max_ticks =
        static_cast<simbus::Tick>(cfg.sim.max_sim_time / simbus::kBaseStepSeconds) + 1000;
    RunResult result;
    result.trace = bus.run(
        clock, [](const simbus::BusState &state) { return state.seen(topics::kSimShutdown); },
        max_ticks);
    result.config = cfg;

    // how the run ended
    result.outcome.shutdown_reason = -1;
    for (const auto &entry : result.trace.entries) {
        if (entry.msg.topic == topics::kSimShutdown) {
            result.outcome.shutdown_reason =
                static_cast<int>(entry.msg.payload.get_scalar("reason"));
        }
    }
    result.outcome.timed_out =
        result.outcome.shutdown_reason == StopDetectorNode::kReasonTimeout ||
        result.outcome.shutdown_reason == -1;

    // per-topic worst delivery delay (delay faults show up here)
    std::map<std::string, double> delays;
    for (const auto &entry : result.trace.entries) {
        double d = simbus::tick_to_sec(entry.delivery_tick - entry.msg.stamp_tick);
        auto [it, inserted] = delays.emplace(entry.msg.topic, d);
        if (!inserted) {
            it->second = std::max(it->second, d);
        }
    }

    std::map<std::string, TopicTable> tables = telemetry::extract_tables(result.trace);

    std::string report_dir;
    if (!opts.out_dir.empty()) {
        report_dir = opts.out_dir;
        fs::create_directories(fs::path(report_dir) / "logs");
        fs::create_directories(fs::path(report_dir) / "inputs");
        for (const auto &[topic, table] : tables) {
            telemetry::write_topic_csv(table, (fs::path(report_dir) / "logs").string());
        }
        fs::copy_file(resolve_path(cfg.dir, cfg.sim.track_file),
                      fs::path(report_dir) / "inputs" / "track.csv",
                      fs::copy_options::overwrite_existing);
        fs::copy_file(resolve_path(cfg.dir, cfg.sim.line_file),
                      fs::path(report_dir) / "inputs" / "racing_line.csv",
                      fs::copy_options::overwrite_existing);
        write_run_meta(report_dir, cfg, result.outcome, delays);
    }

    result.report =
        analyze(tables, cfg, *track, result.outcome, delays, effective_mode(cfg, opts), report_dir);
    return result;
}

telemetry::RunReport regenerate_report(const std::string &log_dir, bool full) {
    fs::path base(log_dir);
    fs::path meta_path = base / "run_meta.json";
    if (!fs::exists(meta_path)) {
        throw IoError("run_meta.json not found in " + log_dir);
    }
    std::ifstream in(meta_path);
    json meta;
    try {
        in >> meta;
    } catch (const json::exception &e) {
        throw IoError("corrupt run_meta.json in " + log_dir + ": " + e.what());
    }

    ScenarioConfig cfg;
    cfg.name = meta.at("scenario").get<std::string>();
    cfg.dir = log_dir;
    cfg.sim.seed = meta.at("seed").get<std::uint64_t>();
    const auto &veh = meta.at("vehicle");
    cfg.sim.vehicle.mass = veh.at("mass").get<double>();
    cfg.sim.vehicle.lf = veh.at("lf").get<double>();
    cfg.sim.vehicle.lr = veh.at("lr").get<double>();
    cfg.sim.vehicle.length = veh.at("length").get<double>();
    cfg.sim.vehicle.width = veh.at("width").get<double>();
    cfg.sim.vehicle.blend_speed = veh.at("blend_speed").get<double>();
    const auto &rep = meta.at("report");
    cfg.report.tests = rep.at("tests").get<std::vector<std::string>>();
    cfg.report.freq_bound = rep.at("freq_bound").get<double>();
    cfg.report.min_distance = rep.at("min_distance").get<double>();
    cfg.report.stop_speed = rep.at("stop_speed").get<double>();
    cfg.report.stop_duration = rep.at("stop_duration").get<double>();
    cfg.report.full_reports = rep.at("full_reports").get<bool>();
    for (const auto &[name, t] : meta.at("thresholds").items()) {
        cfg.report.thresholds[name] = {t.at("yellow").get<double>(), t.at("red").get<double>()};
    }
    for (const auto &g : meta.at("ghosts")) {
        GhostConfig gc;
        gc.length = g.at("length").get<double>();
        gc.width = g.at("width").get<double>();
        cfg.sim.ghosts.push_back(gc);
    }
    for (const auto &[name, v] : meta.at("param_overrides").items()) {
        cfg.param_overrides[name] = v.get<double>();
    }
    telemetry::RunOutcome outcome;
    outcome.timed_out = meta.at("outcome").at("timed_out").get<bool>();
    outcome.shutdown_reason = meta.at("outcome").at("shutdown_reason").get<int>();
    std::map<std::string, double> delays;
    for (const auto &[topic, d] : meta.at("max_topic_delay").items()) {
        delays[topic] = d.get<double>();
    }

    trackgeom::TrackModel track =
        trackgeom::TrackModel::load_csv((base / "inputs" / "track.csv").string());
    std::map<std::string, TopicTable> tables = telemetry::read_topic_csvs((base / "logs").string());

    telemetry::ReportMode mode =
        (full || cfg.report.full_reports) ? telemetry::ReportMode::full
                                          : telemetry::ReportMode::overview_only;
    return analyze(tables, cfg, track, outcome, delays, mode, log_dir);
}

} // namespace racesim::scenario
