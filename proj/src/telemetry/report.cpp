#include "racesim/telemetry/report.hpp"

#include "racesim/topics.hpp"
#include "racesim/util/error.hpp"
#include "racesim/util/svg.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace racesim::telemetry {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

RunReport assemble_report(const TestContext &ctx, const std::vector<TestError> &errors) {
    RunReport rep;
    rep.scenario = ctx.config.name;
    rep.seed = ctx.config.sim.seed;
    rep.laps_completed = ctx.frenet.laps_completed;
    rep.total_distance =
        ctx.frenet.odometer.empty() ? 0.0 : ctx.frenet.odometer.back() - ctx.frenet.odometer.front();
    rep.timed_out = ctx.outcome.timed_out;
    rep.safety_stop = safety_stop_info(ctx.master, ctx.frenet, ctx.track);
    rep.errors = errors;
    rep.laps = ctx.laps;
    rep.thresholds = ctx.config.report.thresholds;
    rep.ghosts = ctx.ghosts;
    rep.has_ghosts = !ctx.config.sim.ghosts.empty();
    for (const auto &lap : ctx.laps) {
        if (lap.complete && (rep.best_lap_time == 0.0 || lap.lap_time < rep.best_lap_time)) {
            rep.best_lap_time = lap.lap_time;
        }
    }
    return rep;
}

namespace {

const char *flag_for(double value, const scenario::Threshold &t) {
    if (value > t.red) {
        return "red";
    }
    if (value > t.yellow) {
        return "yellow";
    }
    return "ok";
}

std::string marker_for(const char *flag) {
    if (std::string(flag) == "red") {
        return " ✖";
    }
    if (std::string(flag) == "yellow") {
        return " ⚠";
    }
    return "";
}

std::string fixed(double v, int digits = 3) {
    std::ostringstream os;
    os << std::fixed;
    os.precision(digits);
    os << v;
    return os.str();
}

struct MetricView {
    const char *key;
    const char *label;
    double (*max_of)(const LapMetrics &);
    double (*avg_of)(const LapMetrics &);
};

const MetricView kDynamicsMetrics[] = {
    {"yaw_rate", "Yaw rate [rad/s]", [](const LapMetrics &m) { return m.max_yaw_rate; },
     [](const LapMetrics &m) { return m.avg_yaw_rate; }},
    {"understeer", "Understeer [deg]", [](const LapMetrics &m) { return m.max_understeer_deg; },
     [](const LapMetrics &m) { return m.avg_understeer_deg; }},
    {"sideslip", "Sideslip [deg]", [](const LapMetrics &m) { return m.max_sideslip_deg; },
     [](const LapMetrics &m) { return m.avg_sideslip_deg; }},
    {"lateral_velocity", "Lateral velocity [m/s]",
     [](const LapMetrics &m) { return m.max_lateral_velocity; },
     [](const LapMetrics &m) { return m.avg_lateral_velocity; }},
};

} // namespace

std::string report_to_json(const RunReport &report) {
    json root;
    root["general"] = {
        {"scenario", report.scenario},
        {"seed", report.seed},
        {"passed", report.passed()},
        {"laps_completed", report.laps_completed},
        {"best_lap_time", report.best_lap_time},
        {"total_distance", report.total_distance},
        {"timed_out", report.timed_out},
        {"safety_stop",
         {{"commanded", report.safety_stop.commanded},
          {"completed_on_track", report.safety_stop.completed_on_track},
          {"reason", report.safety_stop.reason}}},
    };

    root["errors"] = json::array();
    for (const auto &e : report.errors) {
        root["errors"].push_back(
            {{"test", e.test}, {"description", e.description}, {"lap", e.lap}, {"s", e.s}, {"d", e.d}});
    }

    root["laps"] = json::array();
    for (const auto &m : report.laps) {
        root["laps"].push_back({{"lap", m.lap},
                                {"complete", m.complete},
                                {"lap_time", m.lap_time},
                                {"max_speed", m.max_speed},
                                {"avg_speed", m.avg_speed},
                                {"mean_lateral_error", m.mean_lateral_error},
                                {"max_lateral_error", m.max_lateral_error},
                                {"max_heading_error", m.max_heading_error}});
    }

    root["dynamics"] = json::object();
    for (const auto &metric : kDynamicsMetrics) {
        auto it = report.thresholds.find(metric.key);
        if (it == report.thresholds.end()) {
            continue;
        }
        json laps = json::array();
        for (const auto &m : report.laps) {
            laps.push_back({{"lap", m.lap},
                            {"max", metric.max_of(m)},
                            {"avg", metric.avg_of(m)},
                            {"flag", flag_for(metric.max_of(m), it->second)}});
        }
        root["dynamics"][metric.key] = {
            {"yellow", it->second.yellow}, {"red", it->second.red}, {"laps", laps}};
    }

    if (report.has_ghosts) {
        json collisions = json::array();
        for (std::size_t i = 0; i < report.ghosts.collisions.size(); ++i) {
            const auto &c = report.ghosts.collisions[i];
            collisions.push_back({{"ghost", c.ghost},
                                  {"time", c.time},
                                  {"lap", c.lap},
                                  {"s", c.s},
                                  {"d", c.d},
                                  {"svg", "collision_" + std::to_string(i) + ".svg"}});
        }
        json overtakes = json::array();
        for (const auto &o : report.ghosts.overtakes) {
            overtakes.push_back({{"ghost", o.ghost},
                                 {"outcome", o.collision ? "collision" : "success"},
                                 {"start", {{"lap", o.start_lap}, {"s", o.start_s}}},
                                 {"end", {{"lap", o.end_lap}, {"s", o.end_s}}},
                                 {"time_to_overtake", o.time_to_overtake},
                                 {"avg_delta_speed", o.avg_delta_speed}});
        }
        root["ghosts"] = {{"collisions", collisions}, {"overtakes", overtakes}};
    }

    return root.dump(2) + "\n";
}

namespace {

void write_collision_svg(const std::string &path, const CollisionRecord &c,
                         const ReportInputs &in) {
    const auto &master = in.master;
    std::string g = "g" + std::to_string(c.ghost);
    double ex = master.col(topics::kGtOdom, "pose.position.0")[c.row];
    double ey = master.col(topics::kGtOdom, "pose.position.1")[c.row];
    double eyaw = master.col(topics::kGtOdom, "pose.yaw")[c.row];
    double gx = master.col(topics::kGtOpponents, g + ".position.0")[c.row];
    double gy = master.col(topics::kGtOpponents, g + ".position.1")[c.row];
    double gyaw = master.col(topics::kGtOpponents, g + ".yaw")[c.row];

    double span = 60.0;
    SvgCanvas canvas(600, 600);
    canvas.set_world(ex - span / 2, ey - span / 2, ex + span / 2, ey + span / 2);

    // local stretch of both track edges
    const auto &line = in.track.line();
    std::vector<double> lx, ly, rx, ry;
    for (double ds = -span; ds <= span; ds += 2.0) {
        double s = line.normalize_s(c.s + ds);
        trackgeom::Vec2 left = line.offset_point(s, in.track.width_left_at(s));
        trackgeom::Vec2 right = line.offset_point(s, -in.track.width_right_at(s));
        lx.push_back(left.x);
        ly.push_back(left.y);
        rx.push_back(right.x);
        ry.push_back(right.y);
    }
    canvas.polyline(lx, ly, "#555", 2.0);
    canvas.polyline(rx, ry, "#555", 2.0);

    canvas.rect(ex, ey, eyaw, in.config.sim.vehicle.length, in.config.sim.vehicle.width, "green");
    const auto &ghost_cfg = in.config.sim.ghosts[static_cast<std::size_t>(c.ghost)];
    canvas.rect(gx, gy, gyaw, ghost_cfg.length, ghost_cfg.width, "red");
    canvas.text(10, 20, "collision with ghost " + std::to_string(c.ghost) + " at t=" +
                            fixed(c.time, 2) + " s (lap " + std::to_string(c.lap) + ", s=" +
                            fixed(c.s, 1) + " m)");
    canvas.write(path);
}

void write_markdown(const RunReport &report, const std::string &out_dir) {
    std::ofstream md(fs::path(out_dir) / "report.md");
    if (!md) {
        throw IoError("cannot write report.md in " + out_dir);
    }
    md << "# Run report: " << report.scenario << "\n\n";
    md << "- result: " << (report.passed() ? "**PASS**" : "**FAIL**") << "\n";
    md << "- laps completed: " << report.laps_completed << "\n";
    if (report.best_lap_time > 0.0) {
        md << "- best lap time: " << fixed(report.best_lap_time) << " s\n";
    }
    md << "- total distance: " << fixed(report.total_distance, 1) << " m\n";
    md << "- seed: " << report.seed << "\n";
    if (report.safety_stop.commanded) {
        md << "- safety stop: commanded ("
           << error_code_description(static_cast<ErrorCode>(report.safety_stop.reason)) << "), "
           << (report.safety_stop.completed_on_track ? "completed on track"
                                                     : "did not complete on track")
           << "\n";
    }
    if (report.timed_out) {
        md << "- **run timed out**\n";
    }
    md << "\n## Errors\n\n";
    if (report.errors.empty()) {
        md << "none\n";
    } else {
        md << "| test | description | lap | s [m] | d [m] |\n";
        md << "|---|---|---|---|---|\n";
        for (const auto &e : report.errors) {
            md << "| " << e.test << " | " << e.description << " | " << e.lap << " | "
               << fixed(e.s, 1) << " | " << fixed(e.d, 2) << " |\n";
        }
    }

    md << "\n## Laps\n\n";
    md << "| lap | time [s] | max speed [m/s] | avg speed [m/s] | mean lat err [m] | max lat err [m] |\n";
    md << "|---|---|---|---|---|---|\n";
    for (const auto &m : report.laps) {
        md << "| " << m.lap << (m.complete ? "" : " (partial)") << " | " << fixed(m.lap_time, 2)
           << " | " << fixed(m.max_speed, 1) << " | " << fixed(m.avg_speed, 1) << " | "
           << fixed(m.mean_lateral_error) << " | " << fixed(m.max_lateral_error) << " |\n";
    }

    md << "\n## Vehicle dynamics\n\n";
    for (const auto &metric : kDynamicsMetrics) {
        auto it = report.thresholds.find(metric.key);
        if (it == report.thresholds.end()) {
            continue;
        }
        md << "\n### " << metric.label << " (yellow " << it->second.yellow << ", red "
           << it->second.red << ")\n\n";
        md << "| lap | max | avg |\n|---|---|---|\n";
        for (const auto &m : report.laps) {
            const char *flag = flag_for(metric.max_of(m), it->second);
            md << "| " << m.lap << " | " << fixed(metric.max_of(m)) << marker_for(flag) << " | "
               << fixed(metric.avg_of(m)) << " |\n";
        }
    }

    if (report.has_ghosts) {
        md << "\n## Ghost opponents\n\n";
        if (report.ghosts.collisions.empty()) {
            md << "no collisions\n";
        } else {
            md << "| ghost | time [s] | lap | s [m] | schematic |\n|---|---|---|---|---|\n";
            for (std::size_t i = 0; i < report.ghosts.collisions.size(); ++i) {
                const auto &c = report.ghosts.collisions[i];
                md << "| " << c.ghost << " | " << fixed(c.time, 2) << " | " << c.lap << " | "
                   << fixed(c.s, 1) << " | ![collision](collision_" << i << ".svg) |\n";
            }
        }
        md << "\n### Overtakes\n\n";
        if (report.ghosts.overtakes.empty()) {
            md << "none\n";
        } else {
            md << "| ghost | outcome | start (lap, s) | end (lap, s) | time [s] | avg dv [m/s] |\n";
            md << "|---|---|---|---|---|---|\n";
            for (const auto &o : report.ghosts.overtakes) {
                md << "| " << o.ghost << " | " << (o.collision ? "collision" : "success") << " | ("
                   << o.start_lap << ", " << fixed(o.start_s, 1) << ") | (" << o.end_lap << ", "
                   << fixed(o.end_s, 1) << ") | " << fixed(o.time_to_overtake, 2) << " | "
                   << fixed(o.avg_delta_speed, 2) << " |\n";
            }
        }
    }
}

void write_localization_report(const RunReport &report, const ReportInputs &in,
                               const std::string &dir) {
    const auto &master = in.master;
    std::ofstream md(fs::path(dir) / "localization.md");
    md << "# Localization report: " << report.scenario << "\n\n";

    if (master.has(topics::kLocOdom, "pose.position.0")) {
        const auto &lx = master.col(topics::kLocOdom, "pose.position.0");
        const auto &ly = master.col(topics::kLocOdom, "pose.position.1");
        const auto &gx = master.col(topics::kGtOdom, "pose.position.0");
        const auto &gy = master.col(topics::kGtOdom, "pose.position.1");
        double rms = 0.0;
        double max_err = 0.0;
        for (std::size_t i = 0; i < master.rows(); ++i) {
            double e = std::hypot(lx[i] - gx[i], ly[i] - gy[i]);
            rms += e * e;
            max_err = std::max(max_err, e);
        }
        rms = std::sqrt(rms / static_cast<double>(std::max<std::size_t>(master.rows(), 1)));
        md << "- position error vs ground truth: rms " << fixed(rms) << " m, max "
           << fixed(max_err) << " m\n";

        std::vector<double> err_series(master.rows());
        for (std::size_t i = 0; i < master.rows(); ++i) {
            err_series[i] = std::hypot(lx[i] - gx[i], ly[i] - gy[i]);
        }
        write_line_chart((fs::path(dir) / "loc_position_error.svg").string(),
                         "Localization position error", "t [s]", "error [m]",
                         {{"|error|", "#c0392b", master.t, err_series}});
        md << "\n![position error](loc_position_error.svg)\n";
    }

    if (master.has(topics::kLocOdom, "position_covariance")) {
        write_line_chart((fs::path(dir) / "loc_covariance.svg").string(),
                         "Estimated position covariance", "t [s]", "cov [m^2]",
                         {{"position_covariance", "#8e44ad", master.t,
                           master.col(topics::kLocOdom, "position_covariance")}});
        md << "\n![covariance](loc_covariance.svg)\n";
    }

    if (master.has(topics::kGpsFix, "satellites")) {
        md << "\n- GPS satellites: " << master.col(topics::kGpsFix, "satellites").front()
           << ", reported covariance " << master.col(topics::kGpsFix, "covariance").front()
           << " m^2\n";
    }

    md << "\n## Sensor message delays (sim time)\n\n| topic | max delay [ms] |\n|---|---|\n";
    for (const auto &[topic, delay] : in.max_topic_delay) {
        md << "| " << topic << " | " << fixed(delay * 1000.0, 1) << " |\n";
    }
}

void write_control_report(const RunReport &report, const ReportInputs &in,
                          const std::string &dir) {
    const auto &master = in.master;
    std::ofstream md(fs::path(dir) / "control.md");
    md << "# Control report: " << report.scenario << "\n\n";

    if (master.has(topics::kCmdActuation, "steer")) {
        write_line_chart((fs::path(dir) / "steer_tracking.svg").string(),
                         "Steering: commanded vs actual", "t [s]", "steer [rad]",
                         {{"commanded", "#2980b9", master.t, master.col(topics::kCmdActuation, "steer")},
                          {"actual", "#27ae60", master.t, master.col(topics::kGtOdom, "steer")}});
        write_line_chart((fs::path(dir) / "force_tracking.svg").string(),
                         "Drive force: commanded vs actual", "t [s]", "force [N]",
                         {{"commanded", "#2980b9", master.t, master.col(topics::kCmdActuation, "force")},
                          {"actual", "#27ae60", master.t, master.col(topics::kGtOdom, "drive_force")}});
        md << "![steer](steer_tracking.svg)\n\n![force](force_tracking.svg)\n";
    }
    if (master.has(topics::kCtrlDebug, "lateral_error")) {
        write_line_chart((fs::path(dir) / "tracking_errors.svg").string(), "Tracking errors",
                         "t [s]", "error",
                         {{"lateral [m]", "#c0392b", master.t,
                           master.col(topics::kCtrlDebug, "lateral_error")},
                          {"speed [m/s]", "#f39c12", master.t,
                           master.col(topics::kCtrlDebug, "speed_error")}});
        md << "\n![errors](tracking_errors.svg)\n";
    }
}

void write_perception_report(const RunReport &report, const ReportInputs &in,
                             const std::string &dir) {
    const auto &master = in.master;
    std::ofstream md(fs::path(dir) / "perception.md");
    md << "# Perception report: " << report.scenario << "\n\n";
    if (!report.has_ghosts) {
        md << "no opponents in this scenario\n";
        return;
    }
    for (std::size_t gi = 0; gi < in.config.sim.ghosts.size(); ++gi) {
        std::string g = "g" + std::to_string(gi);
        if (!master.has(topics::kPerceptionOpponents, g + ".position.0")) {
            continue;
        }
        const auto &px = master.col(topics::kPerceptionOpponents, g + ".position.0");
        const auto &py = master.col(topics::kPerceptionOpponents, g + ".position.1");
        const auto &tx = master.col(topics::kGtOpponents, g + ".position.0");
        const auto &ty = master.col(topics::kGtOpponents, g + ".position.1");
        double max_err = 0.0;
        for (std::size_t i = 0; i < master.rows(); ++i) {
            max_err = std::max(max_err, std::hypot(px[i] - tx[i], py[i] - ty[i]));
        }
        md << "- ghost " << gi << ": max detection position error " << fixed(max_err)
           << " m vs truth feed\n";
    }
    auto it = in.max_topic_delay.find(topics::kPerceptionOpponents);
    if (it != in.max_topic_delay.end()) {
        md << "- detection feed max delay: " << fixed(it->second * 1000.0, 1) << " ms\n";
    }
}

} // namespace

void emit_reports(const RunReport &report, const ReportInputs &inputs, ReportMode mode,
                  const std::string &out_dir) {
    fs::create_directories(out_dir);

    std::ofstream js(fs::path(out_dir) / "report.json");
    if (!js) {
        throw IoError("cannot write report.json in " + out_dir);
    }
    js << report_to_json(report);
    js.close();

    write_markdown(report, out_dir);

    for (std::size_t i = 0; i < report.ghosts.collisions.size(); ++i) {
        write_collision_svg((fs::path(out_dir) / ("collision_" + std::to_string(i) + ".svg")).string(),
                            report.ghosts.collisions[i], inputs);
    }

    if (mode == ReportMode::full) {
        fs::path modules = fs::path(out_dir) / "modules";
        fs::create_directories(modules);
        write_localization_report(report, inputs, modules.string());
        write_control_report(report, inputs, modules.string());
        write_perception_report(report, inputs, modules.string());
    }
}

} // namespace racesim::telemetry
