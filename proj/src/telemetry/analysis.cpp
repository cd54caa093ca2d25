#include "racesim/telemetry/analysis.hpp"

#include "racesim/topics.hpp"
#include "racesim/util/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace racesim::telemetry {

using trackgeom::Vec2;

bool obb_overlap(const Obb &a, const Obb &b) {
    auto corners = [](const Obb &o) {
        std::array<Vec2, 4> c;
        double ca = std::cos(o.yaw);
        double sa = std::sin(o.yaw);
        double hl = o.length / 2.0;
        double hw = o.width / 2.0;
        const double lx[4] = {hl, hl, -hl, -hl};
        const double ly[4] = {hw, -hw, -hw, hw};
        for (int i = 0; i < 4; ++i) {
            c[i] = {o.cx + lx[i] * ca - ly[i] * sa, o.cy + lx[i] * sa + ly[i] * ca};
        }
        return c;
    };
    auto ca = corners(a);
    auto cb = corners(b);

    // SAT over the four face normals of the two rectangles
    const Obb *boxes[2] = {&a, &b};
    for (const Obb *box : boxes) {
        double axes[2] = {box->yaw, box->yaw + M_PI / 2.0};
        for (double axis : axes) {
            double ux = std::cos(axis);
            double uy = std::sin(axis);
            double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
            for (int i = 0; i < 4; ++i) {
                double pa = ca[i].x * ux + ca[i].y * uy;
                double pb = cb[i].x * ux + cb[i].y * uy;
                amin = std::min(amin, pa);
                amax = std::max(amax, pa);
                bmin = std::min(bmin, pb);
                bmax = std::max(bmax, pb);
            }
            if (amax < bmin || bmax < amin) {
                return false; // separating axis found
            }
        }
    }
    return true;
}

FrenetTrack build_frenet_track(const MasterTable &master, const trackgeom::TrackModel &track) {
    FrenetTrack out;
    const std::size_t n = master.rows();
    if (n == 0) {
        return out;
    }
    const auto &px = master.col(topics::kGtOdom, "pose.position.0");
    const auto &py = master.col(topics::kGtOdom, "pose.position.1");

    out.s.resize(n);
    out.d.resize(n);
    out.odometer.resize(n);
    out.lap.resize(n);
    out.lap_starts.push_back(0);

    const double L = track.total_length();
    int lap = 1;
    double threshold = 0.0;
    double odometer = 0.0;
    double prev_s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        trackgeom::Projection proj = track.line().project({px[i], py[i]});
        out.s[i] = proj.s;
        out.d[i] = proj.d;
        if (i == 0) {
            odometer = proj.s;
            threshold = L;
        } else {
            odometer += track.line().signed_s_delta(proj.s, prev_s);
        }
        prev_s = proj.s;
        // hysteresis latch: once a lap is counted the threshold moves a full
        // lap ahead, so seam jitter cannot count it twice
        while (odometer >= threshold) {
            lap += 1;
            threshold += L;
            out.lap_starts.push_back(i);
        }
        out.odometer[i] = odometer;
        out.lap[i] = lap;
    }
    out.laps_completed = lap - 1;
    return out;
}

std::vector<LapMetrics> compute_lap_metrics(const MasterTable &master, const FrenetTrack &frenet,
                                            const plant::VehicleParams &vehicle) {
    std::vector<LapMetrics> out;
    const std::size_t n = master.rows();
    if (n == 0) {
        return out;
    }
    const auto &speed = master.col(topics::kGtOdom, "speed");
    const auto &vx = master.col(topics::kGtOdom, "twist.linear.0");
    const auto &vy = master.col(topics::kGtOdom, "twist.linear.1");
    const auto &yaw_rate = master.col(topics::kGtOdom, "twist.yaw_rate");
    const auto &steer = master.col(topics::kGtOdom, "steer");
    bool have_ctrl = master.has(topics::kCtrlDebug, "lateral_error");

    for (std::size_t li = 0; li < frenet.lap_starts.size(); ++li) {
        std::size_t begin = frenet.lap_starts[li];
        bool complete = li + 1 < frenet.lap_starts.size();
        std::size_t end = complete ? frenet.lap_starts[li + 1] : n;
        if (end <= begin + 1 && !complete) {
            break; // empty residue after the last boundary
        }
        LapMetrics m;
        m.lap = static_cast<int>(li) + 1;
        m.complete = complete;
        m.lap_time = master.t[std::min(end, n - 1)] - master.t[begin];

        double sum_speed = 0.0, sum_yaw = 0.0, sum_under = 0.0, sum_slip = 0.0, sum_vy = 0.0;
        std::size_t under_count = 0;
        std::size_t count = 0;
        double sum_lat = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            m.max_speed = std::max(m.max_speed, speed[i]);
            sum_speed += speed[i];
            m.max_yaw_rate = std::max(m.max_yaw_rate, std::abs(yaw_rate[i]));
            sum_yaw += std::abs(yaw_rate[i]);
            double slip_deg = std::abs(std::atan2(vy[i], std::max(vx[i], 0.1))) * 180.0 / M_PI;
            m.max_sideslip_deg = std::max(m.max_sideslip_deg, slip_deg);
            sum_slip += slip_deg;
            m.max_lateral_velocity = std::max(m.max_lateral_velocity, std::abs(vy[i]));
            sum_vy += std::abs(vy[i]);
            if (vx[i] > vehicle.blend_speed) {
                // Ackermann difference, evaluated only where the linear tire
                // model is active
                double kin = std::atan(vehicle.wheelbase() * yaw_rate[i] / vx[i]);
                double under_deg = std::abs(steer[i] - kin) * 180.0 / M_PI;
                m.max_understeer_deg = std::max(m.max_understeer_deg, under_deg);
                sum_under += under_deg;
                ++under_count;
            }
            if (have_ctrl) {
                double lat = std::abs(master.col(topics::kCtrlDebug, "lateral_error")[i]);
                double head = std::abs(master.col(topics::kCtrlDebug, "heading_error")[i]);
                m.max_lateral_error = std::max(m.max_lateral_error, lat);
                m.max_heading_error = std::max(m.max_heading_error, head);
                sum_lat += lat;
            }
            ++count;
        }
        if (count > 0) {
            m.avg_speed = sum_speed / static_cast<double>(count);
            m.avg_yaw_rate = sum_yaw / static_cast<double>(count);
            m.avg_sideslip_deg = sum_slip / static_cast<double>(count);
            m.avg_lateral_velocity = sum_vy / static_cast<double>(count);
            m.mean_lateral_error = sum_lat / static_cast<double>(count);
        }
        if (under_count > 0) {
            m.avg_understeer_deg = sum_under / static_cast<double>(under_count);
        }
        out.push_back(m);
    }
    return out;
}

GhostAnalysis analyze_ghosts(const MasterTable &master, const FrenetTrack &frenet,
                             const trackgeom::TrackModel &track,
                             const std::vector<scenario::GhostConfig> &ghosts,
                             const plant::VehicleParams &vehicle) {
    GhostAnalysis out;
    const std::size_t n = master.rows();
    if (n == 0 || ghosts.empty()) {
        return out;
    }
    const auto &ex = master.col(topics::kGtOdom, "pose.position.0");
    const auto &ey = master.col(topics::kGtOdom, "pose.position.1");
    const auto &eyaw = master.col(topics::kGtOdom, "pose.yaw");
    const auto &espeed = master.col(topics::kGtOdom, "speed");

    for (std::size_t gi = 0; gi < ghosts.size(); ++gi) {
        std::string g = "g" + std::to_string(gi);
        if (!master.has(topics::kGtOpponents, g + ".position.0")) {
            continue;
        }
        const auto &gx = master.col(topics::kGtOpponents, g + ".position.0");
        const auto &gy = master.col(topics::kGtOpponents, g + ".position.1");
        const auto &gyaw = master.col(topics::kGtOpponents, g + ".yaw");
        const auto &gspeed = master.col(topics::kGtOpponents, g + ".speed");

        // collision scan: record once per contiguous overlap region
        bool in_contact = false;
        for (std::size_t i = 0; i < n; ++i) {
            Obb ego{ex[i], ey[i], eyaw[i], vehicle.length, vehicle.width};
            Obb ghost{gx[i], gy[i], gyaw[i], ghosts[gi].length, ghosts[gi].width};
            bool hit = obb_overlap(ego, ghost);
            if (hit && !in_contact) {
                CollisionRecord rec;
                rec.ghost = static_cast<int>(gi);
                rec.row = i;
                rec.time = master.t[i];
                rec.lap = frenet.lap[i];
                rec.s = frenet.s[i];
                rec.d = frenet.d[i];
                out.collisions.push_back(rec);
            }
            in_contact = hit;
        }

        // overtake windows on the wrapped longitudinal gap (ego - ghost)
        bool window_open = false;
        std::size_t start_row = 0;
        double prev_gap = 0.0;
        double dv_sum = 0.0;
        std::size_t dv_count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double ghost_s = track.line().project({gx[i], gy[i]}).s;
            double gap = track.line().signed_s_delta(frenet.s[i], ghost_s);
            if (!window_open) {
                if (i > 0 && prev_gap < -30.0 && gap >= -30.0 && gap < 0.0) {
                    window_open = true;
                    start_row = i;
                    dv_sum = 0.0;
                    dv_count = 0;
                }
            }
            if (window_open) {
                dv_sum += espeed[i] - gspeed[i];
                ++dv_count;
                if (gap >= 20.0) {
                    OvertakeRecord rec;
                    rec.ghost = static_cast<int>(gi);
                    rec.start_lap = frenet.lap[start_row];
                    rec.start_s = frenet.s[start_row];
                    rec.end_lap = frenet.lap[i];
                    rec.end_s = frenet.s[i];
                    rec.time_to_overtake = master.t[i] - master.t[start_row];
                    rec.avg_delta_speed =
                        dv_count ? dv_sum / static_cast<double>(dv_count) : 0.0;
                    for (const auto &c : out.collisions) {
                        if (c.ghost == static_cast<int>(gi) && c.row >= start_row && c.row <= i) {
                            rec.collision = true;
                        }
                    }
                    out.overtakes.push_back(rec);
                    window_open = false;
                }
            }
            prev_gap = gap;
        }
        // window opened but the pass never completed with a collision inside:
        // still an overtake attempt that ended in contact
        if (window_open) {
            for (const auto &c : out.collisions) {
                if (c.ghost == static_cast<int>(gi) && c.row >= start_row) {
                    OvertakeRecord rec;
                    rec.ghost = static_cast<int>(gi);
                    rec.collision = true;
                    rec.start_lap = frenet.lap[start_row];
                    rec.start_s = frenet.s[start_row];
                    rec.end_lap = c.lap;
                    rec.end_s = c.s;
                    rec.time_to_overtake = c.time - master.t[start_row];
                    rec.avg_delta_speed = dv_count ? dv_sum / static_cast<double>(dv_count) : 0.0;
                    out.overtakes.push_back(rec);
                    break;
                }
            }
        }
    }
    return out;
}

SafetyStopInfo safety_stop_info(const MasterTable &master, const FrenetTrack &frenet,
                                const trackgeom::TrackModel &track) {
    SafetyStopInfo info;
    const std::size_t n = master.rows();
    if (n == 0 || !master.has(topics::kCmdStop, "active")) {
        return info;
    }
    const auto &active = master.col(topics::kCmdStop, "active");
    const auto &reason = master.col(topics::kCmdStop, "reason");
    const auto &speed = master.col(topics::kGtOdom, "speed");
    for (std::size_t i = 0; i < n; ++i) {
        if (active[i] != 0.0) {
            info.commanded = true;
            info.reason = static_cast<int>(reason[i]);
            break;
        }
    }
    if (info.commanded) {
        std::size_t last = n - 1;
        double margin = std::min(track.width_left_at(frenet.s[last]) - frenet.d[last],
                                 track.width_right_at(frenet.s[last]) + frenet.d[last]);
        info.completed_on_track = speed[last] < 0.5 && margin > 0.0;
    }
    return info;
}

namespace {

std::string fmt2(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

} // namespace

std::vector<TestError> run_tests(const TestContext &ctx) {
    std::vector<TestError> errors;
    const auto &master = ctx.master;
    const auto &frenet = ctx.frenet;
    const auto &cfg = ctx.config.report;
    const std::size_t n = master.rows();
    if (n == 0) {
        errors.push_back({"car_started", "no telemetry was recorded", 1, 0.0, 0.0});
        return errors;
    }

    auto locate = [&](std::size_t row) {
        return std::tuple<int, double, double>{frenet.lap[row], frenet.s[row], frenet.d[row]};
    };
    auto push_error = [&](const std::string &test, const std::string &desc, std::size_t row) {
        auto [lap, s, d] = locate(row);
        errors.push_back({test, desc, lap, s, d});
    };

    if (ctx.outcome.timed_out) {
        push_error("timeout", "run hit the hard wall on simulation time", n - 1);
    }

    double suppress = 3.0;
    if (auto it = ctx.config.param_overrides.find("safety/suppress_window");
        it != ctx.config.param_overrides.end()) {
        suppress = it->second;
    }

    // 1. tracking errors against the red thresholds
    if (cfg.test_enabled("tracking_errors") && master.has(topics::kCtrlDebug, "lateral_error")) {
        const auto &lat = master.col(topics::kCtrlDebug, "lateral_error");
        const auto &head = master.col(topics::kCtrlDebug, "heading_error");
        double lat_red = cfg.thresholds.at("lateral_error").red;
        double head_red = cfg.thresholds.at("heading_error").red;
        std::size_t worst_lat = n, worst_head = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (master.t[i] < suppress) {
                continue;
            }
            if (std::abs(lat[i]) > lat_red &&
                (worst_lat == n || std::abs(lat[i]) > std::abs(lat[worst_lat]))) {
                worst_lat = i;
            }
            if (std::abs(head[i]) > head_red &&
                (worst_head == n || std::abs(head[i]) > std::abs(head[worst_head]))) {
                worst_head = i;
            }
        }
        if (worst_lat < n) {
            push_error("tracking_errors",
                       "lateral tracking error reached " + fmt2(std::abs(lat[worst_lat])) +
                           " m (red threshold " + fmt2(lat_red) + " m)",
                       worst_lat);
        }
        if (worst_head < n) {
            push_error("tracking_errors",
                       "heading tracking error reached " + fmt2(std::abs(head[worst_head])) +
                           " rad (red threshold " + fmt2(head_red) + " rad)",
                       worst_head);
        }
    }

    // 2. car started: total covered distance
    if (cfg.test_enabled("car_started")) {
        double covered = frenet.odometer.back() - frenet.odometer.front();
        if (covered < cfg.min_distance) {
            push_error("car_started",
                       "vehicle covered only " + fmt2(covered) + " m (minimum " +
                           fmt2(cfg.min_distance) + " m)",
                       0);
        }
    }

    // 3. unexpected standstill
    if (cfg.test_enabled("car_stopped")) {
        const auto &speed = master.col(topics::kGtOdom, "speed");
        bool stop_cmd_seen = false;
        const bool have_stop = master.has(topics::kCmdStop, "active");
        std::size_t still_since = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (have_stop && master.col(topics::kCmdStop, "active")[i] != 0.0) {
                stop_cmd_seen = true;
            }
            bool still = speed[i] < cfg.stop_speed;
            if (still && still_since == n) {
                still_since = i;
            } else if (!still) {
                still_since = n;
            }
            if (still_since < n && master.t[i] - master.t[still_since] > cfg.stop_duration &&
                master.t[still_since] > suppress && !stop_cmd_seen) {
                push_error("car_stopped", "vehicle stopped unexpectedly (no stop command active)",
                           still_since);
                break;
            }
        }
    }

    // 4. stack errors; a commanded safety stop that completed on track passes
    if (cfg.test_enabled("stack_errors") && ctx.tables && ctx.tables->count(topics::kErrors)) {
        SafetyStopInfo stop = safety_stop_info(master, frenet, ctx.track);
        const TopicTable &errs = ctx.tables->at(topics::kErrors);
        std::size_t ci_sev = errs.col("severity");
        std::size_t ci_code = errs.col("code");
        for (const auto &row : errs.rows) {
            double stamp = row[0];
            if (row[ci_sev] != static_cast<double>(static_cast<int>(Severity::fatal)) ||
                stamp < suppress) {
                continue;
            }
            if (!(stop.commanded && stop.completed_on_track)) {
                auto ec = static_cast<ErrorCode>(static_cast<int>(row[ci_code]));
                auto it = std::lower_bound(master.t.begin(), master.t.end(), stamp);
                std::size_t at = std::min(
                    static_cast<std::size_t>(it - master.t.begin()), n - 1);
                push_error("stack_errors",
                           "fatal stack error: " + error_code_description(ec) +
                               " (vehicle did not stop safely on track)",
                           at);
            }
            break;
        }
    }

    // 5. track boundaries
    if (cfg.test_enabled("track_boundaries")) {
        bool outside = false;
        for (std::size_t i = 0; i < n; ++i) {
            double margin = std::min(ctx.track.width_left_at(frenet.s[i]) - frenet.d[i],
                                     ctx.track.width_right_at(frenet.s[i]) + frenet.d[i]);
            if (margin < 0.0 && !outside) {
                push_error("track_boundaries",
                           "vehicle left the track (" + fmt2(-margin) + " m beyond the edge)", i);
            }
            outside = margin < 0.0;
        }
    }

    // 6. dynamics metrics against red thresholds, per lap
    if (cfg.test_enabled("dynamics_metrics")) {
        for (const auto &lap : ctx.laps) {
            struct MetricCheck {
                const char *name;
                double value;
            };
            const MetricCheck checks[] = {
                {"yaw_rate", lap.max_yaw_rate},
                {"understeer", lap.max_understeer_deg},
                {"sideslip", lap.max_sideslip_deg},
                {"lateral_velocity", lap.max_lateral_velocity},
            };
            for (const auto &c : checks) {
                double red = cfg.thresholds.at(c.name).red;
                if (c.value > red) {
                    std::size_t row = frenet.lap_starts[static_cast<std::size_t>(lap.lap - 1)];
                    push_error("dynamics_metrics",
                               std::string(c.name) + " reached " + fmt2(c.value) +
                                   " on lap " + std::to_string(lap.lap) + " (red threshold " +
                                   fmt2(red) + ")",
                               row);
                }
            }
        }
    }

    // 7. ghost collisions
    if (cfg.test_enabled("ghost_collisions")) {
        for (const auto &c : ctx.ghosts.collisions) {
            errors.push_back({"ghost_collisions",
                              "collision with ghost " + std::to_string(c.ghost) + " at t=" +
                                  fmt2(c.time) + " s",
                              c.lap, c.s, c.d});
        }
    }

    return errors;
}

} // namespace racesim::telemetry
