#include "racesim/trackgeom/track.hpp"

#include "racesim/util/csv.hpp"
#include "racesim/util/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace racesim::trackgeom {

TrackModel::TrackModel(std::vector<Vec2> centerline, std::vector<double> width_left,
                       std::vector<double> width_right)
    : line_(std::move(centerline), /*closed=*/true), w_left_(std::move(width_left)),
      w_right_(std::move(width_right)) {
    if (w_left_.size() != line_.size() || w_right_.size() != line_.size()) {
        throw ConfigError("track widths must match the number of centerline points");
    }
    for (std::size_t i = 0; i < w_left_.size(); ++i) {
        if (w_left_[i] <= 0.0 || w_right_[i] <= 0.0) {
            throw ConfigError("track widths must be positive (row " + std::to_string(i) + ")");
        }
        max_width_ = std::max(max_width_, w_left_[i] + w_right_[i]);
    }
}

TrackModel TrackModel::load_csv(const std::string &path) {
    CsvDoc doc = read_csv(path);
    if (doc.header != std::vector<std::string>{"x", "y", "w_left", "w_right"}) {
        throw ConfigError("track CSV must have header x,y,w_left,w_right: " + path);
    }
    if (doc.rows.size() < 3) {
        throw ConfigError("track CSV needs at least 3 rows: " + path);
    }
    std::vector<Vec2> pts;
    std::vector<double> wl, wr;
    pts.reserve(doc.rows.size());
    for (const auto &row : doc.rows) {
        pts.push_back({row[0], row[1]});
        wl.push_back(row[2]);
        wr.push_back(row[3]);
    }
    return TrackModel(std::move(pts), std::move(wl), std::move(wr));
}

double TrackModel::width_at(const std::vector<double> &w, double s) const {
    double t = 0.0;
    s = line_.normalize_s(s);
    const auto &cum = line_.cum_s();
    auto it = std::upper_bound(cum.begin(), cum.end(), s);
    std::size_t seg = static_cast<std::size_t>(it - cum.begin()) - 1;
    double seg_end = (seg + 1 < cum.size()) ? cum[seg + 1] : line_.total_length();
    t = (s - cum[seg]) / (seg_end - cum[seg]);
    double w0 = w[seg];
    double w1 = w[(seg + 1) % w.size()];
    return w0 + t * (w1 - w0);
}

double TrackModel::width_left_at(double s) const { return width_at(w_left_, s); }
double TrackModel::width_right_at(double s) const { return width_at(w_right_, s); }

RacingLine::RacingLine(std::vector<Vec2> points, std::vector<double> speeds)
    : line_(std::move(points), /*closed=*/true), speeds_(std::move(speeds)) {
    if (speeds_.size() != line_.size()) {
        throw ConfigError("racing line speeds must match the number of points");
    }
    for (double v : speeds_) {
        if (v < 0.0) {
            throw ConfigError("racing line speeds must be non-negative");
        }
    }
}

RacingLine RacingLine::load_csv(const std::string &path) {
    CsvDoc doc = read_csv(path);
    if (doc.header != std::vector<std::string>{"x", "y", "v"}) {
        throw ConfigError("racing line CSV must have header x,y,v: " + path);
    }
    if (doc.rows.size() < 3) {
        throw ConfigError("racing line CSV needs at least 3 rows: " + path);
    }
    std::vector<Vec2> pts;
    std::vector<double> v;
    for (const auto &row : doc.rows) {
        pts.push_back({row[0], row[1]});
        v.push_back(row[2]);
    }
    return RacingLine(std::move(pts), std::move(v));
}

double RacingLine::speed_at(double s) const {
    const auto &cum = line_.cum_s();
    s = line_.normalize_s(s);
    auto it = std::upper_bound(cum.begin(), cum.end(), s);
    std::size_t seg = static_cast<std::size_t>(it - cum.begin()) - 1;
    double seg_end = (seg + 1 < cum.size()) ? cum[seg + 1] : line_.total_length();
    double t = (s - cum[seg]) / (seg_end - cum[seg]);
    double v0 = speeds_[seg];
    double v1 = speeds_[(seg + 1) % speeds_.size()];
    return v0 + t * (v1 - v0);
}

CartesianPose frenet_to_cartesian(const Polyline &line, const FrenetPose &pose) {
    double s = line.normalize_s(pose.s);
    Vec2 p = line.offset_point(s, pose.d);
    return {p.x, p.y, wrap_angle(line.heading_at(s) + pose.mu)};
}

FrenetPose cartesian_to_frenet(const Polyline &line, const CartesianPose &pose,
                               double capture_distance) {
    Projection proj = line.project({pose.x, pose.y});
    if (proj.distance > capture_distance) {
        throw ProjectionError("point (" + std::to_string(pose.x) + ", " + std::to_string(pose.y) +
                              ") is " + std::to_string(proj.distance) +
                              " m from the reference line (capture distance " +
                              std::to_string(capture_distance) + " m)");
    }
    return {proj.s, proj.d, wrap_angle(pose.yaw - line.heading_at(proj.s))};
}

FrenetPose reproject_init(const TrackModel &center, const RacingLine &traj,
                          const FrenetPose &pose_on_traj) {
    CartesianPose cart = frenet_to_cartesian(traj.line(), pose_on_traj);
    return cartesian_to_frenet(center.line(), cart, center.default_capture());
}

double distance_to_boundary(const TrackModel &center, Vec2 p) {
    // unbounded capture: far-out points simply report a large negative margin
    FrenetPose f = cartesian_to_frenet(center.line(), {p.x, p.y, 0.0},
                                       std::numeric_limits<double>::infinity());
    return std::min(center.width_left_at(f.s) - f.d, center.width_right_at(f.s) + f.d);
}

} // namespace racesim::trackgeom
