#include "racesim/trackgeom/polyline.hpp"

#include "racesim/util/error.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>

namespace racesim::trackgeom {

Polyline::Polyline(std::vector<Vec2> points, bool closed) : pts_(std::move(points)), closed_(closed) {
    if (pts_.size() < (closed_ ? 3u : 2u)) {
        throw ConfigError("polyline needs at least " + std::string(closed_ ? "3" : "2") + " points");
    }
    const std::size_t n = pts_.size();
    cum_s_.resize(n);
    cum_s_[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        double len = (pts_[i] - pts_[i - 1]).norm();
        if (len <= 1e-9) {
            throw ConfigError("polyline has duplicate consecutive points at index " +
                              std::to_string(i));
        }
        cum_s_[i] = cum_s_[i - 1] + len;
    }
    if (closed_) {
        double len = (pts_[0] - pts_[n - 1]).norm();
        if (len <= 1e-9) {
            throw ConfigError("closed polyline repeats its first point; drop the last row");
        }
        total_length_ = cum_s_[n - 1] + len;
    } else {
        total_length_ = cum_s_[n - 1];
    }

    // vertex headings by central differences; endpoints wrap when closed
    heading_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 prev, next;
        if (closed_) {
            prev = pts_[(i + n - 1) % n];
            next = pts_[(i + 1) % n];
        } else if (i == 0) {
            prev = pts_[0];
            next = pts_[1];
        } else if (i == n - 1) {
            prev = pts_[n - 2];
            next = pts_[n - 1];
        } else {
            prev = pts_[i - 1];
            next = pts_[i + 1];
        }
        Vec2 d = next - prev;
        heading_[i] = std::atan2(d.y, d.x);
    }

    build_grid();
}

double Polyline::segment_length(std::size_t i) const {
    double end = (i + 1 < pts_.size()) ? cum_s_[i + 1] : total_length_;
    return end - cum_s_[i];
}

double Polyline::normalize_s(double s) const {
    if (closed_) {
        s = std::fmod(s, total_length_);
        if (s < 0.0) {
            s += total_length_;
        }
        return s;
    }
    return std::clamp(s, 0.0, total_length_);
}

std::size_t Polyline::locate_segment(double s, double *t_out) const {
    s = normalize_s(s);
    auto it = std::upper_bound(cum_s_.begin(), cum_s_.end(), s);
    std::size_t seg = static_cast<std::size_t>(it - cum_s_.begin()) - 1;
    if (!closed_ && seg >= segment_count()) {
        seg = segment_count() - 1;
    }
    double len = segment_length(seg);
    if (t_out) {
        *t_out = std::clamp((s - cum_s_[seg]) / len, 0.0, 1.0);
    }
    return seg;
}

Vec2 Polyline::point_at(double s) const {
    double t = 0.0;
    std::size_t seg = locate_segment(s, &t);
    Vec2 a = segment_start(seg);
    Vec2 b = segment_end(seg);
    return a + (b - a) * t;
}

double Polyline::heading_at(double s) const {
    double t = 0.0;
    std::size_t seg = locate_segment(s, &t);
    double h0 = heading_[seg];
    double h1 = heading_[(seg + 1) % pts_.size()];
    return wrap_angle(h0 + t * wrap_angle(h1 - h0));
}

Vec2 Polyline::segment_normal_at(double s) const {
    std::size_t seg = locate_segment(s, nullptr);
    Vec2 dir = segment_end(seg) - segment_start(seg);
    double len = dir.norm();
    return {-dir.y / len, dir.x / len};
}

double Polyline::curvature_at(double s) const {
    std::size_t seg = locate_segment(s, nullptr);
    double h0 = heading_[seg];
    double h1 = heading_[(seg + 1) % pts_.size()];
    return wrap_angle(h1 - h0) / segment_length(seg);
}

Vec2 Polyline::offset_point(double s, double d) const {
    return point_at(s) + segment_normal_at(s) * d;
}

void Polyline::build_grid() {
    double max_x = -std::numeric_limits<double>::infinity();
    double max_y = -std::numeric_limits<double>::infinity();
    min_x_ = std::numeric_limits<double>::infinity();
    min_y_ = std::numeric_limits<double>::infinity();
    for (const auto &p : pts_) {
        min_x_ = std::min(min_x_, p.x);
        min_y_ = std::min(min_y_, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }
    double avg_seg = total_length_ / static_cast<double>(segment_count());
    cell_size_ = std::max(avg_seg * 2.0, 1.0);
    grid_w_ = std::max(1, static_cast<int>((max_x - min_x_) / cell_size_) + 1);
    grid_h_ = std::max(1, static_cast<int>((max_y - min_y_) / cell_size_) + 1);
    cells_.assign(static_cast<std::size_t>(grid_w_) * grid_h_, {});

    auto cell_of = [&](double x, double y) {
        int cx = std::clamp(static_cast<int>((x - min_x_) / cell_size_), 0, grid_w_ - 1);
        int cy = std::clamp(static_cast<int>((y - min_y_) / cell_size_), 0, grid_h_ - 1);
        return std::pair<int, int>{cx, cy};
    };

    for (std::size_t i = 0; i < segment_count(); ++i) {
        Vec2 a = segment_start(i);
        Vec2 b = segment_end(i);
        auto [ax, ay] = cell_of(std::min(a.x, b.x), std::min(a.y, b.y));
        auto [bx, by] = cell_of(std::max(a.x, b.x), std::max(a.y, b.y));
        for (int cy = ay; cy <= by; ++cy) {
            for (int cx = ax; cx <= bx; ++cx) {
                cells_[static_cast<std::size_t>(cy) * grid_w_ + cx].push_back(
                    static_cast<std::uint32_t>(i));
            }
        }
    }
}

void Polyline::project_onto_segment(Vec2 p, std::size_t seg, Projection &best) const {
    Vec2 a = segment_start(seg);
    Vec2 b = segment_end(seg);
    Vec2 ab = b - a;
    double len2 = ab.dot(ab);
    double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    Vec2 closest = a + ab * t;
    Vec2 off = p - closest;
    double dist = off.norm();
    double s = cum_s_[seg] + t * segment_length(seg);
    if (closed_ && s >= total_length_) {
        s -= total_length_;
    }
    // strict ordering: (distance, s); equal distances pick the smallest s
    constexpr double kTieEps = 1e-12;
    if (dist < best.distance - kTieEps ||
        (std::abs(dist - best.distance) <= kTieEps && s < best.s)) {
        double len = std::sqrt(len2);
        Vec2 normal{-ab.y / len, ab.x / len};
        best.s = s;
        best.distance = dist;
        best.d = off.dot(normal);
        best.segment = seg;
    }
}

Projection Polyline::project_brute_force(Vec2 p) const {
    Projection best;
    best.distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < segment_count(); ++i) {
        project_onto_segment(p, i, best);
    }
    return best;
}

Projection Polyline::project(Vec2 p) const {
    Projection best;
    best.distance = std::numeric_limits<double>::infinity();

    int px = std::clamp(static_cast<int>((p.x - min_x_) / cell_size_), 0, grid_w_ - 1);
    int py = std::clamp(static_cast<int>((p.y - min_y_) / cell_size_), 0, grid_h_ - 1);
    int max_ring = std::max(grid_w_, grid_h_);

    std::vector<std::uint32_t> candidates;
    for (int ring = 0; ring <= max_ring; ++ring) {
        // once the best hit is closer than anything a farther ring can hold,
        // widen by one more ring (tie safety) and finish with an exact pass
        double ring_min_dist = (ring - 1) * cell_size_;
        if (best.distance < std::numeric_limits<double>::infinity() &&
            ring_min_dist > best.distance + cell_size_) {
            break;
        }
        bool any_cell = false;
        for (int cy = py - ring; cy <= py + ring; ++cy) {
            for (int cx = px - ring; cx <= px + ring; ++cx) {
                bool on_ring = (cy == py - ring || cy == py + ring || cx == px - ring ||
                                cx == px + ring);
                if (!on_ring || cx < 0 || cy < 0 || cx >= grid_w_ || cy >= grid_h_) {
                    continue;
                }
                any_cell = true;
                for (std::uint32_t seg : cells_[static_cast<std::size_t>(cy) * grid_w_ + cx]) {
                    candidates.push_back(seg);
                }
            }
        }
        if (!candidates.empty()) {
            std::sort(candidates.begin(), candidates.end());
            candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
            for (std::uint32_t seg : candidates) {
                project_onto_segment(p, seg, best);
            }
            candidates.clear();
        }
        if (!any_cell && ring > 0 && (px - ring < 0 && py - ring < 0 && px + ring >= grid_w_ &&
                                      py + ring >= grid_h_)) {
            break; // ring left the grid entirely
        }
    }
    if (best.distance == std::numeric_limits<double>::infinity()) {
        return project_brute_force(p);
    }
    return best;
}

double Polyline::signed_s_delta(double a, double b) const {
    double diff = a - b;
    if (!closed_) {
        return diff;
    }
    diff = std::fmod(diff, total_length_);
    if (diff > total_length_ / 2.0) {
        diff -= total_length_;
    } else if (diff <= -total_length_ / 2.0) {
        diff += total_length_;
    }
    return diff;
}

} // namespace racesim::trackgeom
