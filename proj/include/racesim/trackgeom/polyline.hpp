#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace racesim::trackgeom {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double k) const { return {x * k, y * k}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
};

inline double wrap_angle(double a) {
    a = std::fmod(a + M_PI, 2.0 * M_PI);
    if (a <= 0.0) {
        a += 2.0 * M_PI;
    }
    return a - M_PI; // (-pi, pi]
}

/// Result of projecting a Cartesian point onto a polyline.
struct Projection {
    double s = 0.0;        // arc length of the closest point
    double d = 0.0;        // signed lateral offset, left of travel positive
    double distance = 0.0; // |d|
    std::size_t segment = 0;
};

/// Piecewise-linear reference line with arc-length parametrization.
///
/// Positions use exact segment geometry (offsets along the segment's left
/// normal), which makes projection an exact inverse of point placement.
/// Headings are stored per vertex (central finite differences, wrapping on
/// closed lines) and interpolated along s, so orientation queries are
/// smooth even though the line itself is piecewise linear.
class Polyline {
  public:
    Polyline() = default;
    Polyline(std::vector<Vec2> points, bool closed);

    std::size_t size() const { return pts_.size(); }
    bool closed() const { return closed_; }
    double total_length() const { return total_length_; }
    const std::vector<Vec2> &points() const { return pts_; }
    const std::vector<double> &cum_s() const { return cum_s_; }
    const std::vector<double> &vertex_headings() const { return heading_; }

    /// Normalize an arc length into [0, total_length). Closed lines wrap;
    /// open lines clamp.
    double normalize_s(double s) const;

    Vec2 point_at(double s) const;
    /// Interpolated reference heading at s (radians).
    double heading_at(double s) const;
    /// Left unit normal of the segment containing s.
    Vec2 segment_normal_at(double s) const;
    /// Heading change per meter of the segment containing s.
    double curvature_at(double s) const;

    /// Place a point at lateral offset d (left positive) from the line.
    Vec2 offset_point(double s, double d) const;

    /// Exact closest-point projection over all segments, accelerated by a
    /// uniform grid. Ties are broken by smallest s.
    Projection project(Vec2 p) const;

    /// Grid-free exhaustive projection; the independent reference for the
    /// accelerated path.
    Projection project_brute_force(Vec2 p) const;

    /// Wrapped signed arc-length difference a - b in (-L/2, L/2] for closed
    /// lines; plain difference for open ones.
    double signed_s_delta(double a, double b) const;

  private:
    std::vector<Vec2> pts_;
    bool closed_ = true;
    std::vector<double> cum_s_;   // per vertex, cum_s_[0] = 0
    std::vector<double> heading_; // per vertex
    double total_length_ = 0.0;

    // uniform spatial grid over the bounding box: cell -> segment indices
    double cell_size_ = 1.0;
    double min_x_ = 0.0, min_y_ = 0.0;
    int grid_w_ = 0, grid_h_ = 0;
    std::vector<std::vector<std::uint32_t>> cells_;

    std::size_t segment_count() const { return closed_ ? pts_.size() : pts_.size() - 1; }
    Vec2 segment_start(std::size_t i) const { return pts_[i]; }
    Vec2 segment_end(std::size_t i) const { return pts_[(i + 1) % pts_.size()]; }
    double segment_length(std::size_t i) const;
    std::size_t locate_segment(double s, double *t_out) const;
    void build_grid();
    void project_onto_segment(Vec2 p, std::size_t seg, Projection &best) const;
};

} // namespace racesim::trackgeom
