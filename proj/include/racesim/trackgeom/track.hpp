#pragma once

#include "racesim/trackgeom/polyline.hpp"

#include <string>
#include <vector>

namespace racesim::trackgeom {

/// Position relative to a reference line: arc length s, lateral offset d
/// (left of travel positive), yaw mu relative to the reference heading at s.
struct FrenetPose {
    double s = 0.0;
    double d = 0.0;
    double mu = 0.0;
};

struct CartesianPose {
    double x = 0.0;
    double y = 0.0;
    double yaw = 0.0;
};

/// Closed centerline with per-vertex track widths. The geometric ground for
/// every Frenet conversion; the lateral sign convention is left-positive.
class TrackModel {
  public:
    TrackModel(std::vector<Vec2> centerline, std::vector<double> width_left,
               std::vector<double> width_right);

    /// CSV with header x,y,w_left,w_right (meters, >= 3 rows, implicitly closed).
    static TrackModel load_csv(const std::string &path);

    const Polyline &line() const { return line_; }
    double total_length() const { return line_.total_length(); }
    double width_left_at(double s) const;
    double width_right_at(double s) const;
    double max_width() const { return max_width_; }

    /// Default capture distance for projections: twice the widest section.
    double default_capture() const { return 2.0 * max_width_; }

  private:
    Polyline line_;
    std::vector<double> w_left_;
    std::vector<double> w_right_;
    double max_width_ = 0.0;

    double width_at(const std::vector<double> &w, double s) const;
};

/// Driveable trajectory with a per-point target speed profile.
class RacingLine {
  public:
    RacingLine(std::vector<Vec2> points, std::vector<double> speeds);

    /// CSV with header x,y,v (v in m/s, implicitly closed).
    static RacingLine load_csv(const std::string &path);

    const Polyline &line() const { return line_; }
    double total_length() const { return line_.total_length(); }
    double speed_at(double s) const;

  private:
    Polyline line_;
    std::vector<double> speeds_;
};

/// Frenet -> Cartesian on any reference line: point at s plus d along the
/// left normal; yaw is the reference heading at s plus mu.
CartesianPose frenet_to_cartesian(const Polyline &line, const FrenetPose &pose);

/// Cartesian -> Frenet by exact segment projection (ties to smallest s).
/// Throws ProjectionError when the point is farther than capture_distance.
FrenetPose cartesian_to_frenet(const Polyline &line, const CartesianPose &pose,
                               double capture_distance);

/// Two-step initialization re-projection: a pose given on a driving
/// trajectory is converted to Cartesian, then re-projected onto the track
/// centerline, correcting yaw by the heading difference between the two
/// lines. The only sanctioned way to spawn the vehicle.
FrenetPose reproject_init(const TrackModel &center, const RacingLine &traj,
                          const FrenetPose &pose_on_traj);

/// Signed distance to the nearest track edge; positive inside the track.
double distance_to_boundary(const TrackModel &center, Vec2 p);

} // namespace racesim::trackgeom
