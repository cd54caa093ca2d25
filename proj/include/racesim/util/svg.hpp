#pragma once

#include <string>
#include <vector>

namespace racesim {

/// Minimal SVG writer for report figures: line charts and rotated
/// rectangles over a world-coordinate viewport.
class SvgCanvas {
  public:
    SvgCanvas(double width_px, double height_px) : w_(width_px), h_(height_px) {}

    /// World rectangle mapped onto the canvas (y axis flipped).
    void set_world(double min_x, double min_y, double max_x, double max_y);

    void polyline(const std::vector<double> &xs, const std::vector<double> &ys,
                  const std::string &color, double stroke_width = 1.5, bool dashed = false);
    void rect(double cx, double cy, double yaw_rad, double length, double width,
              const std::string &color, const std::string &fill = "none");
    void text(double x_px, double y_px, const std::string &content, int size_px = 12,
              const std::string &color = "#333");
    void circle(double x, double y, double radius_px, const std::string &color);

    std::string finish() const;
    void write(const std::string &path) const;

  private:
    double w_;
    double h_;
    double min_x_ = 0.0, min_y_ = 0.0, max_x_ = 1.0, max_y_ = 1.0;
    std::string body_;

    double px(double x) const;
    double py(double y) const;
};

/// Axis-labelled line chart written as a standalone SVG file.
struct LineSeries {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
};

void write_line_chart(const std::string &path, const std::string &title,
                      const std::string &x_label, const std::string &y_label,
                      const std::vector<LineSeries> &series);

} // namespace racesim
