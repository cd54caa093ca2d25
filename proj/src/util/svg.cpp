#include "racesim/util/svg.hpp"

#include "racesim/util/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace racesim {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace

void SvgCanvas::set_world(double min_x, double min_y, double max_x, double max_y) {
    min_x_ = min_x;
    min_y_ = min_y;
    max_x_ = std::max(max_x, min_x + 1e-9);
    max_y_ = std::max(max_y, min_y + 1e-9);
}

double SvgCanvas::px(double x) const { return (x - min_x_) / (max_x_ - min_x_) * w_; }
double SvgCanvas::py(double y) const { return h_ - (y - min_y_) / (max_y_ - min_y_) * h_; }

void SvgCanvas::polyline(const std::vector<double> &xs, const std::vector<double> &ys,
                         const std::string &color, double stroke_width, bool dashed) {
    if (xs.size() < 2 || xs.size() != ys.size()) {
        return;
    }
    std::ostringstream os;
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << stroke_width
       << "\"";
    if (dashed) {
        os << " stroke-dasharray=\"6,4\"";
    }
    os << " points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        os << num(px(xs[i])) << ',' << num(py(ys[i])) << ' ';
    }
    os << "\"/>\n";
    body_ += os.str();
}

void SvgCanvas::rect(double cx, double cy, double yaw_rad, double length, double width,
                     const std::string &color, const std::string &fill) {
    double ca = std::cos(yaw_rad);
    double sa = std::sin(yaw_rad);
    double hl = length / 2.0;
    double hw = width / 2.0;
    const double lx[5] = {hl, hl, -hl, -hl, hl};
    const double ly[5] = {hw, -hw, -hw, hw, hw};
    std::ostringstream os;
    os << "<polyline fill=\"" << fill << "\" stroke=\"" << color << "\" stroke-width=\"1.5\""
       << " points=\"";
    for (int i = 0; i < 5; ++i) {
        double x = cx + lx[i] * ca - ly[i] * sa;
        double y = cy + lx[i] * sa + ly[i] * ca;
        os << num(px(x)) << ',' << num(py(y)) << ' ';
    }
    os << "\"/>\n";
    // heading tick from center to the nose
    os << "<line stroke=\"" << color << "\" stroke-width=\"1\" x1=\"" << num(px(cx)) << "\" y1=\""
       << num(py(cy)) << "\" x2=\"" << num(px(cx + hl * ca)) << "\" y2=\"" << num(py(cy + hl * sa))
       << "\"/>\n";
    body_ += os.str();
}

void SvgCanvas::text(double x_px, double y_px, const std::string &content, int size_px,
                     const std::string &color) {
    std::ostringstream os;
    os << "<text x=\"" << num(x_px) << "\" y=\"" << num(y_px) << "\" font-size=\"" << size_px
       << "\" font-family=\"sans-serif\" fill=\"" << color << "\">" << content << "</text>\n";
    body_ += os.str();
}

void SvgCanvas::circle(double x, double y, double radius_px, const std::string &color) {
    std::ostringstream os;
    os << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"" << radius_px
       << "\" fill=\"" << color << "\"/>\n";
    body_ += os.str();
}

std::string SvgCanvas::finish() const {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_
       << "\" viewBox=\"0 0 " << w_ << ' ' << h_ << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << body_ << "</svg>\n";
    return os.str();
}

void SvgCanvas::write(const std::string &path) const {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write SVG: " + path);
    }
    out << finish();
}

void write_line_chart(const std::string &path, const std::string &title,
                      const std::string &x_label, const std::string &y_label,
                      const std::vector<LineSeries> &series) {
    const double width = 720.0;
    const double height = 300.0;
    const double margin_left = 60.0;
    const double margin_bottom = 40.0;
    const double margin_top = 28.0;

    double min_x = 0.0, max_x = 1.0, min_y = 0.0, max_y = 1.0;
    bool first = true;
    for (const auto &s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (first) {
                min_x = max_x = s.x[i];
                min_y = max_y = s.y[i];
                first = false;
            }
            min_x = std::min(min_x, s.x[i]);
            max_x = std::max(max_x, s.x[i]);
            min_y = std::min(min_y, s.y[i]);
            max_y = std::max(max_y, s.y[i]);
        }
    }
    if (max_y - min_y < 1e-12) {
        max_y = min_y + 1.0;
    }
    if (max_x - min_x < 1e-12) {
        max_x = min_x + 1.0;
    }

    SvgCanvas canvas(width, height);
    double plot_w = width - margin_left - 16.0;
    double plot_h = height - margin_top - margin_bottom;
    // world mapped onto the plot area by extending the world box so the
    // margins fall outside it
    double wx = (max_x - min_x) * (width / plot_w);
    double wy = (max_y - min_y) * (height / plot_h);
    double world_min_x = min_x - (max_x - min_x) * (margin_left / plot_w);
    double world_min_y = min_y - (max_y - min_y) * (margin_bottom / plot_h);
    canvas.set_world(world_min_x, world_min_y, world_min_x + wx, world_min_y + wy);

    canvas.polyline({min_x, max_x}, {min_y, min_y}, "#888", 1.0);
    canvas.polyline({min_x, min_x}, {min_y, max_y}, "#888", 1.0);
    for (const auto &s : series) {
        canvas.polyline(s.x, s.y, s.color, 1.5);
    }
    canvas.text(8.0, 16.0, title, 14, "#000");
    canvas.text(width / 2.0, height - 8.0, x_label);
    canvas.text(8.0, margin_top + 4.0, y_label);
    double legend_y = 16.0;
    for (const auto &s : series) {
        canvas.text(width - 180.0, legend_y, s.label, 12, s.color);
        legend_y += 14.0;
    }
    canvas.write(path);
}

} // namespace racesim
