// Synthetic track generator: writes the centerline/width CSV and a matching
// racing line CSV for an oval built from straights, spiral transitions and
// constant-radius turns. The shipped scenario tracks were produced with
// this tool.

#include "racesim/util/csv.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <vector>

namespace {

struct Section {
    double length = 0.0;
    double kappa0 = 0.0; // curvature at section start
    double kappa1 = 0.0; // curvature at section end (linear in between)
};

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"racesim-trackgen - synthetic oval track generator"};

    double straight = 700.0;
    double radius = 300.0;
    double spiral = 80.0;
    double half_width = 7.5;
    double spacing = 4.0;
    double speed_cap = 90.0;
    double a_lat = 20.0;
    std::string track_out = "track.csv";
    std::string line_out = "racing_line.csv";

    app.add_option("--straight", straight, "straight length [m]");
    app.add_option("--radius", radius, "turn radius [m]");
    app.add_option("--spiral", spiral, "spiral transition length [m]");
    app.add_option("--half-width", half_width, "track half width [m]");
    app.add_option("--spacing", spacing, "point spacing [m]");
    app.add_option("--speed", speed_cap, "speed cap for the racing line [m/s]");
    app.add_option("--alat", a_lat, "lateral acceleration limit [m/s^2]");
    app.add_option("--track", track_out, "centerline CSV output");
    app.add_option("--line", line_out, "racing line CSV output");
    CLI11_PARSE(app, argc, argv);

    const double kappa = 1.0 / radius;
    // each 180-degree turn: spiral in, arc, spiral out; the spirals
    // contribute spiral*kappa/2 of heading each
    const double arc_angle = M_PI - spiral * kappa;
    if (arc_angle <= 0.0) {
        std::cerr << "spiral too long for this radius\n";
        return 1;
    }
    const double arc_len = arc_angle / kappa;

    std::vector<Section> sections = {
        {straight, 0.0, 0.0}, {spiral, 0.0, kappa}, {arc_len, kappa, kappa}, {spiral, kappa, 0.0},
        {straight, 0.0, 0.0}, {spiral, 0.0, kappa}, {arc_len, kappa, kappa}, {spiral, kappa, 0.0},
    };

    // march the centerline with fine substeps; emit a point every `spacing`
    racesim::CsvDoc track;
    racesim::CsvDoc line;
    track.header = {"x", "y", "w_left", "w_right"};
    line.header = {"x", "y", "v"};

    double x = 0.0, y = 0.0, heading = 0.0;
    double since_emit = 0.0;
    const double step = 0.05;
    auto emit = [&](double k) {
        double v = k > 1e-9 ? std::min(speed_cap, std::sqrt(a_lat / k)) : speed_cap;
        track.rows.push_back({x, y, half_width, half_width});
        line.rows.push_back({x, y, v});
    };
    emit(0.0);
    for (const auto &sec : sections) {
        double s = 0.0;
        while (s < sec.length - 1e-9) {
            double ds = std::min(step, sec.length - s);
            double k = sec.kappa0 + (sec.kappa1 - sec.kappa0) * ((s + ds / 2.0) / sec.length);
            x += std::cos(heading + k * ds / 2.0) * ds;
            y += std::sin(heading + k * ds / 2.0) * ds;
            heading += k * ds;
            s += ds;
            since_emit += ds;
            if (since_emit >= spacing) {
                emit(k);
                since_emit = 0.0;
            }
        }
    }
    // drop emitted points too close to the closure seam
    while (!track.rows.empty()) {
        double dx = track.rows.back()[0] - track.rows.front()[0];
        double dy = track.rows.back()[1] - track.rows.front()[1];
        if (std::hypot(dx, dy) > spacing / 2.0) {
            break;
        }
        track.rows.pop_back();
        line.rows.pop_back();
    }

    racesim::write_csv(track_out, track);
    racesim::write_csv(line_out, line);

    double length = 2.0 * straight + 4.0 * spiral + 2.0 * arc_len;
    double corner_speed = std::min(speed_cap, std::sqrt(a_lat * radius));
    std::cout << "wrote " << track_out << " and " << line_out << " (" << track.rows.size()
              << " points, length " << length << " m, corner speed " << corner_speed << " m/s)\n";
    return 0;
}
