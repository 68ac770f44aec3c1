#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "aoisim/common/rng.hpp"

namespace aoisim::radio {

// Manhattan grid the CVs drive on. Columns carry the vertical roads and rows
// the horizontal ones; both axes wrap (torus) so the vehicle population and
// density stay constant, with the wrap span acting as the return road.
struct GridGeometry {
    int cols = 4;
    int rows = 4;
    double col_spacing_m = 250.0;
    double row_spacing_m = 433.0;

    double period_x() const { return cols * col_spacing_m; }
    double period_y() const { return rows * row_spacing_m; }
    // BS sits at the geometric center of the node lattice.
    double bs_x() const { return (cols - 1) * col_spacing_m / 2.0; }
    double bs_y() const { return (rows - 1) * row_spacing_m / 2.0; }
};

struct MobilityParams {
    double speed_min_mps = 10.0;
    double speed_max_mps = 14.0;
    double p_straight = 0.5;
    double p_left = 0.25;
    double p_right = 0.25;
};

struct CvRadioState {
    double x_m = 0.0;
    double y_m = 0.0;
    int heading_x = 1;  // one of (±1,0) or (0,±1)
    int heading_y = 0;
    double speed_mps = 12.0;
    double shadowing_db = 0.0;
    double large_scale_gain = 0.0;          // alpha_v, linear power gain
    std::vector<double> fast_fading;        // g_v[n] per subchannel
    double aoi_ms = 0.0;
};

inline double wrap_coordinate(double v, double period) {
    double w = std::fmod(v, period);
    return w < 0.0 ? w + period : w;
}

inline double distance_to_bs_km(const CvRadioState& s, const GridGeometry& g,
                                double bs_height_m, double cv_height_m) {
    double dx = s.x_m - g.bs_x();
    double dy = s.y_m - g.bs_y();
    double dz = bs_height_m - cv_height_m;
    return std::sqrt(dx * dx + dy * dy + dz * dz) / 1000.0;
}

// Uniform placement over the directed lane length of the grid.
inline CvRadioState random_vehicle_state(const GridGeometry& g,
                                         const MobilityParams& m,
                                         Rng& rng) {
    CvRadioState s;
    double len_h = g.rows * g.period_x();
    double len_v = g.cols * g.period_y();
    bool horizontal = rng.uniform() < len_h / (len_h + len_v);
    if (horizontal) {
        int row = rng.uniform_int(g.rows);
        s.y_m = row * g.row_spacing_m;
        s.x_m = rng.uniform(0.0, g.period_x());
        s.heading_x = rng.uniform() < 0.5 ? 1 : -1;
        s.heading_y = 0;
    } else {
        int col = rng.uniform_int(g.cols);
        s.x_m = col * g.col_spacing_m;
        s.y_m = rng.uniform(0.0, g.period_y());
        s.heading_x = 0;
        s.heading_y = rng.uniform() < 0.5 ? 1 : -1;
    }
    s.speed_mps = rng.uniform(m.speed_min_mps, m.speed_max_mps);
    return s;
}

namespace detail {

// Distance along the travel direction to the next intersection. Being
// exactly on a node means a full block lies ahead.
inline double distance_to_next_node(double pos, double spacing, int dir) {
    double rem = std::fmod(pos, spacing);
    if (rem < 0.0) rem += spacing;
    constexpr double kEps = 1e-9;
    if (dir > 0) {
        double d = spacing - rem;
        return d < kEps ? spacing : d;
    }
    return rem < kEps ? spacing : rem;
}

}  // namespace detail

// Advances one vehicle by dt seconds: constant speed along the lane, random
// turn at every intersection (straight/left/right), torus wrap at the grid
// boundary. Consumes one uniform draw per intersection crossed.
inline CvRadioState mobility_step(const CvRadioState& state, double dt_s,
                                  const GridGeometry& g, const MobilityParams& m,
                                  Rng& rng) {
    if (dt_s < 0.0) throw std::invalid_argument("mobility_step: dt must be >= 0");
    if (state.heading_x * state.heading_y != 0 ||
        std::abs(state.heading_x) + std::abs(state.heading_y) != 1)
        throw std::invalid_argument("mobility_step: heading must be axis-aligned");
    CvRadioState s = state;
    double remaining = s.speed_mps * dt_s;
    while (remaining > 0.0) {
        double to_node = s.heading_x != 0
                             ? detail::distance_to_next_node(s.x_m, g.col_spacing_m,
                                                             s.heading_x)
                             : detail::distance_to_next_node(s.y_m, g.row_spacing_m,
                                                             s.heading_y);
        double step = std::min(remaining, to_node);
        s.x_m += s.heading_x * step;
        s.y_m += s.heading_y * step;
        remaining -= step;
        if (step == to_node && remaining >= 0.0 && step > 0.0) {
            // Snap onto the node to keep fmod arithmetic exact, then turn.
            if (s.heading_x != 0)
                s.x_m = std::round(s.x_m / g.col_spacing_m) * g.col_spacing_m;
            else
                s.y_m = std::round(s.y_m / g.row_spacing_m) * g.row_spacing_m;
            double u = rng.uniform();
            int hx = s.heading_x, hy = s.heading_y;
            if (u < m.p_straight) {
                // keep heading
            } else if (u < m.p_straight + m.p_left) {
                s.heading_x = -hy;
                s.heading_y = hx;
            } else {
                s.heading_x = hy;
                s.heading_y = -hx;
            }
        }
        if (remaining <= 0.0) break;
    }
    s.x_m = wrap_coordinate(s.x_m, g.period_x());
    s.y_m = wrap_coordinate(s.y_m, g.period_y());
    return s;
}

}  // namespace aoisim::radio
