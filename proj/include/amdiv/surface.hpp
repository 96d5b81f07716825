#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "amdiv/grid.hpp"
#include "amdiv/types.hpp"

namespace amdiv {

// Solved value function on one dividend-free segment [t_lo, t_hi]. Slices are
// stored ascending in time; the slice at t_hi holds the terminal condition,
// i.e. the pre-dividend limit u(t_hi-, x) when t_hi is a dividend date.
struct ValueSurface {
    PriceGrid grid;
    std::vector<double> times;          // ascending, times.front()=t_lo, back()=t_hi
    std::vector<double> values;         // row-major: values[k*grid.size() + n]
    std::vector<std::uint8_t> exercise; // 1 where value == obstacle within tolerance
    double t_lo = 0.0, t_hi = 0.0;
    int segment_index = 0;              // chronological index within a multi-segment solve
    double obstacle_tol = 0.0;          // tolerance used when filling `exercise`

    std::size_t n_times() const { return times.size(); }
    std::size_t n_nodes() const { return grid.size(); }

    std::span<const double> slice(std::size_t k) const {
        return {values.data() + k * grid.size(), grid.size()};
    }
    std::span<double> slice(std::size_t k) {
        return {values.data() + k * grid.size(), grid.size()};
    }
    std::span<const std::uint8_t> mask(std::size_t k) const {
        return {exercise.data() + k * grid.size(), grid.size()};
    }

    // Index of the stored time closest to t.
    std::size_t nearest_time(double t) const;
};

// Worst-case violations of the value-function shape constraints, maximised over
// all slices and interior nodes. All quantities are in currency units and are
// >= 0 (0 = no violation anywhere).
struct SurfaceShapeReport {
    double below_payoff = 0.0;   // max (K-x)^+ - u
    double above_strike = 0.0;   // max u - K
    double monotone = 0.0;       // max u(x_{n+1}) - u(x_n)
    double lipschitz = 0.0;      // max u(x_n) - u(x_{n+1}) - (x_{n+1} - x_n)
    double convexity = 0.0;      // max chord-gap u_n - interp(u_{n-1}, u_{n+1})
};

SurfaceShapeReport measure_shape(const ValueSurface& surface, double strike);

// Node-snapped exercise level of one slice: largest node below `cap` whose
// whole lower range is flagged as exercised. A conservative (never above the
// true boundary) estimate, cheap enough for the composition splice.
double masked_exercise_level(const ValueSurface& surface, std::size_t slice_index,
                             double cap);

// Value at (t, x): linear in t between the bracketing stored slices (t clamped
// to [t_lo, t_hi]), monotone cubic in x along each slice.
double surface_value_at(const ValueSurface& surface, double t, double x);

// Exercise boundary samples c(t): largest price still in the exercise region.
struct BoundaryCurve {
    std::vector<double> times;
    std::vector<double> levels;
    std::vector<std::uint8_t> refined;  // 1 if bisection-refined, 0 if node-snapped
    double tolerance = 0.0;             // value-gap threshold used for membership

    std::size_t size() const { return times.size(); }
};

}  // namespace amdiv
