#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "amdiv/dividends.hpp"
#include "amdiv/surface.hpp"
#include "amdiv/types.hpp"

namespace amdiv {

struct ExtractParams {
    // Value-gap threshold for exercise-region membership; if <= 0 it defaults
    // to max(1e-7 * strike, surface.obstacle_tol).
    double epsilon = 0.0;
    int bisection_iters = 60;
};

// Exercise boundary of every stored slice: the largest refined x whose value
// sits on the obstacle within epsilon. Scans node-by-node from above (only
// below the strike: the boundary cannot reach K), then bisects on a monotone
// cubic interpolant of u - obstacle between the bracketing nodes. Returns 0 at
// a slice whose smallest positive node is already strictly in continuation.
BoundaryCurve extract_boundary(const ValueSurface& surface, const OptionSpec& spec,
                               const ExtractParams& ep = {});

// Same, with an explicit obstacle (t, x) -> psi (escrowed problems exercise
// against a time-dependent payoff, not (K - x)^+).
BoundaryCurve extract_boundary_obstacle(const ValueSurface& surface,
                                        const std::function<double(double, double)>& obstacle,
                                        double x_cap, const ExtractParams& ep = {});

// One-sided estimate of u_x(t, c(t)+): quadratic through the first three grid
// nodes above the boundary, differentiated at the contact point re-derived
// from the quadratic's intersection with the payoff line (second-order in the
// cell width; the supplied level alone is only node-accurate). Throws
// BoundaryAtZero / InsufficientNodes when the precondition fails.
double smooth_contact_slope(const ValueSurface& surface, std::size_t slice_index,
                            double boundary_level, double strike);

struct SlopeFit {
    double slope = 0.0;      // s in c(t) ~ s * (t_d - t)
    double r_squared = 0.0;  // of the through-origin fit
    std::size_t samples = 0;
};

// Least-squares fit of c(t) = s (t_d - t) through the origin over samples with
// t_d - t inside (delta_lo, delta_hi]. Throws EmptyWindow if no samples fall in.
SlopeFit asymptotic_slope(const BoundaryCurve& curve, double t_d, double delta_lo,
                          double delta_hi);

// Default fit window (2 * dt_fine, 5% of the segment length).
std::pair<double, double> default_slope_window(double t_lo, double t_d, double dt_fine);

struct BoundCheckParams {
    double asymptote_margin = 0.35;   // slack factor on the near-date linear bound
    double asymptote_window = 0.0;    // 0 -> 5% of the segment
    double tail_fraction = 0.05;      // "last 5%" window for the threshold cap
    std::size_t min_monotone_samples = 10;
};

struct BoundCheckReport {
    // (a) c(t) <= (1 - e^{-r(t_d - t)}) K / (1 - rho), families linear near zero
    bool exp_bound_applicable = false;
    bool exp_bound_ok = false;
    // min over samples of bound + slack - c, slack = one cell at the level
    // (the identity family attains the bound with equality)
    double exp_bound_min_margin = 0.0;
    // (b) c(t) <= r K mu (t_d - t)(1 + margin) near the date, positive dividends
    bool asymptote_applicable = false;
    bool asymptote_ok = false;
    double asymptote_max_ratio = 0.0;   // max c / (r K mu (t_d - t))
    // (c) threshold cap: max c over the tail <= min(d0, cbar) + one cell
    bool cap_applicable = false;
    bool cap_ok = false;
    double cap_excess = 0.0;
    // (d) non-increasing on a detected left-neighbourhood of t_d
    bool monotone_ok = false;
    double monotone_window = 0.0;       // length of the detected neighbourhood
    std::size_t monotone_samples = 0;
};

// Boundary-shape bounds for a pre-dividend segment curve ending at t_d.
// `cbar_at_date` is the post-dividend boundary c(t_d) (used by the threshold cap).
BoundCheckReport check_bounds(const BoundaryCurve& curve, const OptionSpec& spec,
                              const MarketParams& params, const DividendFunction& df,
                              double t_d, double cbar_at_date, const PriceGrid& grid,
                              const BoundCheckParams& bp = {});

}  // namespace amdiv
