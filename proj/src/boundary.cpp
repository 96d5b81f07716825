#include "amdiv/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "amdiv/errors.hpp"
#include "amdiv/interp.hpp"

namespace amdiv {

namespace {

// Boundary of one slice. `gap[i] = u[i] - psi[i]`, x_cap bounds the scan from
// above (the put boundary stays below the strike; beyond it u and psi both
// vanish and the gap test would trigger spuriously).
double slice_boundary(const std::vector<double>& x, const std::vector<double>& gap,
                      double x_cap, double eps, int iters, bool& refined) {
    refined = false;
    const std::size_t n = x.size();
    std::size_t top = n - 1;
    while (top > 0 && x[top] >= x_cap) --top;
    if (top == 0) return 0.0;

    std::size_t hit = 0;  // largest index below the cap with gap <= eps
    for (std::size_t i = top; i >= 1; --i) {
        if (gap[i] <= eps) {
            hit = i;
            break;
        }
    }
    if (hit == 0) return 0.0;  // smallest positive node already in continuation

    if (hit == top && gap[std::min(hit + 1, n - 1)] <= eps) {
        // exercise region runs into the cap (terminal payoff slice): cap it
        refined = true;
        return x_cap;
    }

    // bisect the eps-crossing of a local monotone interpolant of the gap
    const std::size_t lo_i = hit > 2 ? hit - 2 : 0;
    const std::size_t hi_i = std::min(hit + 3, n - 1);
    std::vector<double> xs(x.begin() + lo_i, x.begin() + hi_i + 1);
    std::vector<double> gs(gap.begin() + lo_i, gap.begin() + hi_i + 1);
    MonotoneCubic f(std::move(xs), std::move(gs));
    double a = x[hit], b = x[hit + 1];
    for (int q = 0; q < iters; ++q) {
        const double mid = 0.5 * (a + b);
        if (f(mid) <= eps) a = mid;
        else b = mid;
    }
    refined = true;
    return std::min(0.5 * (a + b), x_cap);
}

}  // namespace

BoundaryCurve extract_boundary(const ValueSurface& surface, const OptionSpec& spec,
                               const ExtractParams& ep) {
    spec.validate();
    const double K = spec.strike;
    auto put = [K](double, double x) { return std::max(K - x, 0.0); };
    return extract_boundary_obstacle(surface, put, K, ep);
}

BoundaryCurve extract_boundary_obstacle(const ValueSurface& surface,
                                        const std::function<double(double, double)>& obstacle,
                                        double x_cap, const ExtractParams& ep) {
    if (!obstacle) throw std::invalid_argument("extract_boundary: missing obstacle");
    const auto& x = surface.grid.nodes();
    const std::size_t n = x.size();
    if (n < 5) throw GridTooCoarse("extract_boundary: grid too small");

    const double eps =
        ep.epsilon > 0.0 ? ep.epsilon : std::max(surface.obstacle_tol, 1e-12);

    BoundaryCurve curve;
    curve.tolerance = eps;
    curve.times = surface.times;
    curve.levels.resize(surface.n_times());
    curve.refined.resize(surface.n_times());

    std::vector<double> gap(n);
    for (std::size_t k = 0; k < surface.n_times(); ++k) {
        const auto u = surface.slice(k);
        for (std::size_t i = 0; i < n; ++i)
            gap[i] = u[i] - obstacle(surface.times[k], x[i]);
        bool refined = false;
        curve.levels[k] =
            slice_boundary(x, gap, x_cap, eps, ep.bisection_iters, refined);
        curve.refined[k] = refined ? 1 : 0;
    }
    return curve;
}

double smooth_contact_slope(const ValueSurface& surface, std::size_t slice_index,
                            double boundary_level, double strike) {
    if (!(boundary_level > 0.0))
        throw BoundaryAtZero("smooth_contact_slope: boundary at zero");
    const auto& x = surface.grid.nodes();
    const auto u = surface.slice(slice_index);

    // first three nodes strictly above the boundary, within a 0.1 K reach
    std::size_t j = surface.grid.locate(boundary_level) + 1;
    while (j < x.size() && x[j] <= boundary_level) ++j;
    if (j + 2 >= x.size() || x[j + 2] - boundary_level > 0.1 * strike)
        throw InsufficientNodes("smooth_contact_slope: need 3 nodes above the boundary");

    // quadratic through (x_j, u_j), (x_{j+1}, u_{j+1}), (x_{j+2}, u_{j+2})
    const double x0 = x[j], x1 = x[j + 1], x2 = x[j + 2];
    const double f01 = (u[j + 1] - u[j]) / (x1 - x0);
    const double f12 = (u[j + 2] - u[j + 1]) / (x2 - x1);
    const double f012 = (f12 - f01) / (x2 - x0);

    // Re-derive the contact point as the intersection of the quadratic with
    // the payoff line: the supplied level is node-quantised (first-order in
    // the cell width), while the intersection is second-order accurate. With
    // smooth contact the intersection is a near-double root; when it is
    // complex (value sits just above the payoff) the vertex is the best
    // estimate. Fall back to the supplied level when the quadratic puts the
    // contact far away.
    const double qa = f012;
    const double qb = f01 - f012 * (x0 + x1);
    const double qc = u[j] - f01 * x0 + f012 * x0 * x1;
    double c = boundary_level;
    const double reach = 3.0 * (x2 - x0);
    const double a = qa, b = qb + 1.0, c0 = qc - strike;  // q(x) - (K - x)
    if (std::abs(a) > 1e-300) {
        const double disc = b * b - 4.0 * a * c0;
        double cand;
        if (disc >= 0.0) {
            // root of the pair nearest the supplied level
            const double sq = std::sqrt(disc);
            const double r1 = (-b - sq) / (2.0 * a), r2 = (-b + sq) / (2.0 * a);
            cand = std::abs(r1 - boundary_level) < std::abs(r2 - boundary_level) ? r1 : r2;
        } else {
            cand = -b / (2.0 * a);
        }
        if (std::abs(cand - boundary_level) <= reach) c = cand;
    } else if (std::abs(b) > 1e-300) {
        const double cand = -c0 / b;
        if (std::abs(cand - boundary_level) <= reach) c = cand;
    }
    return f01 + f012 * (2.0 * c - x0 - x1);
}

SlopeFit asymptotic_slope(const BoundaryCurve& curve, double t_d, double delta_lo,
                          double delta_hi) {
    if (!(delta_hi > delta_lo && delta_lo >= 0.0))
        throw std::invalid_argument("asymptotic_slope: bad window");
    double num = 0.0, den = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < curve.size(); ++k) {
        const double delta = t_d - curve.times[k];
        if (delta <= delta_lo || delta > delta_hi) continue;
        num += curve.levels[k] * delta;
        den += delta * delta;
        ++count;
    }
    if (count == 0 || den == 0.0)
        throw EmptyWindow("asymptotic_slope: no samples inside the window");

    SlopeFit fit;
    fit.slope = num / den;
    fit.samples = count;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t k = 0; k < curve.size(); ++k) {
        const double delta = t_d - curve.times[k];
        if (delta <= delta_lo || delta > delta_hi) continue;
        const double e = curve.levels[k] - fit.slope * delta;
        ss_res += e * e;
        ss_tot += curve.levels[k] * curve.levels[k];
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    return fit;
}

std::pair<double, double> default_slope_window(double t_lo, double t_d, double dt_fine) {
    return {2.0 * dt_fine, 0.05 * (t_d - t_lo)};
}

BoundCheckReport check_bounds(const BoundaryCurve& curve, const OptionSpec& spec,
                              const MarketParams& params, const DividendFunction& df,
                              double t_d, double cbar_at_date, const PriceGrid& grid,
                              const BoundCheckParams& bp) {
    spec.validate();
    params.validate();
    if (curve.size() < 3) throw std::invalid_argument("check_bounds: curve too short");

    const double K = spec.strike;
    const double r = params.rate;
    BoundCheckReport rep;

    // (a) exponential bound c <= (1 - e^{-r delta}) K / slope0. The derivation
    // needs D(x) = slope0 * x wherever the boundary lives, so it is only claimed
    // for families that are linear on all of [0, inf) (proportional, identity,
    // and mixed with the cap branch never active).
    const double slope0 = df.near_zero_slope();
    if (slope0 > 0.0 && std::isinf(df.linear_radius())) {
        rep.exp_bound_applicable = true;
        rep.exp_bound_ok = true;
        rep.exp_bound_min_margin = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < curve.size(); ++k) {
            const double delta = t_d - curve.times[k];
            if (delta <= 0.0) continue;
            const double bound = (1.0 - std::exp(-r * delta)) * K / slope0;
            // The identity family attains the bound with equality, so each
            // sample gets one cell of extraction slack.
            const double slack =
                grid.cell_width(std::max(curve.levels[k], grid[1])) + 1e-12 * K;
            const double margin = bound + slack - curve.levels[k];
            rep.exp_bound_min_margin = std::min(rep.exp_bound_min_margin, margin);
            if (margin < 0.0) rep.exp_bound_ok = false;
        }
    }

    // (b) near-date linear bound c <= r K mu (t_d - t)(1 + margin)
    if (df.is_positive()) {
        const double mu = df.inf_ratio();
        const double window =
            bp.asymptote_window > 0.0 ? bp.asymptote_window
                                      : 0.05 * (t_d - curve.times.front());
        rep.asymptote_applicable = true;
        rep.asymptote_ok = true;
        for (std::size_t k = 0; k < curve.size(); ++k) {
            const double delta = t_d - curve.times[k];
            if (delta <= 0.0 || delta > window) continue;
            const double lin = r * K * mu * delta;
            // Skip samples where the theoretical level is below mesh
            // resolution; the extracted level there is quantisation, not shape.
            if (lin <= 2.0 * grid.cell_width(lin)) continue;
            rep.asymptote_max_ratio = std::max(rep.asymptote_max_ratio,
                                               curve.levels[k] / lin);
        }
        if (rep.asymptote_max_ratio > 1.0 + bp.asymptote_margin) rep.asymptote_ok = false;
    }

    // (c) cap for dividends that vanish near zero (threshold family):
    // limsup_{t->t_d} c(t) <= min(d0, cbar(t_d))
    if (!df.is_positive() && df.zero_radius() > 0.0) {
        rep.cap_applicable = true;
        const double cap = std::min(df.zero_radius(), cbar_at_date);
        const double cell = grid.cell_width(cap);
        double worst = 0.0;
        const double t_from = t_d - bp.tail_fraction * (t_d - curve.times.front());
        for (std::size_t k = 0; k < curve.size(); ++k) {
            if (curve.times[k] < t_from || curve.times[k] >= t_d) continue;
            worst = std::max(worst, curve.levels[k] - (cap + cell));
        }
        rep.cap_excess = worst;
        rep.cap_ok = worst <= 0.0;
    }

    // (d) non-increasing on a detected left-neighbourhood of t_d
    {
        std::size_t last = curve.size();
        while (last > 0 && curve.times[last - 1] > t_d) --last;
        // walk left from the date while the curve keeps (weakly) falling toward it
        std::size_t k = last;  // one past the last usable sample
        std::size_t samples = 0;
        while (k >= 2) {
            const double here = curve.levels[k - 2];
            const double next = curve.levels[k - 1];
            const double tol = grid.cell_width(std::max(here, next));
            if (here + tol < next) break;  // boundary rising toward the date
            --k;
            ++samples;
        }
        rep.monotone_samples = samples;
        if (samples >= 1) rep.monotone_window = curve.times[last - 1] - curve.times[k - 1];
        rep.monotone_ok = samples >= bp.min_monotone_samples;
    }

    return rep;
}

}  // namespace amdiv
