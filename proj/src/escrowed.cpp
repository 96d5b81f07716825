#include "amdiv/escrowed.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "amdiv/errors.hpp"

namespace amdiv {

double no_exercise_window(double strike, double dividend, double rate) {
    if (!(strike > 0.0) || !(dividend > 0.0) || !(rate > 0.0)) {
        throw std::invalid_argument("no_exercise_window needs positive strike, dividend, rate");
    }
    return std::log((strike + dividend) / strike) / rate;
}

double EscrowedSolution::escrow_offset(double t) const {
    return dividend * std::exp(-rate * (date - t));
}

double EscrowedSolution::effective_strike(double t) const {
    return strike - escrow_offset(t);
}

double EscrowedSolution::value_at(double t, double x) const {
    if (t >= date) {
        return surface_value_at(base, t, x);
    }
    const double offset = escrow_offset(t);
    if (x < offset) {
        throw EscrowViolation("price " + std::to_string(x) + " cannot carry the escrow " +
                              std::to_string(offset) + " at t=" + std::to_string(t));
    }
    return surface_value_at(escrow, t, x - offset);
}

EscrowedSolution price_escrowed(const OptionSpec& spec, const MarketParams& params,
                                double dividend, double date, double t_lo,
                                const GridSpec& gs, const TimeGridSpec& ts,
                                const PdeParams& pde) {
    spec.validate();
    params.validate();
    if (!(dividend > 0.0)) {
        throw std::invalid_argument("escrowed dividend must be positive");
    }
    if (dividend >= spec.strike) {
        throw std::invalid_argument("escrowed dividend must stay below the strike");
    }
    if (!(t_lo >= 0.0 && t_lo < date && date < spec.maturity)) {
        throw std::invalid_argument("need t_lo < date < maturity");
    }

    EscrowedSolution sol;
    sol.strike = spec.strike;
    sol.rate = params.rate;
    sol.dividend = dividend;
    sol.date = date;
    sol.window = no_exercise_window(spec.strike, dividend, params.rate);

    const PriceGrid grid = PriceGrid::make(spec, params, gs);
    const double K = spec.strike;

    // Dividend-free American put after the date.
    SegmentProblem after;
    after.t_lo = date;
    after.t_hi = spec.maturity;
    after.terminal = [K](double x) { return std::max(K - x, 0.0); };
    after.obstacle = [K](double, double x) { return std::max(K - x, 0.0); };
    sol.base = solve_segment_pde(grid, make_time_grid(date, spec.maturity, ts), after,
                                 params, K, pde);
    sol.base.segment_index = 1;

    // Escrow segment: y is again geometric Brownian motion, the obstacle is the
    // time-dependent (K_eff(s) - y)^+, and at the date y equals the ex-dividend
    // price, so the terminal condition is the post-date surface at t = date.
    const ValueSurface& base = sol.base;
    MonotoneCubic at_date(base.grid.nodes(),
                          std::vector<double>(base.slice(0).begin(), base.slice(0).end()));
    const double r = params.rate;
    SegmentProblem before;
    before.t_lo = t_lo;
    before.t_hi = date;
    before.terminal = [at_date](double y) { return at_date(y); };
    before.obstacle = [K, dividend, r, date](double s, double y) {
        const double k_eff = K - dividend * std::exp(-r * (date - s));
        return std::max(k_eff - y, 0.0);
    };
    sol.escrow =
        solve_segment_pde(grid, make_time_grid(t_lo, date, ts), before, params, K, pde);
    sol.escrow.segment_index = 0;
    return sol;
}

BoundaryCurve escrowed_boundary(const EscrowedSolution& sol, const ExtractParams& ep) {
    const double K = sol.strike;
    const double D = sol.dividend;
    const double r = sol.rate;
    const double date = sol.date;
    auto obstacle = [K, D, r, date](double s, double y) {
        const double k_eff = K - D * std::exp(-r * (date - s));
        return std::max(k_eff - y, 0.0);
    };
    // The cap only needs to sit above every possible boundary; the effective
    // strike never exceeds K, and above it the value stays strictly positive
    // while the obstacle vanishes, so no false exercise flags appear up there.
    return extract_boundary_obstacle(sol.escrow, obstacle, K, ep);
}

}  // namespace amdiv
