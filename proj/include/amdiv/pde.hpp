#pragma once

#include <functional>
#include <vector>

#include "amdiv/compose.hpp"
#include "amdiv/dividends.hpp"
#include "amdiv/grid.hpp"
#include "amdiv/surface.hpp"
#include "amdiv/types.hpp"

namespace amdiv {

enum class Scheme { implicit_euler, crank_nicolson };

struct PdeParams {
    Scheme scheme = Scheme::crank_nicolson;
    double psor_omega = 1.2;      // SOR relaxation
    double psor_tol_frac = 1e-9;  // convergence tolerance as a fraction of strike
    int psor_max_iter = 10000;
    int rannacher_halves = 2;     // implicit half-steps opening each segment
};

// One dividend-free backward problem on [t_lo, t_hi].
struct SegmentProblem {
    double t_lo = 0.0, t_hi = 0.0;
    std::function<double(double)> terminal;            // value at t_hi
    // Early-exercise payoff (t, x) -> psi; leave empty for a European solve.
    std::function<double(double, double)> obstacle;
};

// Theta-scheme in time (Crank–Nicolson by default, opened with implicit
// half-steps so payoff kinks cannot ring), projected SOR for the obstacle.
// Boundary rows: at x=0 the generator degenerates to the pure discounting ODE;
// at x_max the value is pinned to 0 (grid reaches far enough for that).
ValueSurface solve_segment_pde(const PriceGrid& grid, const std::vector<double>& times,
                               const SegmentProblem& problem, const MarketParams& params,
                               double scale, const PdeParams& pde = {});

// Backward induction over dividend segments: the last segment gets the put
// payoff, each earlier segment the composed terminal g(x) = u_next(x - D(x)).
struct MultiSegmentSolution {
    std::vector<ValueSurface> segments;  // chronological, segment_index set
    std::vector<double> dividend_dates;  // ascending

    // Value at (t, x): linear in t between stored slices, monotone cubic in x.
    double value_at(double t, double x) const;
    const ValueSurface& segment_containing(double t) const;
};

MultiSegmentSolution price_american_pde(const OptionSpec& spec, const MarketParams& params,
                                        const DividendSchedule& schedule,
                                        const PriceGrid& grid, const TimeGridSpec& ts,
                                        const PdeParams& pde = {});

// Discrete residual |u_t + A u| of a solved surface, measured with central
// differences and restricted to continuation nodes at least `node_buffer` nodes
// and `x_buffer` currency away from the exercise-mask transition. Slices closer
// than `t_buffer` to the terminal time are skipped (start-up transient).
struct ResidualReport {
    double sup_continuation = 0.0;
    std::size_t nodes_included = 0;
};

ResidualReport pde_residual(const ValueSurface& surface, const MarketParams& params,
                            int node_buffer = 3, double x_buffer = 0.0,
                            double t_buffer = 0.0);

// A f = (sigma^2 x^2 / 2) f'' + r x f' - r f applied to a sampled slice
// (central differences; endpoints copied from neighbours).
std::vector<double> apply_generator(const PriceGrid& grid, const MarketParams& params,
                                    const std::vector<double>& values);

}  // namespace amdiv
