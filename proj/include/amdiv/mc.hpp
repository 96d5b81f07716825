#pragma once

#include <cstdint>
#include <vector>

#include "amdiv/dividends.hpp"
#include "amdiv/types.hpp"

namespace amdiv {

struct McParams {
    std::size_t n_paths = 100000;
    int n_steps = 50;          // uniform steps over [t0, T]
    std::uint64_t seed = 1;
    int basis_degree = 3;      // monomials up to this degree, plus the payoff
};

// Simulated prices: paths[p * times.size() + k] is path p at times[k]. Prices
// at a dividend date are ex-dividend. Generation is keyed by (seed, path
// index): identical seeds give bit-identical matrices regardless of path
// ordering or blocking.
struct PathMatrix {
    std::vector<double> times;
    std::vector<double> values;
    std::size_t n_paths = 0;

    double at(std::size_t path, std::size_t k) const {
        return values[path * times.size() + k];
    }
};

// Smallest step count >= base_steps whose uniform grid over [t0, T] contains
// every dividend date in (t0, T). Throws DateNotOnStepGrid when no count up to
// 8 * base_steps aligns.
int steps_covering_dates(double t0, double maturity, const DividendSchedule& schedule,
                         int base_steps);

// Exact lognormal stepping between grid times; the dividend map x -> x - D(x)
// is applied at each dividend date, which must lie on the step grid
// (DateNotOnStepGrid otherwise).
PathMatrix simulate_paths(const OptionSpec& spec, const MarketParams& params,
                          const DividendSchedule& schedule, double x0, double t0,
                          const McParams& mc);

struct LsEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
};

// Longstaff–Schwartz lower-bound estimate of the American put value at (t0, x0):
// continuation values regressed on {1, S, ..., S^degree, payoff} over
// in-the-money paths at every step, exercise whenever the immediate payoff
// beats the fitted continuation. Throws RegressionSingular when an exercise
// date has too few usable in-the-money samples.
LsEstimate price_ls(const OptionSpec& spec, const MarketParams& params,
                    const DividendSchedule& schedule, double x0, double t0,
                    const McParams& mc);

}  // namespace amdiv
