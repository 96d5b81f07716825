#pragma once

#include <cstddef>
#include <vector>

#include "amdiv/types.hpp"

namespace amdiv {

struct GridSpec {
    int nodes = 1200;          // total node budget (linear patch + log section)
    double zero_refine = 1.0;  // multiplier on the linear-patch density near 0
    double x_max_mult = 4.0;   // floor: x_max >= x_max_mult * max(K, S0)
    double quantile = 4.75;    // far-field reach in units of sigma*sqrt(T)
};

// Shared spatial grid: a linear patch on [0, K/100] (so the near-zero exercise
// boundary stays resolvable) glued to a log-uniform section on [K/100, x_max].
// x_max covers both the 4K floor and a lognormal far-field quantile so that the
// Dirichlet u(t, x_max) = 0 truncation is harmless.
class PriceGrid {
public:
    static PriceGrid make(const OptionSpec& spec, const MarketParams& params,
                          const GridSpec& gs = {});
    // Explicit node list (strictly increasing, first node 0); used by tests.
    static PriceGrid from_nodes(std::vector<double> nodes);

    std::size_t size() const { return nodes_.size(); }
    double operator[](std::size_t i) const { return nodes_[i]; }
    const std::vector<double>& nodes() const { return nodes_; }
    double x_max() const { return nodes_.back(); }

    // Largest i with nodes[i] <= x (x clamped to the grid range).
    std::size_t locate(double x) const;
    // Local spacing around level x: nodes[i+1] - nodes[i] for the cell containing x.
    double cell_width(double x) const;

private:
    std::vector<double> nodes_;
};

struct TimeGridSpec {
    double dt_fine = 5e-4;       // step size next to the segment end
    double dt_max = 5e-3;        // cap once coarsened
    double fine_fraction = 0.05; // fraction of the segment kept at dt_fine
    double growth = 1.06;        // geometric coarsening factor
    bool uniform = false;        // true: exactly uniform_steps equal steps
    int uniform_steps = 0;
};

// Ascending times t_lo = t[0] < ... < t[m] = t_hi. Graded grids are built
// backward from t_hi (where terminal data / dividend kinks live) and coarsen
// geometrically toward t_lo.
std::vector<double> make_time_grid(double t_lo, double t_hi, const TimeGridSpec& ts);

}  // namespace amdiv
