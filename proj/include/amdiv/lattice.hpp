#pragma once

#include <functional>

#include "amdiv/dividends.hpp"
#include "amdiv/grid.hpp"
#include "amdiv/pde.hpp"
#include "amdiv/surface.hpp"
#include "amdiv/types.hpp"

namespace amdiv {

struct TreeParams {
    int steps_per_segment = 2000;
    double x_low_frac = 1e-4;  // lattice floor at x_low_frac * strike
    int slice_stride = 1;      // store every stride-th layer on the shared grid
};

// Binomial-tree segment solve. The recombining tree with CRR factors
// u = exp(sigma sqrt(dt)), d = 1/u lives on a fixed log-spaced ladder of
// prices, so a single backward induction over that ladder prices the tree
// rooted at every ladder node at once (identical arithmetic away from the
// ladder edges, which sit deep in the exercise / worthless regions). Layers
// are resampled onto the shared grid by linear interpolation, which preserves
// the monotonicity/Lipschitz/convexity shape of the tree values.
// Throws DegenerateStep when e^{r dt} falls outside (d, u).
ValueSurface solve_segment_tree(const PriceGrid& grid, double t_lo, double t_hi,
                                const std::function<double(double)>& terminal,
                                const OptionSpec& spec, const MarketParams& params,
                                const TreeParams& tp = {});

// Backward induction over dividend segments, composing each earlier segment's
// terminal condition from the later one exactly as the PDE engine does.
MultiSegmentSolution price_american_tree(const OptionSpec& spec, const MarketParams& params,
                                         const DividendSchedule& schedule,
                                         const PriceGrid& grid, const TreeParams& tp = {});

}  // namespace amdiv
