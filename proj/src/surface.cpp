#include "amdiv/surface.hpp"

#include <algorithm>
#include <cmath>

#include "amdiv/interp.hpp"

namespace amdiv {

std::size_t ValueSurface::nearest_time(double t) const {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 0;
    if (it == times.end()) return times.size() - 1;
    const std::size_t hi = static_cast<std::size_t>(it - times.begin());
    return (t - times[hi - 1] <= times[hi] - t) ? hi - 1 : hi;
}

double masked_exercise_level(const ValueSurface& surface, std::size_t slice_index,
                             double cap) {
    const auto mk = surface.mask(slice_index);
    const auto& x = surface.grid.nodes();
    double level = 0.0;
    for (std::size_t i = 1; i < x.size() && x[i] < cap; ++i) {
        if (mk[i]) level = x[i];
        else break;
    }
    return level;
}

SurfaceShapeReport measure_shape(const ValueSurface& surface, double strike) {
    SurfaceShapeReport rep;
    const auto& x = surface.grid.nodes();
    const std::size_t n = x.size();
    for (std::size_t k = 0; k < surface.n_times(); ++k) {
        const auto u = surface.slice(k);
        for (std::size_t i = 0; i < n; ++i) {
            const double payoff = std::max(strike - x[i], 0.0);
            rep.below_payoff = std::max(rep.below_payoff, payoff - u[i]);
            rep.above_strike = std::max(rep.above_strike, u[i] - strike);
            if (i + 1 < n) {
                rep.monotone = std::max(rep.monotone, u[i + 1] - u[i]);
                rep.lipschitz =
                    std::max(rep.lipschitz, u[i] - u[i + 1] - (x[i + 1] - x[i]));
            }
            if (i > 0 && i + 1 < n) {
                const double hl = x[i] - x[i - 1], hr = x[i + 1] - x[i];
                const double chord = (hr * u[i - 1] + hl * u[i + 1]) / (hl + hr);
                rep.convexity = std::max(rep.convexity, u[i] - chord);
            }
        }
    }
    return rep;
}

double surface_value_at(const ValueSurface& surface, double t, double x) {
    const auto& times = surface.times;
    const double tc = std::clamp(t, surface.t_lo, surface.t_hi);
    const auto it = std::upper_bound(times.begin(), times.end(), tc);
    const std::size_t k1 = std::min<std::size_t>(
        std::max<std::ptrdiff_t>(1, it - times.begin()), times.size() - 1);
    const std::size_t k0 = k1 - 1;
    const double wgt =
        (times[k1] > times[k0]) ? (tc - times[k0]) / (times[k1] - times[k0]) : 0.0;

    auto eval = [&](std::size_t k) {
        const auto u = surface.slice(k);
        MonotoneCubic f(surface.grid.nodes(), std::vector<double>(u.begin(), u.end()));
        return f(x);
    };
    const double v0 = eval(k0);
    return wgt == 0.0 ? v0 : (1.0 - wgt) * v0 + wgt * eval(k1);
}

}  // namespace amdiv
