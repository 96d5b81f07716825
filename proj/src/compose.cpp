#include "amdiv/compose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace amdiv {

SliceDerivatives perpetual_slice(double strike, const MarketParams& params) {
    auto put = std::make_shared<PerpetualPut>(strike, params);
    SliceDerivatives out;
    out.value = [put](double x) { return put->value(x); };
    out.slope = [put](double x) { return put->derivative(x); };
    out.curvature = [put](double x) { return put->second_derivative(x); };
    out.exercise_level = put->boundary();
    return out;
}

SliceDerivatives slice_derivatives(const ValueSurface& surface, std::size_t slice_index,
                                   double boundary_level) {
    const auto& x = surface.grid.nodes();
    const auto u = surface.slice(slice_index);
    const std::size_t n = x.size();
    if (n < 5) throw std::invalid_argument("slice_derivatives: grid too small");

    auto d1 = std::make_shared<std::vector<double>>(n, 0.0);
    auto d2 = std::make_shared<std::vector<double>>(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = x[i] - x[i - 1], hr = x[i + 1] - x[i];
        (*d1)[i] = (-hr / hl * u[i - 1] + (hr / hl - hl / hr) * u[i] + hl / hr * u[i + 1]) /
                   (hl + hr);
        (*d2)[i] = 2.0 * (u[i - 1] / (hl * (hl + hr)) - u[i] / (hl * hr) +
                          u[i + 1] / (hr * (hl + hr)));
    }
    (*d1)[0] = (*d1)[1];
    (*d1)[n - 1] = (*d1)[n - 2];
    (*d2)[0] = (*d2)[1];
    (*d2)[n - 1] = (*d2)[n - 2];

    // Contact-point convention: curvature is 0 at the boundary itself, so zero
    // the node nearest to it (the raw difference there aliases the payoff kink).
    if (boundary_level > 0.0) {
        const std::size_t j = surface.grid.locate(boundary_level);
        const std::size_t jn = std::min(j + 1, n - 1);
        const std::size_t straddle =
            (boundary_level - x[j] <= x[jn] - boundary_level) ? j : jn;
        (*d2)[straddle] = 0.0;
    }

    auto xs = std::make_shared<std::vector<double>>(x);
    auto us = std::make_shared<std::vector<double>>(u.begin(), u.end());

    SliceDerivatives out;
    out.value = [xs, us](double q) { return lerp_sorted(*xs, *us, q); };
    out.slope = [xs, d1](double q) { return lerp_sorted(*xs, *d1, q); };
    out.curvature = [xs, d2](double q) { return lerp_sorted(*xs, *d2, q); };
    out.exercise_level = boundary_level;
    return out;
}

ComposedPayoff::ComposedPayoff(const ValueSurface& base, std::size_t slice_index,
                               DividendFunction df, double strike, double boundary_level)
    : df_(std::move(df)), strike_(strike), boundary_(boundary_level) {
    const auto u = base.slice(slice_index);
    interp_ = MonotoneCubic(base.grid.nodes(),
                            std::vector<double>(u.begin(), u.end()));
}

double ComposedPayoff::operator()(double x) const {
    const double y = x - df_(x);  // ex-dividend price, >= 0 by the axioms
    if (y <= boundary_) return strike_ - y;  // base slice is exactly K - y there
    return interp_(y);
}

double x_star(const DividendFunction& df, double boundary_level) {
    if (!(boundary_level > 0.0))
        throw std::invalid_argument("x_star: boundary level must be > 0");
    if (df.family() == DividendFamily::identity)
        return std::numeric_limits<double>::infinity();

    // x - D(x) is non-decreasing and unbounded for non-identity families;
    // find the first point where it reaches boundary_level.
    auto keep = [&](double x) { return x - df(x); };
    double hi = std::max(boundary_level, 1.0);
    int guard = 0;
    while (keep(hi) < boundary_level) {
        hi *= 2.0;
        if (++guard > 200)
            return std::numeric_limits<double>::infinity();  // D behaves like identity
    }
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (keep(mid) < boundary_level) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::function<double(double)> make_gamma(const DividendFunction& df,
                                         const SliceDerivatives& base,
                                         const MarketParams& params) {
    params.validate();
    const double r = params.rate;
    const double half_sig2 = 0.5 * params.volatility * params.volatility;
    return [df, base, r, half_sig2](double x) {
        const double y = x - df(x);
        const double keep_slope = 1.0 - df.left_derivative(x);
        return half_sig2 * x * x * keep_slope * keep_slope * base.curvature(y) +
               r * x * keep_slope * base.slope(y) - r * base.value(y);
    };
}

GammaScan scan_gamma(const std::function<double(double)>& gamma, double x_lo, double x_hi,
                     int n) {
    if (!(x_lo > 0.0 && x_hi > x_lo) || n < 2)
        throw std::invalid_argument("scan_gamma: need 0 < x_lo < x_hi and n >= 2");
    GammaScan out;
    out.inf_value = std::numeric_limits<double>::infinity();
    out.sup_value = -std::numeric_limits<double>::infinity();
    const double step = std::log(x_hi / x_lo) / (n - 1);
    for (int i = 0; i < n; ++i) {
        const double g = gamma(x_lo * std::exp(step * i));
        out.inf_value = std::min(out.inf_value, g);
        out.sup_value = std::max(out.sup_value, g);
        out.sup_positive = std::max(out.sup_positive, g);
    }
    out.sup_positive = std::max(out.sup_positive, 0.0);
    return out;
}

}  // namespace amdiv
