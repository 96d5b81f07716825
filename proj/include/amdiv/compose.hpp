#pragma once

#include <functional>
#include <vector>

#include "amdiv/closed_forms.hpp"
#include "amdiv/dividends.hpp"
#include "amdiv/interp.hpp"
#include "amdiv/surface.hpp"
#include "amdiv/types.hpp"

namespace amdiv {

// A value slice u_bar(t_d, .) together with the derivatives the post-dividend
// analysis needs. `exercise_level` is the boundary c_bar(t_d) of that slice;
// below it the slice is exactly K - x (so slope -1, curvature 0).
struct SliceDerivatives {
    std::function<double(double)> value;
    std::function<double(double)> slope;
    std::function<double(double)> curvature;
    double exercise_level = 0.0;
};

// Closed-form slice of the perpetual put (useful as an analytically known base).
SliceDerivatives perpetual_slice(double strike, const MarketParams& params);

// Finite-difference derivatives of a stored slice (central differences on the
// non-uniform grid). The curvature at the node straddling `boundary_level` is
// set to 0: the obstacle kills the second derivative at the contact point and
// the raw difference there would alias the kink.
SliceDerivatives slice_derivatives(const ValueSurface& surface, std::size_t slice_index,
                                   double boundary_level);

// Terminal condition of the next-earlier segment: g(x) = base(x - D(x)).
// Below the boundary (x - D(x) <= c_bar) this is exactly K - x + D(x); above,
// the sampled slice is evaluated through a monotone cubic interpolant.
class ComposedPayoff {
public:
    ComposedPayoff(const ValueSurface& base, std::size_t slice_index, DividendFunction df,
                   double strike, double boundary_level);

    double operator()(double x) const;
    double boundary_level() const { return boundary_; }
    const DividendFunction& dividend() const { return df_; }

private:
    DividendFunction df_;
    double strike_;
    double boundary_;
    MonotoneCubic interp_;
};

// Largest pre-dividend price whose ex-dividend image stays inside the exercise
// region: x* = sup { x : x - D(x) < c_bar } (infinite iff D is the identity).
// Bisection on the non-decreasing map x -> x - D(x).
double x_star(const DividendFunction& df, double boundary_level);

// Instantaneous drift picked up by the pre-dividend value at the dividend date:
//   gamma(x) = (sigma^2 x^2 / 2)(1 - D'(x))^2 ubar_xx(x - D(x))
//            + r x (1 - D'(x)) ubar_x(x - D(x)) - r ubar(x - D(x)).
std::function<double(double)> make_gamma(const DividendFunction& df,
                                         const SliceDerivatives& base,
                                         const MarketParams& params);

struct GammaScan {
    double sup_positive = 0.0;  // sup gamma^+ over the scan
    double inf_value = 0.0;
    double sup_value = 0.0;
};

GammaScan scan_gamma(const std::function<double(double)>& gamma, double x_lo, double x_hi,
                     int n);

}  // namespace amdiv
