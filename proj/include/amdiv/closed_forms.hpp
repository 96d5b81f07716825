#pragma once

#include "amdiv/types.hpp"

namespace amdiv {

// Standard normal CDF, accurate to ~1e-15 (complementary error function).
double std_normal_cdf(double y);

// Density at y of S_t started at x under dS = sigma S dW + r S dt (lognormal);
// zero for y <= 0.
double lognormal_density(double t, double y, double x, const MarketParams& params);

// Black–Scholes European put value at time-to-maturity tau.
double european_put(double x, double strike, double tau, const MarketParams& params);

// Perpetual American put: closed-form value and constant exercise boundary.
class PerpetualPut {
public:
    PerpetualPut(double strike, const MarketParams& params);

    double boundary() const { return boundary_; }   // 2rK / (sigma^2 + 2r)
    double value(double x) const;                   // K - x below, power tail above
    double derivative(double x) const;              // C^1 across the boundary
    double second_derivative(double x) const;       // 0 below, alpha-power tail above

private:
    double strike_, alpha_, boundary_, tail_coeff_;
};

}  // namespace amdiv
