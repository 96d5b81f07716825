#include "amdiv/closed_forms.hpp"

#include <cmath>
#include <stdexcept>

namespace amdiv {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt2Pi = 2.5066282746310002;
}  // namespace

double std_normal_cdf(double y) { return 0.5 * std::erfc(-y / kSqrt2); }

double lognormal_density(double t, double y, double x, const MarketParams& params) {
    params.validate();
    if (!(t > 0.0) || !(x > 0.0))
        throw std::invalid_argument("lognormal_density: need t > 0 and x > 0");
    if (y <= 0.0) return 0.0;
    const double sig = params.volatility;
    const double m = std::log(y / x) - (params.rate - 0.5 * sig * sig) * t;
    const double v = sig * sig * t;
    return std::exp(-m * m / (2.0 * v)) / (y * sig * std::sqrt(t) * kSqrt2Pi);
}

double european_put(double x, double strike, double tau, const MarketParams& params) {
    params.validate();
    if (!(strike > 0.0) || tau < 0.0 || x < 0.0)
        throw std::invalid_argument("european_put: bad arguments");
    if (tau == 0.0 || x == 0.0) {
        const double intrinsic = (strike * std::exp(-params.rate * tau) - x);
        return intrinsic > 0.0 ? intrinsic : 0.0;
    }
    const double sig = params.volatility;
    const double st = sig * std::sqrt(tau);
    const double d1 = (std::log(x / strike) + (params.rate + 0.5 * sig * sig) * tau) / st;
    const double d2 = d1 - st;
    return strike * std::exp(-params.rate * tau) * std_normal_cdf(-d2) -
           x * std_normal_cdf(-d1);
}

PerpetualPut::PerpetualPut(double strike, const MarketParams& params) : strike_(strike) {
    params.validate();
    if (!(strike > 0.0)) throw std::invalid_argument("PerpetualPut: strike must be > 0");
    const double sig2 = params.volatility * params.volatility;
    alpha_ = -2.0 * params.rate / sig2;                  // negative power of the tail
    boundary_ = -strike * alpha_ / (1.0 - alpha_);       // = 2rK / (sigma^2 + 2r)
    tail_coeff_ = strike_ - boundary_;                   // value at the boundary
}

double PerpetualPut::value(double x) const {
    if (x < 0.0) throw std::invalid_argument("PerpetualPut: price must be >= 0");
    if (x <= boundary_) return strike_ - x;
    return tail_coeff_ * std::pow(x / boundary_, alpha_);
}

double PerpetualPut::derivative(double x) const {
    if (x < 0.0) throw std::invalid_argument("PerpetualPut: price must be >= 0");
    if (x <= boundary_) return -1.0;
    return tail_coeff_ * alpha_ * std::pow(x / boundary_, alpha_ - 1.0) / boundary_;
}

double PerpetualPut::second_derivative(double x) const {
    if (x < 0.0) throw std::invalid_argument("PerpetualPut: price must be >= 0");
    if (x <= boundary_) return 0.0;
    return tail_coeff_ * alpha_ * (alpha_ - 1.0) *
           std::pow(x / boundary_, alpha_ - 2.0) / (boundary_ * boundary_);
}

}  // namespace amdiv
