#include "amdiv/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amdiv {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw std::invalid_argument("MonotoneCubic: need >= 2 matching samples");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1]))
            throw std::invalid_argument("MonotoneCubic: abscissae must be increasing");

    // Fritsch–Carlson slopes: harmonic-mean average of adjacent secants, zeroed
    // at local extrema so the interpolant cannot overshoot the data.
    std::vector<double> h(n - 1), s(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        s[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (s[i - 1] * s[i] <= 0.0) {
            d_[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            d_[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
        }
    }
    // One-sided ends, clamped to keep the first/last pieces monotone.
    auto end_slope = [](double h0, double h1, double s0, double s1) {
        double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
        if (d * s0 <= 0.0) d = 0.0;
        else if (s0 * s1 <= 0.0 && std::abs(d) > 3.0 * std::abs(s0)) d = 3.0 * s0;
        return d;
    };
    if (n == 2) {
        d_[0] = d_[1] = s[0];
    } else {
        d_[0] = end_slope(h[0], h[1], s[0], s[1]);
        d_[n - 1] = end_slope(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
    }
}

std::size_t MonotoneCubic::interval(double x) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - x_.begin());
    if (i == 0) return 0;
    if (i >= x_.size()) return x_.size() - 2;
    return i - 1;
}

double MonotoneCubic::operator()(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const std::size_t i = interval(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double MonotoneCubic::derivative(double x) const {
    if (x <= x_.front()) return d_.front();
    if (x >= x_.back()) return d_.back();
    const std::size_t i = interval(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t;
    const double g00 = (6.0 * t2 - 6.0 * t) / h;
    const double g10 = 3.0 * t2 - 4.0 * t + 1.0;
    const double g01 = (-6.0 * t2 + 6.0 * t) / h;
    const double g11 = 3.0 * t2 - 2.0 * t;
    return g00 * y_[i] + g10 * d_[i] + g01 * y_[i + 1] + g11 * d_[i + 1];
}

double lerp_sorted(const std::vector<double>& x, const std::vector<double>& y, double xq) {
    if (x.empty() || x.size() != y.size())
        throw std::invalid_argument("lerp_sorted: mismatched samples");
    if (xq <= x.front()) return y.front();
    if (xq >= x.back()) return y.back();
    const auto it = std::upper_bound(x.begin(), x.end(), xq);
    const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    const double w = (xq - x[i]) / (x[i + 1] - x[i]);
    return (1.0 - w) * y[i] + w * y[i + 1];
}

}  // namespace amdiv
