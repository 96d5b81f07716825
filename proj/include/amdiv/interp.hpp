#pragma once

#include <cstddef>
#include <vector>

namespace amdiv {

// Shape-preserving piecewise-cubic interpolation (Fritsch–Carlson / PCHIP).
// Monotone data produce a monotone interpolant; evaluation outside the abscissa
// range extends flat. Used wherever a sampled value slice has to become a
// function again without manufacturing over/undershoots.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    double derivative(double x) const;
    bool empty() const { return x_.empty(); }

private:
    std::size_t interval(double x) const;

    std::vector<double> x_, y_, d_;  // abscissae, values, node slopes
};

// Plain piecewise-linear interpolation with flat extension. Preserves convexity
// of the sampled data as well, which PCHIP does not guarantee.
double lerp_sorted(const std::vector<double>& x, const std::vector<double>& y, double xq);

}  // namespace amdiv
