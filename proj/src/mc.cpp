#include "amdiv/mc.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "amdiv/errors.hpp"

namespace amdiv {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Per-path normal generator: a dedicated engine seeded from (seed, path) so
// the stream is independent of how paths are ordered or batched.
class NormalStream {
  public:
    NormalStream(std::uint64_t seed, std::uint64_t path)
        : engine_(splitmix64(seed ^ splitmix64(path))) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        spare_ = radius * std::sin(kTwoPi * u2);
        have_spare_ = true;
        return radius * std::cos(kTwoPi * u2);
    }

  private:
    double uniform01() {
        // 53-bit mantissa, shifted off zero so log() stays finite.
        const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

std::vector<int> dividend_step_indices(const DividendSchedule& schedule, double t0,
                                       double maturity, const std::vector<double>& times) {
    std::vector<int> steps(schedule.size(), -1);
    const double dt = times.size() > 1 ? times[1] - times[0] : maturity - t0;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const double date = schedule.events[i].date;
        if (date <= t0 || date >= maturity) {
            continue;  // outside the simulated window, nothing to apply
        }
        const double offset = (date - t0) / dt;
        const int nearest = static_cast<int>(std::lround(offset));
        if (std::abs(offset - nearest) > 1e-9 * static_cast<double>(times.size())) {
            throw DateNotOnStepGrid("dividend date " + std::to_string(date) +
                                    " does not lie on the simulation step grid");
        }
        steps[i] = nearest;
    }
    return steps;
}

}  // namespace

int steps_covering_dates(double t0, double maturity, const DividendSchedule& schedule,
                         int base_steps) {
    if (base_steps < 1) {
        throw std::invalid_argument("step count must be positive");
    }
    const double span = maturity - t0;
    for (int n = base_steps; n <= 8 * base_steps; ++n) {
        bool ok = true;
        for (const auto& ev : schedule.events) {
            if (ev.date <= t0 || ev.date >= maturity) continue;
            const double offset = (ev.date - t0) / (span / n);
            if (std::abs(offset - std::lround(offset)) > 1e-9 * (n + 1.0)) {
                ok = false;
                break;
            }
        }
        if (ok) return n;
    }
    throw DateNotOnStepGrid("no uniform step count up to 8x base aligns every dividend date");
}

PathMatrix simulate_paths(const OptionSpec& spec, const MarketParams& params,
                          const DividendSchedule& schedule, double x0, double t0,
                          const McParams& mc) {
    spec.validate();
    params.validate();
    if (!(x0 > 0.0)) {
        throw std::invalid_argument("simulation must start from a positive price");
    }
    if (!(t0 >= 0.0 && t0 < spec.maturity)) {
        throw std::invalid_argument("simulation start must lie in [0, maturity)");
    }
    if (mc.n_paths == 0 || mc.n_steps < 1) {
        throw std::invalid_argument("need at least one path and one step");
    }

    const int m = mc.n_steps;
    const double dt = (spec.maturity - t0) / m;
    PathMatrix out;
    out.n_paths = mc.n_paths;
    out.times.resize(m + 1);
    for (int k = 0; k <= m; ++k) {
        out.times[k] = (k == m) ? spec.maturity : t0 + dt * k;
    }
    const std::vector<int> div_steps =
        dividend_step_indices(schedule, t0, spec.maturity, out.times);

    const double drift = (params.rate - 0.5 * params.volatility * params.volatility) * dt;
    const double vol_step = params.volatility * std::sqrt(dt);

    out.values.assign(mc.n_paths * (m + 1), 0.0);
    for (std::size_t p = 0; p < mc.n_paths; ++p) {
        NormalStream normals(mc.seed, p);
        double* row = out.values.data() + p * (m + 1);
        double x = x0;
        row[0] = x;
        for (int k = 1; k <= m; ++k) {
            x *= std::exp(drift + vol_step * normals.next());
            for (std::size_t i = 0; i < schedule.size(); ++i) {
                if (div_steps[i] == k) {
                    x -= schedule.events[i].function(x);
                }
            }
            row[k] = x;
        }
    }
    return out;
}

LsEstimate price_ls(const OptionSpec& spec, const MarketParams& params,
                    const DividendSchedule& schedule, double x0, double t0,
                    const McParams& mc) {
    if (mc.basis_degree < 1) {
        throw std::invalid_argument("regression basis needs degree >= 1");
    }
    const PathMatrix paths = simulate_paths(spec, params, schedule, x0, t0, mc);
    const int m = mc.n_steps;
    const double dt = (spec.maturity - t0) / m;
    const double strike = spec.strike;
    const auto payoff = [strike](double x) { return std::max(strike - x, 0.0); };

    // cashflow[p] realised at step index tau[p]; start from exercise at maturity.
    std::vector<double> cashflow(paths.n_paths);
    std::vector<int> tau(paths.n_paths, m);
    for (std::size_t p = 0; p < paths.n_paths; ++p) {
        cashflow[p] = payoff(paths.at(p, m));
    }

    const int n_cols = mc.basis_degree + 2;  // monomials + payoff column
    std::vector<std::size_t> itm;
    itm.reserve(paths.n_paths);

    for (int k = m - 1; k >= 1; --k) {
        itm.clear();
        for (std::size_t p = 0; p < paths.n_paths; ++p) {
            if (payoff(paths.at(p, k)) > 0.0) {
                itm.push_back(p);
            }
        }
        if (itm.size() < static_cast<std::size_t>(2 * n_cols)) {
            continue;  // too few in-the-money paths to fit; keep continuing
        }

        Eigen::MatrixXd design(itm.size(), n_cols);
        Eigen::VectorXd target(itm.size());
        for (std::size_t row = 0; row < itm.size(); ++row) {
            const std::size_t p = itm[row];
            const double s = paths.at(p, k) / strike;  // scale for conditioning
            double mono = 1.0;
            for (int c = 0; c <= mc.basis_degree; ++c) {
                design(row, c) = mono;
                mono *= s;
            }
            design(row, n_cols - 1) = payoff(paths.at(p, k)) / strike;
            target(row) = std::exp(-params.rate * dt * (tau[p] - k)) * cashflow[p];
        }

        // The payoff column coincides with an affine combination of the
        // monomials on the in-the-money set, so the design is rank-deficient
        // by construction; a rank-revealing solve still yields the projection.
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
        if (qr.rank() == 0) {
            throw RegressionSingular("regression design has rank zero at step " +
                                     std::to_string(k));
        }
        Eigen::VectorXd coef = qr.solve(target);
        if (!coef.allFinite()) {
            throw RegressionSingular("regression produced non-finite coefficients at step " +
                                     std::to_string(k));
        }

        for (std::size_t row = 0; row < itm.size(); ++row) {
            const std::size_t p = itm[row];
            const double immediate = payoff(paths.at(p, k));
            double fitted = coef(n_cols - 1) * (immediate / strike);
            const double s = paths.at(p, k) / strike;
            double mono = 1.0;
            for (int c = 0; c <= mc.basis_degree; ++c) {
                fitted += coef(c) * mono;
                mono *= s;
            }
            if (immediate >= fitted) {
                cashflow[p] = immediate;
                tau[p] = k;
            }
        }
    }

    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t p = 0; p < paths.n_paths; ++p) {
        const double discounted = std::exp(-params.rate * dt * tau[p]) * cashflow[p];
        sum += discounted;
        sum_sq += discounted * discounted;
    }
    const double n = static_cast<double>(paths.n_paths);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));

    LsEstimate est;
    est.n_paths = paths.n_paths;
    est.std_error = std::sqrt(var / n);
    est.value = std::max(payoff(x0), mean);
    return est;
}

}  // namespace amdiv
