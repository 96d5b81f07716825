#include "amdiv/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "amdiv/errors.hpp"
#include "amdiv/interp.hpp"

namespace amdiv {

ValueSurface solve_segment_tree(const PriceGrid& grid, double t_lo, double t_hi,
                                const std::function<double(double)>& terminal,
                                const OptionSpec& spec, const MarketParams& params,
                                const TreeParams& tp) {
    spec.validate();
    params.validate();
    if (!(t_hi > t_lo)) throw std::invalid_argument("solve_segment_tree: need t_hi > t_lo");
    if (!terminal) throw std::invalid_argument("solve_segment_tree: missing terminal");
    if (tp.steps_per_segment < 2 || tp.slice_stride < 1)
        throw std::invalid_argument("solve_segment_tree: bad tree parameters");

    const double K = spec.strike;
    const int steps = tp.steps_per_segment;
    const double dt = (t_hi - t_lo) / steps;
    const double sig_dt = params.volatility * std::sqrt(dt);
    const double up = std::exp(sig_dt);
    const double down = 1.0 / up;
    const double growth = std::exp(params.rate * dt);
    if (!(growth > down && growth < up))
        throw DegenerateStep("solve_segment_tree: e^{r dt} outside (d, u)");
    const double p = (growth - down) / (up - down);
    const double disc = std::exp(-params.rate * dt);

    // price ladder shared by all layers (CRR children move exactly one rung)
    const double x_low = tp.x_low_frac * K;
    const int rungs =
        static_cast<int>(std::ceil(std::log(grid.x_max() / x_low) / sig_dt)) + 1;
    std::vector<double> ladder(static_cast<std::size_t>(rungs) + 1);
    for (int j = 0; j <= rungs; ++j) ladder[j] = x_low * std::exp(sig_dt * j);

    auto payoff = [K](double x) { return std::max(K - x, 0.0); };

    ValueSurface surf;
    surf.grid = grid;
    surf.t_lo = t_lo;
    surf.t_hi = t_hi;
    surf.obstacle_tol = std::max(1e-7 * K, 1e-12);

    // stored layer indices (stride pattern, always including both ends)
    std::vector<int> kept;
    for (int k = 0; k <= steps; k += tp.slice_stride) kept.push_back(k);
    if (kept.back() != steps) kept.push_back(steps);
    surf.times.resize(kept.size());
    for (std::size_t q = 0; q < kept.size(); ++q)
        surf.times[q] = (kept[q] == steps) ? t_hi : t_lo + dt * kept[q];
    surf.times.front() = t_lo;
    const std::size_t n = grid.size();
    surf.values.assign(kept.size() * n, 0.0);
    surf.exercise.assign(kept.size() * n, 0);

    auto store = [&](int layer, const std::vector<double>& v) {
        const auto it = std::lower_bound(kept.begin(), kept.end(), layer);
        if (it == kept.end() || *it != layer) return;
        const std::size_t q = static_cast<std::size_t>(it - kept.begin());
        auto* row = surf.values.data() + q * n;
        auto* mk = surf.exercise.data() + q * n;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = grid[i];
            double u;
            if (x <= ladder.front()) u = K - x;  // below the ladder floor: deep ITM
            else u = lerp_sorted(ladder, v, x);
            row[i] = u;
            mk[i] = (u - payoff(x) <= surf.obstacle_tol) ? 1 : 0;
        }
        row[n - 1] = 0.0;
    };

    // terminal layer
    std::vector<double> v(ladder.size()), w(ladder.size());
    for (std::size_t j = 0; j < ladder.size(); ++j)
        v[j] = std::max(terminal(ladder[j]), payoff(ladder[j]));
    store(steps, v);

    // backward induction with early exercise at every node
    for (int k = steps - 1; k >= 0; --k) {
        for (std::size_t j = 1; j + 1 < ladder.size(); ++j) {
            const double cont = disc * (p * v[j + 1] + (1.0 - p) * v[j - 1]);
            w[j] = std::max(payoff(ladder[j]), cont);
        }
        w.front() = K - ladder.front();  // deep in the exercise region
        w.back() = 0.0;                  // far out of the money
        v.swap(w);
        store(k, v);
    }
    return surf;
}

MultiSegmentSolution price_american_tree(const OptionSpec& spec, const MarketParams& params,
                                         const DividendSchedule& schedule,
                                         const PriceGrid& grid, const TreeParams& tp) {
    spec.validate();
    params.validate();
    const auto check = validate_schedule(schedule, spec, 2048);
    if (!check.ok)
        throw std::invalid_argument("price_american_tree: invalid schedule: " +
                                    check.violations.front().message);

    const double K = spec.strike;
    std::vector<double> edges{0.0};
    for (const auto& ev : schedule.events) edges.push_back(ev.date);
    edges.push_back(spec.maturity);

    MultiSegmentSolution out;
    for (const auto& ev : schedule.events) out.dividend_dates.push_back(ev.date);
    out.segments.resize(edges.size() - 1);

    for (std::size_t seg = edges.size() - 1; seg-- > 0;) {
        std::function<double(double)> terminal;
        if (seg + 1 == edges.size() - 1) {
            terminal = [K](double x) { return std::max(K - x, 0.0); };
        } else {
            const ValueSurface& next = out.segments[seg + 1];
            const double level = masked_exercise_level(next, 0, K);
            terminal = ComposedPayoff(next, 0, schedule.events[seg].function, K, level);
        }
        out.segments[seg] =
            solve_segment_tree(grid, edges[seg], edges[seg + 1], terminal, spec, params, tp);
        out.segments[seg].segment_index = static_cast<int>(seg);
    }
    return out;
}

}  // namespace amdiv
