#include "amdiv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amdiv {

PriceGrid PriceGrid::make(const OptionSpec& spec, const MarketParams& params,
                          const GridSpec& gs) {
    spec.validate();
    params.validate();
    if (gs.nodes < 32) throw std::invalid_argument("PriceGrid: need at least 32 nodes");
    if (!(gs.zero_refine >= 1.0))
        throw std::invalid_argument("PriceGrid: zero_refine must be >= 1");

    const double K = spec.strike;
    const double sig_t = params.volatility * std::sqrt(spec.maturity);
    const double drift_up = std::max(0.0, 0.5 * params.volatility * params.volatility -
                                              params.rate) *
                            spec.maturity;
    const double quantile_reach = K * std::exp(gs.quantile * sig_t + drift_up);
    const double x_max = std::max({gs.x_max_mult * K, gs.x_max_mult * spec.spot,
                                   quantile_reach});
    const double x_join = K / 100.0;  // linear patch ends, log section starts

    // Split the node budget: the linear patch gets ~one node per first log cell so
    // the spacing is continuous across the junction. zero_refine > 1 densifies the
    // patch further (extra nodes on top of the budget, the log section keeps its
    // resolution).
    const double log_span = std::log(x_max / x_join);
    const int n_lin_base =
        std::max(8, static_cast<int>(std::lround(gs.nodes / log_span)));
    const int n_log = std::max(16, gs.nodes - n_lin_base);
    const double delta = log_span / n_log;
    const int n_lin = std::max(8, static_cast<int>(std::lround(gs.zero_refine / delta)));

    std::vector<double> nodes;
    nodes.reserve(static_cast<std::size_t>(n_lin + n_log) + 2);
    for (int i = 0; i < n_lin; ++i)
        nodes.push_back(x_join * static_cast<double>(i) / n_lin);
    for (int i = 0; i <= n_log; ++i) nodes.push_back(x_join * std::exp(delta * i));
    nodes.back() = x_max;  // kill rounding drift at the far end

    return from_nodes(std::move(nodes));
}

PriceGrid PriceGrid::from_nodes(std::vector<double> nodes) {
    if (nodes.size() < 4) throw std::invalid_argument("PriceGrid: need at least 4 nodes");
    if (nodes.front() != 0.0)
        throw std::invalid_argument("PriceGrid: first node must be 0");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i] > nodes[i - 1]))
            throw std::invalid_argument("PriceGrid: nodes must be strictly increasing");
    PriceGrid g;
    g.nodes_ = std::move(nodes);
    return g;
}

std::size_t PriceGrid::locate(double x) const {
    if (x <= nodes_.front()) return 0;
    if (x >= nodes_.back()) return nodes_.size() - 1;
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

double PriceGrid::cell_width(double x) const {
    std::size_t i = locate(x);
    if (i + 1 >= nodes_.size()) i = nodes_.size() - 2;
    return nodes_[i + 1] - nodes_[i];
}

std::vector<double> make_time_grid(double t_lo, double t_hi, const TimeGridSpec& ts) {
    if (!(t_hi > t_lo)) throw std::invalid_argument("make_time_grid: need t_hi > t_lo");
    const double len = t_hi - t_lo;

    if (ts.uniform) {
        const int m = std::max(2, ts.uniform_steps);
        std::vector<double> t(static_cast<std::size_t>(m) + 1);
        for (int k = 0; k <= m; ++k) t[k] = t_lo + len * static_cast<double>(k) / m;
        t.front() = t_lo;
        t.back() = t_hi;
        return t;
    }

    if (!(ts.dt_fine > 0.0 && ts.dt_max >= ts.dt_fine && ts.growth > 1.0))
        throw std::invalid_argument("make_time_grid: bad grading parameters");

    // Walk backward from t_hi: dt_fine inside the fine window, then coarsen.
    const double fine_window = std::max(ts.fine_fraction * len, 4.0 * ts.dt_fine);
    std::vector<double> rev;
    rev.push_back(t_hi);
    double t = t_hi;
    double dt = ts.dt_fine;
    while (t > t_lo + 1e-14 * len) {
        if (t_hi - t >= fine_window) dt = std::min(dt * ts.growth, ts.dt_max);
        t -= dt;
        if (t < t_lo + 0.25 * dt) t = t_lo;  // absorb a sliver step into the last one
        rev.push_back(t);
    }
    if (rev.size() < 3) {  // segment shorter than a couple of fine steps
        rev = {t_hi, t_lo + 0.5 * len, t_lo};
    }
    std::vector<double> out(rev.rbegin(), rev.rend());
    out.front() = t_lo;
    out.back() = t_hi;
    return out;
}

}  // namespace amdiv
