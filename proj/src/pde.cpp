#include "amdiv/pde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "amdiv/errors.hpp"

namespace amdiv {

namespace {

// Tridiagonal representation of the generator A on the (non-uniform) grid.
struct OperatorRows {
    std::vector<double> lo, di, up;  // A u_i = lo*u_{i-1} + di*u_i + up*u_{i+1}
};

OperatorRows build_operator(const PriceGrid& grid, const MarketParams& params) {
    const auto& x = grid.nodes();
    const std::size_t n = x.size();
    OperatorRows L{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                   std::vector<double>(n, 0.0)};
    const double r = params.rate;
    const double half_sig2 = 0.5 * params.volatility * params.volatility;

    L.di[0] = -r;  // x = 0: diffusion and drift vanish, pure discounting
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = x[i] - x[i - 1], hr = x[i + 1] - x[i];
        const double a = half_sig2 * x[i] * x[i];
        const double d = r * x[i];
        double lo = (2.0 * a - d * hr) / (hl * (hl + hr));
        double up = (2.0 * a + d * hl) / (hr * (hl + hr));
        double di = -(lo + up) - r;
        if (lo < 0.0) {
            // drift-dominated cell: fall back to forward differencing of the
            // first-derivative term to keep off-diagonals non-negative
            lo = 2.0 * a / (hl * (hl + hr));
            up = 2.0 * a / (hr * (hl + hr)) + d / hr;
            di = -(lo + up) - r;
        }
        L.lo[i] = lo;
        L.di[i] = di;
        L.up[i] = up;
    }
    // top row pinned to the far-field value elsewhere; leave zeros here
    return L;
}

// Thomas algorithm for the unconstrained (European) step.
void solve_tridiag(const std::vector<double>& a, const std::vector<double>& b,
                   const std::vector<double>& c, std::vector<double>& rhs,
                   std::vector<double>& scratch) {
    const std::size_t n = b.size();
    scratch.resize(n);
    double beta = b[0];
    rhs[0] /= beta;
    for (std::size_t i = 1; i < n; ++i) {
        scratch[i] = c[i - 1] / beta;
        beta = b[i] - a[i] * scratch[i];
        rhs[i] = (rhs[i] - a[i] * rhs[i - 1]) / beta;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i + 1] * rhs[i + 1];
}

}  // namespace

ValueSurface solve_segment_pde(const PriceGrid& grid, const std::vector<double>& times,
                               const SegmentProblem& problem, const MarketParams& params,
                               double scale, const PdeParams& pde) {
    params.validate();
    if (times.size() < 2) throw std::invalid_argument("solve_segment_pde: need >= 2 times");
    if (!problem.terminal) throw std::invalid_argument("solve_segment_pde: missing terminal");
    if (!(scale > 0.0)) throw std::invalid_argument("solve_segment_pde: scale must be > 0");
    const std::size_t n = grid.size();
    const std::size_t m = times.size();
    const bool american = static_cast<bool>(problem.obstacle);

    const double psor_tol = pde.psor_tol_frac * scale;
    const double mask_tol = std::max(1e-7 * scale, 10.0 * psor_tol);

    ValueSurface surf;
    surf.grid = grid;
    surf.times = times;
    surf.t_lo = times.front();
    surf.t_hi = times.back();
    surf.values.assign(m * n, 0.0);
    surf.exercise.assign(m * n, 0);
    surf.obstacle_tol = mask_tol;

    const OperatorRows L = build_operator(grid, params);

    std::vector<double> psi(n, 0.0);
    auto fill_obstacle = [&](double t) {
        if (!american) return;
        for (std::size_t i = 0; i < n; ++i) psi[i] = problem.obstacle(t, grid[i]);
    };
    auto write_slice = [&](std::size_t k, const std::vector<double>& u) {
        std::copy(u.begin(), u.end(), surf.values.begin() + k * n);
        if (american) {
            auto* mk = surf.exercise.data() + k * n;
            for (std::size_t i = 0; i < n; ++i) mk[i] = (u[i] - psi[i] <= mask_tol) ? 1 : 0;
        }
    };

    // Far-field Dirichlet data: the terminal value at x_max, discounted back.
    // For a payoff that decays (plain put) this is zero; for a composed payoff
    // that stays bounded away from zero at the truncation boundary (e.g. a
    // dividend map that sends x_max back near the strike) the discounted value
    // is the correct asymptote, and pinning zero would carve an artificial
    // kink into the top of every slice.
    const double t_hi = times.back();
    const double far_terminal = problem.terminal(grid[n - 1]);
    auto far_value = [&](double t) { return far_terminal * std::exp(-params.rate * (t_hi - t)); };

    // terminal slice
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = problem.terminal(grid[i]);
    fill_obstacle(times.back());
    if (american)
        for (std::size_t i = 0; i < n; ++i) u[i] = std::max(u[i], psi[i]);
    write_slice(m - 1, u);

    // scratch for the theta step
    std::vector<double> rhs(n), ma(n), mb(n), mc(n), scratch(n), w(n);

    // One theta-step of size dt ending at new time t_new; u holds the later slice.
    auto step = [&](double dt, double t_new, double theta) {
        // rhs = (I + (1-theta) dt L) u, with the top row pinned
        const double ex = (1.0 - theta) * dt;
        rhs[0] = u[0] + ex * L.di[0] * u[0];
        for (std::size_t i = 1; i + 1 < n; ++i)
            rhs[i] = u[i] + ex * (L.lo[i] * u[i - 1] + L.di[i] * u[i] + L.up[i] * u[i + 1]);
        rhs[n - 1] = far_value(t_new);

        // M = I - theta dt L
        const double im = theta * dt;
        ma[0] = 0.0;
        mb[0] = 1.0 - im * L.di[0];
        mc[0] = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            ma[i] = -im * L.lo[i];
            mb[i] = 1.0 - im * L.di[i];
            mc[i] = -im * L.up[i];
        }
        ma[n - 1] = 0.0;
        mb[n - 1] = 1.0;
        mc[n - 1] = 0.0;

        if (!american) {
            solve_tridiag(ma, mb, mc, rhs, scratch);
            u = rhs;
            return;
        }

        fill_obstacle(t_new);
        // projected SOR, warm-started from the later slice; the top node is
        // Dirichlet data at the new time, not an unknown
        w = u;
        w[n - 1] = rhs[n - 1];
        int it = 0;
        for (; it < pde.psor_max_iter; ++it) {
            double delta = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                double gs = rhs[i];
                if (i > 0) gs -= ma[i] * w[i - 1];
                if (i + 1 < n) gs -= mc[i] * w[i + 1];
                gs /= mb[i];
                double wn = w[i] + pde.psor_omega * (gs - w[i]);
                if (wn < psi[i]) wn = psi[i];
                delta = std::max(delta, std::abs(wn - w[i]));
                w[i] = wn;
            }
            if (delta <= psor_tol) break;
        }
        if (it >= pde.psor_max_iter)
            throw PsorNonConvergence("projected SOR did not converge", it);
        u = w;
    };

    for (std::size_t k = m - 1; k-- > 0;) {
        const double dt = times[k + 1] - times[k];
        const bool opening = (k == m - 2) && pde.rannacher_halves > 0;
        if (opening && pde.scheme == Scheme::crank_nicolson) {
            const int halves = pde.rannacher_halves;
            const double sub = dt / halves;
            for (int q = 1; q <= halves; ++q)
                step(sub, times[k + 1] - sub * q, 1.0);
        } else {
            const double theta = pde.scheme == Scheme::crank_nicolson ? 0.5 : 1.0;
            step(dt, times[k], theta);
        }
        fill_obstacle(times[k]);  // mask against the obstacle at the stored time
        write_slice(k, u);
    }
    return surf;
}

const ValueSurface& MultiSegmentSolution::segment_containing(double t) const {
    if (segments.empty()) throw std::logic_error("MultiSegmentSolution: empty");
    // segments own [t_lo, t_hi); a dividend date itself belongs to the segment
    // starting there (ex-dividend convention)
    for (const auto& s : segments)
        if (t < s.t_hi) return s;
    return segments.back();
}

double MultiSegmentSolution::value_at(double t, double x) const {
    return surface_value_at(segment_containing(t), t, x);
}

MultiSegmentSolution price_american_pde(const OptionSpec& spec, const MarketParams& params,
                                        const DividendSchedule& schedule,
                                        const PriceGrid& grid, const TimeGridSpec& ts,
                                        const PdeParams& pde) {
    spec.validate();
    params.validate();
    const auto check = validate_schedule(schedule, spec, 2048);
    if (!check.ok)
        throw std::invalid_argument("price_american_pde: invalid schedule: " +
                                    check.violations.front().message);

    const double K = spec.strike;
    auto put_payoff = [K](double, double x) { return std::max(K - x, 0.0); };

    // chronological segment edges 0 = e_0 < dates... < e_last = T
    std::vector<double> edges{0.0};
    for (const auto& ev : schedule.events) edges.push_back(ev.date);
    edges.push_back(spec.maturity);

    MultiSegmentSolution out;
    for (const auto& ev : schedule.events) out.dividend_dates.push_back(ev.date);
    out.segments.resize(edges.size() - 1);

    // newest segment first: terminal put payoff at T
    for (std::size_t seg = edges.size() - 1; seg-- > 0;) {
        SegmentProblem prob;
        prob.t_lo = edges[seg];
        prob.t_hi = edges[seg + 1];
        prob.obstacle = put_payoff;
        if (seg + 1 == edges.size() - 1) {
            prob.terminal = [K](double x) { return std::max(K - x, 0.0); };
        } else {
            const ValueSurface& next = out.segments[seg + 1];
            const double level = masked_exercise_level(next, 0, K);
            prob.terminal = ComposedPayoff(next, 0, schedule.events[seg].function, K, level);
        }
        const auto times = make_time_grid(prob.t_lo, prob.t_hi, ts);
        out.segments[seg] = solve_segment_pde(grid, times, prob, params, K, pde);
        out.segments[seg].segment_index = static_cast<int>(seg);
    }
    return out;
}

ResidualReport pde_residual(const ValueSurface& surface, const MarketParams& params,
                            int node_buffer, double x_buffer, double t_buffer) {
    const auto& x = surface.grid.nodes();
    const auto& t = surface.times;
    const std::size_t n = x.size();
    const std::size_t m = t.size();
    if (m < 4 || n < 5) throw GridTooCoarse("pde_residual: surface too small");

    const double r = params.rate;
    const double half_sig2 = 0.5 * params.volatility * params.volatility;

    ResidualReport rep;
    for (std::size_t k = 1; k + 1 < m; ++k) {
        if (surface.t_hi - t[k] < t_buffer) continue;
        // transition: first unmasked node index
        const auto mk = surface.mask(k);
        std::size_t trans = 0;
        for (std::size_t i = 1; i < n && x[i] < 0.999 * x.back(); ++i) {
            if (mk[i]) trans = i;
            else if (trans + 1 == i) break;
        }
        // Stand off the exercise transition by at least two diffusion lengths:
        // the smooth-pasting layer (width ~ sigma x sqrt(t_hi - t)) has large
        // high-order derivatives, so the defect only decays outside it.
        const double layer =
            2.0 * params.volatility * x[trans] * std::sqrt(surface.t_hi - t[k]);
        const double lift_x = x[trans] + std::max(x_buffer, layer);

        const auto u0 = surface.slice(k - 1);
        const auto u1 = surface.slice(k);
        const auto u2 = surface.slice(k + 1);
        const double hl = t[k] - t[k - 1], hr = t[k + 1] - t[k];
        for (std::size_t i = std::max<std::size_t>(2, trans + node_buffer); i + 2 < n; ++i) {
            if (x[i] < lift_x) continue;
            if (mk[i]) continue;
            const double dxl = x[i] - x[i - 1], dxr = x[i + 1] - x[i];
            const double ux =
                (-dxr / dxl * u1[i - 1] + (dxr / dxl - dxl / dxr) * u1[i] +
                 dxl / dxr * u1[i + 1]) /
                (dxl + dxr);
            const double uxx = 2.0 * (u1[i - 1] / (dxl * (dxl + dxr)) - u1[i] / (dxl * dxr) +
                                      u1[i + 1] / (dxr * (dxl + dxr)));
            const double ut =
                (-hr / hl * u0[i] + (hr / hl - hl / hr) * u1[i] + hl / hr * u2[i]) /
                (hl + hr);
            const double res =
                ut + half_sig2 * x[i] * x[i] * uxx + r * x[i] * ux - r * u1[i];
            rep.sup_continuation = std::max(rep.sup_continuation, std::abs(res));
            ++rep.nodes_included;
        }
    }
    return rep;
}

std::vector<double> apply_generator(const PriceGrid& grid, const MarketParams& params,
                                    const std::vector<double>& values) {
    const auto& x = grid.nodes();
    const std::size_t n = x.size();
    if (values.size() != n) throw std::invalid_argument("apply_generator: size mismatch");
    std::vector<double> out(n, 0.0);
    const double r = params.rate;
    const double half_sig2 = 0.5 * params.volatility * params.volatility;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = x[i] - x[i - 1], hr = x[i + 1] - x[i];
        const double ux = (-hr / hl * values[i - 1] + (hr / hl - hl / hr) * values[i] +
                           hl / hr * values[i + 1]) /
                          (hl + hr);
        const double uxx =
            2.0 * (values[i - 1] / (hl * (hl + hr)) - values[i] / (hl * hr) +
                   values[i + 1] / (hr * (hl + hr)));
        out[i] = half_sig2 * x[i] * x[i] * uxx + r * x[i] * ux - r * values[i];
    }
    out[0] = -r * values[0];
    out[n - 1] = out[n - 2];
    return out;
}

}  // namespace amdiv
