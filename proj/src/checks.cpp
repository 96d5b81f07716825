#include "amdiv/checks.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "amdiv/boundary.hpp"
#include "amdiv/closed_forms.hpp"
#include "amdiv/compose.hpp"
#include "amdiv/errors.hpp"
#include "amdiv/escrowed.hpp"
#include "amdiv/lattice.hpp"
#include "amdiv/mc.hpp"
#include "amdiv/pde.hpp"

namespace amdiv {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Non-uniform three-point first derivative at the middle abscissa.
double central_first(double f0, double f1, double f2, double h0, double h1) {
    return (h0 * h0 * f2 + (h1 * h1 - h0 * h0) * f1 - h1 * h1 * f0) /
           (h0 * h1 * (h0 + h1));
}

// Non-uniform three-point second derivative at the middle abscissa.
double central_second(double f0, double f1, double f2, double h0, double h1) {
    return 2.0 * (h1 * f0 - (h0 + h1) * f1 + h0 * f2) / (h0 * h1 * (h0 + h1));
}

// First continuation index above the contiguous exercised block at the bottom.
std::size_t mask_transition(const ValueSurface& s, std::size_t k) {
    const auto m = s.mask(k);
    std::size_t i = 0;
    while (i + 1 < m.size() && m[i + 1]) ++i;
    return i + 1;
}

bool proportional_like(const DividendSchedule& schedule) {
    for (const auto& ev : schedule.events) {
        const auto f = ev.function.family();
        if (f != DividendFamily::proportional && f != DividendFamily::identity) return false;
    }
    return true;
}

struct Solved {
    PriceGrid grid;
    MultiSegmentSolution sol;
    std::vector<BoundaryCurve> curves;  // one per segment, chronological
    std::string grid_note;
};

Solved solve_scenario(const Scenario& sc) {
    Solved ctx{PriceGrid::make(sc.option, sc.market, sc.engine.grid), {}, {}, {}};
    ctx.sol = price_american_pde(sc.option, sc.market, sc.schedule, ctx.grid,
                                 sc.engine.time, sc.engine.pde);
    for (const auto& seg : ctx.sol.segments) {
        ctx.curves.push_back(extract_boundary(seg, sc.option));
    }
    std::ostringstream note;
    note << "nodes=" << ctx.grid.size() << " x_max=" << fmt(ctx.grid.x_max())
         << " segments=" << ctx.sol.segments.size();
    if (sc.engine.time.uniform) {
        note << " uniform_steps=" << sc.engine.time.uniform_steps;
    } else {
        note << " dt_fine=" << fmt(sc.engine.time.dt_fine)
             << " dt_max=" << fmt(sc.engine.time.dt_max);
    }
    ctx.grid_note = note.str();
    return ctx;
}

// gamma machinery of the segment before dividend event `ev_idx`: derivatives of
// the next segment's earliest slice, its boundary, and the composed generator.
struct GammaContext {
    double cbar = 0.0;
    double xstar = 0.0;
    GammaScan scan;                        // over (x_lo, x_hi)
    std::function<double(double)> gamma;
};

GammaContext gamma_context(const Solved& ctx, const Scenario& sc, std::size_t ev_idx,
                           int n_scan = 3000) {
    const ValueSurface& next = ctx.sol.segments[ev_idx + 1];
    const DividendFunction& df = sc.schedule.events[ev_idx].function;
    GammaContext g;
    g.cbar = ctx.curves[ev_idx + 1].levels[0];
    const SliceDerivatives sd = slice_derivatives(next, 0, g.cbar);
    g.gamma = make_gamma(df, sd, sc.market);
    g.xstar = x_star(df, g.cbar);
    const double x_lo = std::max(1e-4 * sc.option.strike, ctx.grid[1]);
    const double x_hi = 0.9 * ctx.grid.x_max();
    g.scan = scan_gamma(g.gamma, x_lo, x_hi, n_scan);
    return g;
}

}  // namespace

const char* check_status_name(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::skipped: return "skipped";
        case CheckStatus::error: return "error";
    }
    return "unknown";
}

bool CheckReport::overall() const {
    for (const auto& e : entries) {
        if (e.status == CheckStatus::fail || e.status == CheckStatus::error) return false;
    }
    return true;
}

int CheckReport::failures() const {
    int n = 0;
    for (const auto& e : entries) {
        if (e.status == CheckStatus::fail || e.status == CheckStatus::error) ++n;
    }
    return n;
}

std::string CheckReport::to_text() const {
    std::size_t idw = 2;
    for (const auto& e : entries) idw = std::max(idw, e.id.size());
    std::ostringstream out;
    out << "scenario: " << scenario << "\n";
    for (const auto& e : entries) {
        out << e.id << std::string(idw + 2 - e.id.size(), ' ');
        std::string st = check_status_name(e.status);
        out << st << std::string(9 - st.size(), ' ');
        if (e.status == CheckStatus::pass || e.status == CheckStatus::fail) {
            out << fmt(e.measured) << " " << e.comparison << " " << fmt(e.threshold);
        }
        if (!e.detail.empty()) out << "  [" << e.detail << "]";
        out << "\n";
    }
    int skipped = 0;
    for (const auto& e : entries)
        if (e.status == CheckStatus::skipped) ++skipped;
    out << "overall: " << (overall() ? "PASS" : "FAIL") << " (" << failures()
        << " failing, " << skipped << " skipped, " << entries.size() << " entries)\n";
    return out.str();
}

std::string CheckReport::to_json_string(int indent) const {
    nlohmann::json j;
    j["scenario"] = scenario;
    j["overall"] = overall();
    j["entries"] = nlohmann::json::array();
    auto num = [](double v) -> nlohmann::json {
        if (std::isfinite(v)) return v;
        return v > 0 ? 1e308 : -1e308;
    };
    for (const auto& e : entries) {
        nlohmann::json je;
        je["id"] = e.id;
        je["property"] = e.property;
        je["measured"] = num(e.measured);
        je["threshold"] = num(e.threshold);
        je["comparison"] = e.comparison;
        je["status"] = check_status_name(e.status);
        je["detail"] = e.detail;
        j["entries"].push_back(std::move(je));
    }
    return j.dump(indent) + "\n";
}

CheckReport run_suite(const Scenario& sc) {
    CheckReport rep;
    rep.scenario = sc.name;
    const double K = sc.option.strike;
    const double r = sc.market.rate;
    const double T = sc.option.maturity;
    const CheckTolerances& tol = sc.checks;
    const bool sharp = proportional_like(sc.schedule);
    const std::size_t n_div = sc.schedule.size();

    // A check body fills measured/threshold/comparison/detail and returns the
    // pass verdict; exceptions become per-entry errors.
    auto entry = [](const std::string& id, const std::string& property,
                    auto&& body) -> CheckResult {
        CheckResult res;
        res.id = id;
        res.property = property;
        try {
            res.status = body(res) ? CheckStatus::pass : CheckStatus::fail;
        } catch (const std::exception& e) {
            res.status = CheckStatus::error;
            res.detail = e.what();
        }
        return res;
    };
    auto skipped = [](const std::string& id, const std::string& property,
                      const std::string& why) {
        CheckResult res;
        res.id = id;
        res.property = property;
        res.status = CheckStatus::skipped;
        res.detail = why;
        return res;
    };

    // ---- shared solve -------------------------------------------------------
    std::optional<Solved> shared;
    std::string solve_error;
    try {
        shared.emplace(solve_scenario(sc));
    } catch (const std::exception& e) {
        solve_error = std::string("scenario solve failed: ") + e.what();
    }
    auto need_solve = [&](const std::string& id, const std::string& property,
                          auto&& body) -> CheckResult {
        if (!shared) {
            CheckResult res;
            res.id = id;
            res.property = property;
            res.status = CheckStatus::error;
            res.detail = solve_error;
            return res;
        }
        return entry(id, property, body);
    };

    // ---- expensive independent checks run concurrently ---------------------
    auto launch = [](auto&& fn) {
        return std::async(std::launch::async, std::forward<decltype(fn)>(fn));
    };

    std::future<CheckResult> fut_tree, fut_mc, fut_residual, fut_jump, fut_escrow;
    std::future<std::vector<CheckResult>> fut_identity, fut_reduced;

    if (shared && tol.run_cross_engine) {
        fut_tree = launch([&]() {
            return entry("cross-engine-tree",
                         "PDE and binomial-tree prices agree at reference spots", [&](CheckResult& res) {
                const MultiSegmentSolution tree = price_american_tree(
                    sc.option, sc.market, sc.schedule, shared->grid, sc.engine.tree);
                double worst = 0.0;
                std::ostringstream d;
                d << "t=" << fmt(shared->sol.segments.front().t_lo) << " spots:";
                for (double f : {0.5, 0.8, 1.0, 1.2}) {
                    const double x = f * K;
                    const double t0 = shared->sol.segments.front().t_lo;
                    const double gap = std::abs(shared->sol.value_at(t0, x) -
                                                tree.value_at(t0, x));
                    worst = std::max(worst, gap);
                    d << " " << fmt(x) << ":" << fmt(gap);
                }
                res.measured = worst;
                res.threshold = tol.cross_engine_frac * K;
                res.detail = d.str() + " tree_steps=" +
                             std::to_string(sc.engine.tree.steps_per_segment);
                return res.measured <= res.threshold;
            });
        });
    }

    if (shared && tol.run_mc) {
        fut_mc = launch([&]() {
            return entry("mc-agreement",
                         "least-squares Monte Carlo price within its error band of the PDE price",
                         [&](CheckResult& res) {
                McParams mc = sc.engine.mc;
                mc.n_steps = steps_covering_dates(0.0, T, sc.schedule, mc.n_steps);
                const LsEstimate est =
                    price_ls(sc.option, sc.market, sc.schedule, sc.option.spot, 0.0, mc);
                const double pde = shared->sol.value_at(0.0, sc.option.spot);
                res.measured = std::abs(pde - est.value);
                res.threshold = std::max(tol.mc_se_mult * est.std_error,
                                         tol.mc_floor_frac * K);
                std::ostringstream d;
                d << "pde=" << fmt(pde) << " ls=" << fmt(est.value) << " se="
                  << fmt(est.std_error) << " paths=" << est.n_paths
                  << " steps=" << mc.n_steps << " seed=" << mc.seed;
                res.detail = d.str();
                return res.measured <= res.threshold;
            });
        });
    }

    if (shared && tol.run_residual) {
        fut_residual = launch([&]() {
            return entry("residual-decay",
                         "continuation-region operator residual shrinks under 2x refinement",
                         [&](CheckResult& res) {
                const ValueSurface& last = shared->sol.segments.back();
                const double len = last.t_hi - last.t_lo;
                const int steps_c = std::max(100, static_cast<int>(len / sc.engine.time.dt_max));
                const double dt_c = len / steps_c;

                PdeParams pp = sc.engine.pde;
                pp.psor_tol_frac = std::min(pp.psor_tol_frac, 1e-10);
                SegmentProblem prob;
                prob.t_lo = last.t_lo;
                prob.t_hi = last.t_hi;
                prob.terminal = [K](double x) { return std::max(K - x, 0.0); };
                prob.obstacle = [K](double, double x) { return std::max(K - x, 0.0); };

                auto solve_uniform = [&](int nodes, int steps) {
                    GridSpec gs = sc.engine.grid;
                    gs.nodes = nodes;
                    const PriceGrid g = PriceGrid::make(sc.option, sc.market, gs);
                    TimeGridSpec ts;
                    ts.uniform = true;
                    ts.uniform_steps = steps;
                    return solve_segment_pde(g, make_time_grid(prob.t_lo, prob.t_hi, ts),
                                             prob, sc.market, K, pp);
                };
                const ValueSurface coarse = solve_uniform(sc.engine.grid.nodes, steps_c);
                const ValueSurface fine = solve_uniform(2 * sc.engine.grid.nodes, 2 * steps_c);
                const double x_buf = 0.02 * K;
                const double t_buf = 12.0 * dt_c;
                const ResidualReport rc = pde_residual(coarse, sc.market, 2, x_buf, t_buf);
                const ResidualReport rf = pde_residual(fine, sc.market, 2, x_buf, t_buf);
                res.measured = rf.sup_continuation > 0.0
                                   ? rc.sup_continuation / rf.sup_continuation
                                   : kInf;
                res.threshold = tol.residual_decay_min;
                res.comparison = ">=";
                std::ostringstream d;
                d << "coarse=" << fmt(rc.sup_continuation) << " (" << sc.engine.grid.nodes
                  << "x" << steps_c << ") fine=" << fmt(rf.sup_continuation) << " ("
                  << 2 * sc.engine.grid.nodes << "x" << 2 * steps_c << ")";
                res.detail = d.str();
                return res.measured >= res.threshold;
            });
        });
    }

    if (shared && n_div > 0) {
        fut_jump = launch([&]() {
            return entry("terminal-jump-ratio",
                         "value gap across the last pre-dividend step halves with the step",
                         [&](CheckResult& res) {
                const std::size_t seg_idx = shared->sol.segments.size() - 2;
                const ValueSurface& seg = shared->sol.segments[seg_idx];
                const ValueSurface& next = shared->sol.segments[seg_idx + 1];
                const DividendFunction& df = sc.schedule.events[seg_idx].function;

                const double level = masked_exercise_level(next, 0, K);
                ComposedPayoff g(next, 0, df, K, level);

                auto last_step_gap = [&](const ValueSurface& s) {
                    const std::size_t m = s.n_times() - 1;
                    const auto um = s.slice(m - 1);
                    const auto ug = s.slice(m);
                    double worst = 0.0;
                    for (std::size_t i = 0; i < s.n_nodes(); ++i)
                        worst = std::max(worst, std::abs(um[i] - ug[i]));
                    return std::pair{worst, s.times[m] - s.times[m - 1]};
                };

                SegmentProblem prob;
                prob.t_lo = seg.t_lo;
                prob.t_hi = seg.t_hi;
                prob.terminal = g;
                prob.obstacle = [K](double, double x) { return std::max(K - x, 0.0); };
                TimeGridSpec half = sc.engine.time;
                if (half.uniform) {
                    half.uniform_steps *= 2;
                } else {
                    half.dt_fine *= 0.5;
                }
                const ValueSurface again = solve_segment_pde(
                    shared->grid, make_time_grid(prob.t_lo, prob.t_hi, half), prob,
                    sc.market, K, sc.engine.pde);

                const auto [gap_full, dt_full] = last_step_gap(seg);
                const auto [gap_half, dt_half] = last_step_gap(again);
                res.measured = gap_full > 0.0 ? gap_half / gap_full : 0.0;
                // A globally linear dividend composes to a C^1 payoff (smooth
                // fit), so the gap contracts like dt. A slope kink in the
                // dividend map puts a diffusion layer into the composed payoff
                // and the sup gap only contracts like sqrt(dt), ratio ~ 0.71.
                const bool linear_div = std::isinf(df.linear_radius());
                res.threshold = linear_div ? tol.jump_ratio_max
                                           : std::max(tol.jump_ratio_max, 0.78);
                std::ostringstream d;
                d << "gap(" << fmt(dt_full) << ")=" << fmt(gap_full) << " gap("
                  << fmt(dt_half) << ")=" << fmt(gap_half);
                if (!linear_div) d << " sqrt-step contraction (kinked dividend map)";
                res.detail = d.str();
                return res.measured <= res.threshold;
            });
        });
    }

    if (shared && n_div > 0 && tol.run_identity_dominance) {
        fut_identity = launch([&]() -> std::vector<CheckResult> {
            std::vector<CheckResult> out;
            std::optional<Solved> ident;
            std::string why;
            try {
                Scenario si = sc;
                for (auto& ev : si.schedule.events) ev.function = DividendFunction::identity();
                ident.emplace(solve_scenario(si));
            } catch (const std::exception& e) {
                why = std::string("identity solve failed: ") + e.what();
            }
            out.push_back(entry("identity-dominates-value",
                                "value under any dividend policy stays below the identity-dividend value",
                                [&](CheckResult& res) {
                if (!ident) throw EngineError(why);
                double worst = -kInf;
                for (std::size_t s = 0; s + 1 < shared->sol.segments.size(); ++s) {
                    const ValueSurface& a = shared->sol.segments[s];
                    const ValueSurface& b = ident->sol.segments[s];
                    for (std::size_t k = 0; k + 1 < a.n_times(); ++k) {
                        const auto ua = a.slice(k);
                        const auto ub = b.slice(k);
                        for (std::size_t i = 0; i < a.n_nodes(); ++i)
                            worst = std::max(worst, ua[i] - ub[i]);
                    }
                }
                res.measured = worst;
                res.threshold = tol.shape_frac * K;
                return res.measured <= res.threshold;
            }));
            out.push_back(entry("identity-boundary-below",
                                "identity-dividend boundary lies below any other policy's boundary",
                                [&](CheckResult& res) {
                if (!ident) throw EngineError(why);
                double worst = -kInf;
                double allowance = 0.0;
                for (std::size_t s = 0; s + 1 < shared->sol.segments.size(); ++s) {
                    const BoundaryCurve& ca = shared->curves[s];
                    const BoundaryCurve& cb = ident->curves[s];
                    for (std::size_t k = 0; k + 1 < ca.size(); ++k) {
                        worst = std::max(worst, cb.levels[k] - ca.levels[k]);
                        allowance = std::max(
                            allowance, shared->grid.cell_width(std::max(
                                           cb.levels[k], shared->grid[1])));
                    }
                }
                res.measured = worst;
                res.threshold = allowance + tol.shape_frac * K;
                res.detail = "cell allowance " + fmt(allowance);
                return res.measured <= res.threshold;
            }));
            return out;
        });
    }

    if (shared && n_div >= 2 && tol.run_reduced_consistency) {
        fut_reduced = launch([&]() -> std::vector<CheckResult> {
            std::vector<CheckResult> out;
            std::optional<Solved> red;
            std::string why;
            const double d1 = sc.schedule.events.front().date;
            try {
                Scenario sr = sc;
                sr.schedule.events.erase(sr.schedule.events.begin());
                red.emplace(solve_scenario(sr));
            } catch (const std::exception& e) {
                why = std::string("reduced solve failed: ") + e.what();
            }
            out.push_back(entry("reduced-boundary-match",
                                "after the first dividend, the boundary matches the problem without it",
                                [&](CheckResult& res) {
                if (!red) throw EngineError(why);
                double worst = 0.0, allowance = 0.0;
                for (std::size_t s = 1; s < shared->sol.segments.size(); ++s) {
                    const BoundaryCurve& cf = shared->curves[s];
                    const BoundaryCurve& cr = red->curves[s - 1];
                    for (std::size_t k = 0; k + 1 < cf.size(); ++k) {
                        const double t = cf.times[k];
                        if (t < d1 + 1e-9) continue;
                        const double lr = lerp_sorted(cr.times, cr.levels, t);
                        worst = std::max(worst, std::abs(cf.levels[k] - lr));
                        allowance = std::max(
                            allowance,
                            shared->grid.cell_width(std::max(cf.levels[k], shared->grid[1])));
                    }
                }
                res.measured = worst;
                res.threshold = allowance + tol.shape_frac * K;
                res.detail = "cell allowance " + fmt(allowance);
                return res.measured <= res.threshold;
            }));
            out.push_back(entry("reduced-value-match",
                                "after the first dividend, values match the problem without it",
                                [&](CheckResult& res) {
                if (!red) throw EngineError(why);
                double worst = 0.0;
                for (int it = 0; it <= 20; ++it) {
                    const double t = d1 + (T - d1) * (0.001 + 0.998 * it / 20.0);
                    for (int ix = 1; ix <= 16; ++ix) {
                        const double x = 0.125 * K * ix;
                        worst = std::max(worst, std::abs(shared->sol.value_at(t, x) -
                                                         red->sol.value_at(t, x)));
                    }
                }
                res.measured = worst;
                res.threshold = tol.shape_frac * K;
                return res.measured <= res.threshold;
            }));
            return out;
        });
    }

    const bool escrow_applicable =
        n_div == 1 &&
        sc.schedule.events[0].function.family() == DividendFamily::constant_cash;
    if (shared && escrow_applicable) {
        fut_escrow = launch([&]() {
            return entry("escrowed-window",
                         "escrowed-model boundary vanishes on the predicted window before the date",
                         [&](CheckResult& res) {
                const double amount = sc.schedule.events[0].function.param_a();
                const double date = sc.schedule.events[0].date;
                const EscrowedSolution es =
                    price_escrowed(sc.option, sc.market, amount, date, 0.0,
                                   sc.engine.grid, sc.engine.time, sc.engine.pde);
                const BoundaryCurve bc = escrowed_boundary(es);
                double worst = 0.0;
                for (std::size_t k = 0; k < bc.size(); ++k) {
                    const double delta = date - bc.times[k];
                    const double dt_local =
                        k + 1 < bc.size() ? bc.times[k + 1] - bc.times[k]
                                          : bc.times[k] - bc.times[k - 1];
                    if (delta >= 0.0 && delta < es.window - dt_local) {
                        worst = std::max(worst, bc.levels[k]);
                    }
                }
                res.measured = worst;
                res.threshold = 0.0;
                std::ostringstream d;
                d << "window=" << fmt(es.window) << " boundary(t=0)=" << fmt(bc.levels[0]);
                res.detail = d.str();
                return res.measured <= res.threshold;
            });
        });
    }

    // ---- inline checks ------------------------------------------------------

    // schedule axioms
    rep.entries.push_back(entry(
        "schedule-axioms", "dividend maps are admissible and dates are ordered",
        [&](CheckResult& res) {
            const auto v = validate_schedule(sc.schedule, sc.option, 4096);
            res.measured = static_cast<double>(v.violations.size());
            res.threshold = 0.0;
            if (n_div == 0) res.detail = "no dividend events";
            if (!v.ok) res.detail = v.violations.front().message;
            return v.ok;
        }));

    // value-surface shape
    {
        SurfaceShapeReport worst;
        if (shared) {
            for (const auto& seg : shared->sol.segments) {
                const SurfaceShapeReport s = measure_shape(seg, K);
                worst.below_payoff = std::max(worst.below_payoff, s.below_payoff);
                worst.above_strike = std::max(worst.above_strike, s.above_strike);
                worst.monotone = std::max(worst.monotone, s.monotone);
                worst.lipschitz = std::max(worst.lipschitz, s.lipschitz);
                worst.convexity = std::max(worst.convexity, s.convexity);
            }
        }
        const double st = tol.shape_frac * K;
        auto shape_entry = [&](const std::string& id, const std::string& prop,
                               double measured) {
            return need_solve(id, prop, [&](CheckResult& res) {
                res.measured = measured;
                res.threshold = st;
                res.detail = shared->grid_note;
                return res.measured <= res.threshold;
            });
        };
        rep.entries.push_back(shape_entry("value-dominates-payoff",
                                          "value never falls below the exercise payoff",
                                          worst.below_payoff));
        rep.entries.push_back(shape_entry("value-below-strike",
                                          "value never exceeds the strike", worst.above_strike));
        rep.entries.push_back(shape_entry("value-monotone-x",
                                          "value is nonincreasing in the asset price",
                                          worst.monotone));
        rep.entries.push_back(shape_entry("value-lipschitz-x",
                                          "value decreases no faster than the payoff (1-Lipschitz)",
                                          worst.lipschitz));
        if (sharp) {
            rep.entries.push_back(shape_entry("value-convex-x",
                                              "value is convex in the asset price",
                                              worst.convexity));
        } else {
            rep.entries.push_back(skipped("value-convex-x",
                                          "value is convex in the asset price",
                                          "convexity is only guaranteed for proportional-type dividends"));
        }
    }

    // European dominance on the final (dividend-free) segment
    rep.entries.push_back(need_solve(
        "european-dominance", "American value dominates the closed-form European value",
        [&](CheckResult& res) {
            const ValueSurface& last = shared->sol.segments.back();
            double worst = -kInf;
            for (int i = 0; i <= 10; ++i) {
                const double x = (0.5 + 0.1 * i) * K;
                const double euro = european_put(x, K, T - last.t_lo, sc.market);
                worst = std::max(worst, euro - surface_value_at(last, last.t_lo, x));
            }
            res.measured = worst;
            res.threshold = tol.euro_frac * K;
            return res.measured <= res.threshold;
        }));

    // boundary block
    rep.entries.push_back(need_solve(
        "boundary-positive", "exercise boundary is strictly positive before each terminal time",
        [&](CheckResult& res) {
            double lo = kInf;
            for (std::size_t s = 0; s < shared->curves.size(); ++s) {
                const BoundaryCurve& c = shared->curves[s];
                for (std::size_t k = 0; k + 1 < c.size(); ++k)
                    lo = std::min(lo, c.levels[k]);
            }
            res.measured = lo;
            res.threshold = 0.0;
            res.comparison = ">";
            res.detail = "first positive node " + fmt(shared->grid[1]);
            return res.measured > res.threshold;
        }));

    rep.entries.push_back(need_solve(
        "boundary-below-strike", "exercise boundary stays strictly below the strike",
        [&](CheckResult& res) {
            double hi = -kInf;
            for (const auto& c : shared->curves)
                for (std::size_t k = 0; k + 1 < c.size(); ++k)
                    hi = std::max(hi, c.levels[k]);
            res.measured = hi;
            res.threshold = K;
            res.comparison = "<";
            return res.measured < res.threshold;
        }));

    rep.entries.push_back(need_solve(
        "boundary-perpetual-floor",
        "dividend-free boundary stays above the perpetual-put boundary",
        [&](CheckResult& res) {
            const PerpetualPut pp(K, sc.market);
            const BoundaryCurve& c = shared->curves.back();
            double lo = kInf;
            for (std::size_t k = 0; k + 1 < c.size(); ++k) lo = std::min(lo, c.levels[k]);
            res.measured = lo;
            res.threshold = pp.boundary() - shared->grid.cell_width(pp.boundary());
            res.comparison = ">=";
            res.detail = "perpetual boundary " + fmt(pp.boundary());
            return res.measured >= res.threshold;
        }));

    // per-dividend boundary checks
    {
        bool any_positive = false, any_linear = false, any_threshold = false;
        for (const auto& ev : sc.schedule.events) {
            if (ev.function.is_positive()) any_positive = true;
            if (ev.function.near_zero_slope() > 0.0 &&
                std::isinf(ev.function.linear_radius()))
                any_linear = true;
            if (!ev.function.is_positive() && ev.function.zero_radius() > 0.0)
                any_threshold = true;
        }

        struct Agg {
            double exp_margin = kInf;
            bool exp_ok = true;
            double ratio = 0.0;
            double slope_err = 0.0;
            double cap_excess = -kInf;
            std::size_t monotone_samples = std::numeric_limits<std::size_t>::max();
            double limit_zero = 0.0, limit_zero_thresh = 0.0;
            bool ok = false;
            std::string err;
        } agg;

        if (shared && n_div > 0) {
            try {
                for (std::size_t s = 0; s + 1 < shared->sol.segments.size(); ++s) {
                    const DividendFunction& df = sc.schedule.events[s].function;
                    const double t_d = sc.schedule.events[s].date;
                    const BoundaryCurve& curve = shared->curves[s];
                    BoundCheckParams bp;
                    bp.asymptote_margin = tol.asymptote_margin;
                    const BoundCheckReport bc =
                        check_bounds(curve, sc.option, sc.market, df, t_d,
                                     shared->curves[s + 1].levels[0], shared->grid, bp);
                    if (bc.exp_bound_applicable) {
                        agg.exp_margin = std::min(agg.exp_margin, bc.exp_bound_min_margin);
                        agg.exp_ok = agg.exp_ok && bc.exp_bound_ok;
                    }
                    if (bc.asymptote_applicable)
                        agg.ratio = std::max(agg.ratio, bc.asymptote_max_ratio);
                    if (bc.cap_applicable)
                        agg.cap_excess = std::max(agg.cap_excess, bc.cap_excess);
                    agg.monotone_samples = std::min(agg.monotone_samples, bc.monotone_samples);

                    if (df.is_positive()) {
                        const ValueSurface& seg = shared->sol.segments[s];
                        const auto [w_lo, w_hi] = default_slope_window(
                            seg.t_lo, t_d, sc.engine.time.dt_fine);
                        const SlopeFit fit = asymptotic_slope(curve, t_d, w_lo, w_hi);
                        const double target = r * K * df.inf_ratio();
                        agg.slope_err = std::max(agg.slope_err,
                                                 std::abs(fit.slope - target) / target);
                        // boundary level at the last stored sample before the date
                        std::size_t k = curve.size() - 1;
                        while (k > 0 && curve.times[k] >= t_d) --k;
                        const double dt_end = curve.times[k + 1] - curve.times[k];
                        agg.limit_zero = std::max(agg.limit_zero, curve.levels[k]);
                        agg.limit_zero_thresh = std::max(
                            agg.limit_zero_thresh,
                            std::max(2.0 * r * K * df.inf_ratio() * dt_end,
                                     2.0 * shared->grid[1]));
                    }
                }
                agg.ok = true;
            } catch (const std::exception& e) {
                agg.err = e.what();
            }
        }

        auto agg_entry = [&](const std::string& id, const std::string& prop, bool applicable,
                             const std::string& why, auto&& fill) -> CheckResult {
            if (!shared) {
                CheckResult res;
                res.id = id;
                res.property = prop;
                res.status = CheckStatus::error;
                res.detail = solve_error;
                return res;
            }
            if (!applicable) return skipped(id, prop, why);
            if (!agg.ok) {
                CheckResult res;
                res.id = id;
                res.property = prop;
                res.status = CheckStatus::error;
                res.detail = agg.err;
                return res;
            }
            return entry(id, prop, fill);
        };

        rep.entries.push_back(agg_entry(
            "boundary-limit-zero",
            "boundary collapses to zero approaching a positive-dividend date", any_positive,
            "needs a dividend that is positive for every positive price",
            [&](CheckResult& res) {
                res.measured = agg.limit_zero;
                res.threshold = agg.limit_zero_thresh;
                return res.measured <= res.threshold;
            }));
        rep.entries.push_back(agg_entry(
            "boundary-exp-bound",
            "boundary stays below (1-e^{-r delta})K divided by the payout slope",
            any_linear, "needs a dividend that is linear on the whole half-line",
            [&](CheckResult& res) {
                res.measured = agg.exp_margin;
                res.threshold = 0.0;
                res.comparison = ">=";
                res.detail = "minimum slack-adjusted margin across samples";
                return agg.exp_ok && res.measured >= res.threshold;
            }));
        rep.entries.push_back(agg_entry(
            "boundary-asymptote-ratio",
            "boundary respects the linear r K mu (t_d - t) envelope near the date",
            any_positive, "needs a dividend that is positive for every positive price",
            [&](CheckResult& res) {
                res.measured = agg.ratio;
                res.threshold = 1.0 + tol.asymptote_margin;
                return res.measured <= res.threshold;
            }));
        rep.entries.push_back(agg_entry(
            "boundary-asymptote-slope",
            "fitted boundary slope near the date matches r K mu", any_positive,
            "needs a dividend that is positive for every positive price",
            [&](CheckResult& res) {
                res.measured = agg.slope_err;
                res.threshold = tol.slope_rel_tol;
                res.detail = "relative error vs r K mu";
                return res.measured <= res.threshold;
            }));
        rep.entries.push_back(agg_entry(
            "boundary-threshold-cap",
            "boundary near the date stays under min(dead zone, post-date boundary)",
            any_threshold, "needs a dividend that vanishes near zero",
            [&](CheckResult& res) {
                res.measured = agg.cap_excess;
                res.threshold = 0.0;
                return res.measured <= res.threshold;
            }));
        rep.entries.push_back(agg_entry(
            "boundary-monotone-near-date",
            "boundary is nonincreasing on a left neighbourhood of each date", n_div > 0,
            "no dividend dates", [&](CheckResult& res) {
                res.measured = static_cast<double>(agg.monotone_samples);
                res.threshold = 10.0;
                res.comparison = ">=";
                return res.measured >= res.threshold;
            }));
    }

    // smooth contact
    bool sc_unresolved = false;
    rep.entries.push_back(need_solve(
        "smooth-contact", "value slope at the boundary equals -1 (smooth fit)",
        [&](CheckResult& res) {
            double worst = 0.0;
            int used = 0;
            int total = 0;
            const int n_samples = std::max(1, tol.smooth_contact_samples);
            const double sig2 = sc.market.volatility * sc.market.volatility;
            auto probe = [&](const ValueSurface& seg, const BoundaryCurve& curve,
                             double frac_lo, double frac_hi) {
                const double len = seg.t_hi - seg.t_lo;
                for (int q = 0; q < n_samples; ++q) {
                    const double frac =
                        frac_lo + (frac_hi - frac_lo) *
                                      (n_samples == 1 ? 0.5
                                                      : static_cast<double>(q) / (n_samples - 1));
                    const double t = seg.t_hi - frac * len;
                    const std::size_t k = seg.nearest_time(t);
                    const double level = curve.levels[k];
                    ++total;
                    // Contact curvature is ~ 2rK/(sigma^2 c^2); the slope
                    // estimator is first-order in the cell, so skip samples
                    // whose cell cannot resolve that curvature length (e.g. a
                    // boundary branch collapsing towards zero).
                    const double curv = 2.0 * sc.market.rate * K / (sig2 * level * level);
                    if (level <= shared->grid[1] ||
                        shared->grid.cell_width(level) * curv > tol.smooth_contact_tol)
                        continue;
                    const double slope = smooth_contact_slope(seg, k, level, K);
                    worst = std::max(worst, std::abs(slope + 1.0));
                    ++used;
                }
            };
            if (n_div > 0) {
                // mid-segment window: the slope estimator is resolution-limited
                // inside the thin curvature layer next to the dividend date
                probe(shared->sol.segments.front(), shared->curves.front(), 0.30, 0.65);
            }
            // final dividend-free segment, away from both ends
            probe(shared->sol.segments.back(), shared->curves.back(), 0.25, 0.9);
            res.measured = worst;
            res.threshold = tol.smooth_contact_tol;
            res.detail = std::to_string(used) + "/" + std::to_string(total) +
                         " slices above mesh resolution";
            if (used == 0) {
                sc_unresolved = true;
                res.detail = "boundary below mesh resolution at all sampled times";
                return true;
            }
            return res.measured <= res.threshold;
        }));
    if (sc_unresolved && rep.entries.back().status == CheckStatus::pass)
        rep.entries.back().status = CheckStatus::skipped;

    // gamma machinery of each pre-dividend segment
    {
        std::vector<std::optional<GammaContext>> gctx;
        std::string gerr;
        if (shared) {
            for (std::size_t s = 0; s + 1 < shared->sol.segments.size(); ++s) {
                try {
                    gctx.push_back(gamma_context(*shared, sc, s));
                } catch (const std::exception& e) {
                    gctx.push_back(std::nullopt);
                    gerr = e.what();
                }
            }
        }

        bool all_concave = n_div > 0;
        for (const auto& ev : sc.schedule.events)
            if (!ev.function.is_concave()) all_concave = false;

        auto solve_error_entry = [&](const std::string& id, const std::string& prop) {
            CheckResult res;
            res.id = id;
            res.property = prop;
            res.status = CheckStatus::error;
            res.detail = solve_error;
            return res;
        };

        if (!shared) {
            rep.entries.push_back(solve_error_entry(
                "xstar-consistency", "x* maps onto the post-date boundary"));
            rep.entries.push_back(solve_error_entry(
                "gamma-floor", "composed generator equals -rK below x*"));
        } else if (n_div == 0) {
            rep.entries.push_back(skipped("xstar-consistency",
                                          "x* maps onto the post-date boundary",
                                          "no dividend dates"));
            rep.entries.push_back(skipped("gamma-floor",
                                          "composed generator equals -rK below x*",
                                          "no dividend dates"));
        } else {
            rep.entries.push_back(entry(
                "xstar-consistency",
                "x* maps onto the post-date boundary: x* - D(x*) = c(t_d)",
                [&](CheckResult& res) {
                    double worst = 0.0;
                    bool any = false;
                    for (std::size_t s = 0; s < gctx.size(); ++s) {
                        if (!gctx[s]) throw EngineError(gerr);
                        const GammaContext& g = *gctx[s];
                        if (std::isinf(g.xstar)) continue;  // identity: no finite x*
                        const DividendFunction& df = sc.schedule.events[s].function;
                        worst = std::max(worst,
                                         std::abs(g.xstar - df(g.xstar) - g.cbar));
                        any = true;
                    }
                    if (!any) {
                        res.status = CheckStatus::skipped;
                        res.detail = "x* infinite for every event (identity dividends)";
                        return true;
                    }
                    res.measured = worst;
                    res.threshold = shared->grid.cell_width(
                                        shared->curves.back().levels.front()) +
                                    1e-9 * K;
                    return res.measured <= res.threshold;
                }));
            if (!all_concave) {
                rep.entries.push_back(skipped(
                    "gamma-floor", "composed generator equals -rK below x*",
                    "needs concave dividend maps"));
            } else {
                rep.entries.push_back(entry(
                    "gamma-floor", "composed generator stays at/below -rK before x*",
                    [&](CheckResult& res) {
                        double worst = -kInf;
                        int used = 0;
                        for (std::size_t s = 0; s < gctx.size(); ++s) {
                            if (!gctx[s]) throw EngineError(gerr);
                            const GammaContext& g = *gctx[s];
                            double hi = std::isinf(g.xstar)
                                            ? 0.5 * shared->grid.x_max()
                                            : g.xstar - 3.0 * shared->grid.cell_width(g.xstar);
                            const double lo = std::max(1e-4 * K, shared->grid[1]);
                            if (hi <= 2.0 * lo) continue;
                            const GammaScan scan = scan_gamma(g.gamma, lo, hi, 2000);
                            worst = std::max(worst, (scan.sup_value + r * K) / (r * K));
                            ++used;
                        }
                        if (used == 0) {
                            res.status = CheckStatus::skipped;
                            res.detail = "x* too close to zero to scan";
                            return true;
                        }
                        res.measured = worst;
                        res.threshold = tol.gamma_rel_tol;
                        res.detail = "relative excess over -rK, " +
                                     std::to_string(used) + " segments";
                        return res.measured <= res.threshold;
                    }));
            }
        }

        // time-derivative and curvature bounds in the continuation region
        {
            auto derivative_scan = [&](bool want_upper, bool want_lower, bool want_curv) {
                double worst_up = -kInf, worst_lo = -kInf, worst_cv = -kInf;
                for (std::size_t s = 0; s + 1 < shared->sol.segments.size(); ++s) {
                    if (!gctx[s]) throw EngineError(gerr);
                    const ValueSurface& seg = shared->sol.segments[s];
                    const double sup_pos = gctx[s]->scan.sup_positive;
                    const double t_d = seg.t_hi;
                    const std::size_t m = seg.n_times();
                    const double dt_end = seg.times[m - 1] - seg.times[m - 2];
                    const double t_buf =
                        std::max(6.0 * dt_end, 0.004 * (seg.t_hi - seg.t_lo));
                    const double sig = sc.market.volatility;
                    for (std::size_t k = 1; k + 1 < m; ++k) {
                        if (t_d - seg.times[k] < t_buf) continue;
                        const double delta = t_d - seg.times[k];
                        const double disc = std::exp(-r * delta);
                        const auto u0 = seg.slice(k - 1);
                        const auto u1 = seg.slice(k);
                        const auto u2 = seg.slice(k + 1);
                        const double h0 = seg.times[k] - seg.times[k - 1];
                        const double h1 = seg.times[k + 1] - seg.times[k];
                        const std::size_t start = mask_transition(seg, k) + 3;
                        for (std::size_t i = start; i + 1 < seg.n_nodes(); ++i) {
                            const double ut =
                                central_first(u0[i], u1[i], u2[i], h0, h1);
                            if (want_upper)
                                worst_up = std::max(worst_up, (ut - disc * r * K) / (r * K));
                            if (want_lower)
                                worst_lo = std::max(worst_lo,
                                                    (-disc * sup_pos - ut) / (r * K));
                            if (want_curv) {
                                const double hx0 = shared->grid[i] - shared->grid[i - 1];
                                const double hx1 = shared->grid[i + 1] - shared->grid[i];
                                const double uxx = central_second(u1[i - 1], u1[i],
                                                                  u1[i + 1], hx0, hx1);
                                const double x = shared->grid[i];
                                const double val = 0.5 * sig * sig * x * x * uxx;
                                const double bound = disc * sup_pos + r * K;
                                worst_cv = std::max(worst_cv, (val - bound) / (r * K));
                            }
                        }
                    }
                }
                return std::array<double, 3>{worst_up, worst_lo, worst_cv};
            };

            if (!shared) {
                rep.entries.push_back(solve_error_entry(
                    "ut-upper-bound", "time derivative upper bound"));
                rep.entries.push_back(solve_error_entry(
                    "ut-lower-bound", "time derivative lower bound"));
                rep.entries.push_back(solve_error_entry(
                    "curvature-upper-bound", "curvature upper bound"));
            } else if (n_div == 0) {
                const char* why = "needs a pre-dividend segment";
                rep.entries.push_back(skipped("ut-upper-bound",
                                              "time derivative upper bound", why));
                rep.entries.push_back(skipped("ut-lower-bound",
                                              "time derivative lower bound", why));
                rep.entries.push_back(skipped("curvature-upper-bound",
                                              "curvature upper bound", why));
            } else if (sharp) {
                rep.entries.push_back(entry(
                    "ut-upper-bound",
                    "time derivative stays below e^{-r delta} r K in continuation",
                    [&](CheckResult& res) {
                        res.measured = derivative_scan(true, false, false)[0];
                        res.threshold = tol.ut_rel_tol;
                        res.detail = "excess in units of rK";
                        return res.measured <= res.threshold;
                    }));
                rep.entries.push_back(entry(
                    "ut-lower-bound",
                    "time derivative stays above -e^{-r delta} sup gamma+ in continuation",
                    [&](CheckResult& res) {
                        res.measured = derivative_scan(false, true, false)[1];
                        res.threshold = tol.ut_rel_tol;
                        res.detail = "excess in units of rK";
                        return res.measured <= res.threshold;
                    }));
                rep.entries.push_back(entry(
                    "curvature-upper-bound",
                    "curvature term stays below e^{-r delta} sup gamma+ + rK",
                    [&](CheckResult& res) {
                        res.measured = derivative_scan(false, false, true)[2];
                        res.threshold = tol.ut_rel_tol;
                        res.detail = "excess in units of rK";
                        return res.measured <= res.threshold;
                    }));
            } else {
                const char* why = "two-sided bounds need proportional-type dividends";
                rep.entries.push_back(skipped("ut-upper-bound",
                                              "time derivative upper bound", why));
                rep.entries.push_back(skipped("ut-lower-bound",
                                              "time derivative lower bound", why));
                rep.entries.push_back(skipped("curvature-upper-bound",
                                              "curvature upper bound", why));
            }
        }
    }

    // collect asynchronous results in a fixed order
    auto take_one = [&](std::future<CheckResult>& f, const std::string& id,
                        const std::string& prop, const std::string& why) {
        if (f.valid()) {
            rep.entries.push_back(f.get());
        } else {
            rep.entries.push_back(!shared && why.empty()
                                      ? CheckResult{id, prop, 0, 0, "<=", CheckStatus::error,
                                                    solve_error}
                                      : skipped(id, prop, why.empty() ? "disabled" : why));
        }
    };

    auto fallback = [&](const std::string& id, const std::string& prop,
                        const std::string& skip_why) {
        if (!skip_why.empty() || shared) {
            rep.entries.push_back(
                skipped(id, prop, skip_why.empty() ? "disabled in scenario" : skip_why));
        } else {
            rep.entries.push_back(
                CheckResult{id, prop, 0, 0, "<=", CheckStatus::error, solve_error});
        }
    };

    if (fut_reduced.valid()) {
        for (auto& e : fut_reduced.get()) rep.entries.push_back(std::move(e));
    } else {
        const std::string why = n_div < 2 ? "needs at least two dividend dates" : "";
        fallback("reduced-boundary-match",
                 "after the first dividend, the boundary matches the problem without it", why);
        fallback("reduced-value-match",
                 "after the first dividend, values match the problem without it", why);
    }

    if (fut_identity.valid()) {
        for (auto& e : fut_identity.get()) rep.entries.push_back(std::move(e));
    } else {
        const std::string why = n_div == 0 ? "no dividend dates" : "";
        fallback("identity-dominates-value",
                 "value under any dividend policy stays below the identity-dividend value", why);
        fallback("identity-boundary-below",
                 "identity-dividend boundary lies below any other policy's boundary", why);
    }

    take_one(fut_jump, "terminal-jump-ratio",
             "value gap across the last pre-dividend step halves with the step",
             n_div == 0 ? "no dividend dates" : "");
    take_one(fut_residual, "residual-decay",
             "continuation-region operator residual shrinks under 2x refinement",
             tol.run_residual ? "" : "disabled in scenario");
    take_one(fut_tree, "cross-engine-tree",
             "PDE and binomial-tree prices agree at reference spots",
             tol.run_cross_engine ? "" : "disabled in scenario");
    take_one(fut_mc, "mc-agreement",
             "least-squares Monte Carlo price within its error band of the PDE price",
             tol.run_mc ? "" : "disabled in scenario");
    take_one(fut_escrow, "escrowed-window",
             "escrowed-model boundary vanishes on the predicted window before the date",
             escrow_applicable ? "" : "needs exactly one constant cash dividend");

    return rep;
}

}  // namespace amdiv
