// Command-line interface: price American puts with discrete dividends, emit
// exercise-boundary samples, run the verification suite, or reproduce the
// reference boundary figure. All numeric output uses 12 significant digits so
// identical configurations give byte-identical files.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "amdiv/boundary.hpp"
#include "amdiv/checks.hpp"
#include "amdiv/config.hpp"
#include "amdiv/errors.hpp"
#include "amdiv/escrowed.hpp"
#include "amdiv/lattice.hpp"
#include "amdiv/mc.hpp"
#include "amdiv/pde.hpp"

namespace {

using namespace amdiv;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string num12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// Empty path or "-" means stdout.
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open output file: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

struct Overrides {
    std::optional<double> rho_literal;
    std::optional<double> dividend_fraction;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> engine;
};

// Register the override flags on a subcommand; every command accepts them.
void add_override_flags(CLI::App* cmd, Overrides& ov, bool with_engine) {
    auto* rho = cmd->add_option("--rho-literal", ov.rho_literal,
                                "retained fraction rho in (0,1): D(x) = (1 - rho) x; "
                                "replaces every proportional dividend");
    auto* frac = cmd->add_option("--dividend-fraction", ov.dividend_fraction,
                                 "paid fraction f in (0,1): D(x) = f x; "
                                 "replaces every proportional dividend");
    rho->excludes(frac);
    frac->excludes(rho);
    cmd->add_option("--seed", ov.seed, "Monte Carlo seed override");
    if (with_engine) {
        cmd->add_option("--engine", ov.engine, "engine override")
            ->check(CLI::IsMember({"pde", "tree", "mc", "escrowed"}));
    }
}

void apply_overrides(Scenario& sc, const Overrides& ov) {
    auto replace_proportional = [&](double rho) {
        if (!(rho > 0.0 && rho < 1.0))
            throw ConfigInvalid("proportional override must lie in (0, 1)");
        for (auto& ev : sc.schedule.events) {
            if (ev.function.family() == DividendFamily::proportional)
                ev.function = DividendFunction::proportional(rho);
        }
    };
    if (ov.rho_literal) replace_proportional(*ov.rho_literal);
    if (ov.dividend_fraction) replace_proportional(1.0 - *ov.dividend_fraction);
    if (ov.seed) sc.engine.mc.seed = *ov.seed;
    if (ov.engine) {
        if (*ov.engine == "pde") sc.engine.kind = EngineKind::pde;
        else if (*ov.engine == "tree") sc.engine.kind = EngineKind::tree;
        else if (*ov.engine == "mc") sc.engine.kind = EngineKind::mc;
        else sc.engine.kind = EngineKind::escrowed;
    }
}

// The escrowed engine requires exactly one constant cash dividend; config
// validation enforces this for scenarios declaring it, and overrides re-check.
std::pair<double, double> escrow_event(const Scenario& sc) {
    if (sc.schedule.size() != 1 ||
        sc.schedule.events[0].function.family() != DividendFamily::constant_cash) {
        throw ConfigInvalid("escrowed engine needs exactly one constant cash dividend");
    }
    return {sc.schedule.events[0].function.param_a(), sc.schedule.events[0].date};
}

std::string price_csv(const Scenario& sc, double t, const std::vector<double>& xs) {
    const OptionSpec& opt = sc.option;
    if (!(t >= 0.0 && t <= opt.maturity))
        throw ConfigInvalid("query time must lie in [0, maturity]");

    std::vector<double> values(xs.size());
    switch (sc.engine.kind) {
        case EngineKind::pde: {
            const PriceGrid grid = PriceGrid::make(opt, sc.market, sc.engine.grid);
            const MultiSegmentSolution sol = price_american_pde(
                opt, sc.market, sc.schedule, grid, sc.engine.time, sc.engine.pde);
            for (std::size_t i = 0; i < xs.size(); ++i) values[i] = sol.value_at(t, xs[i]);
            break;
        }
        case EngineKind::tree: {
            const PriceGrid grid = PriceGrid::make(opt, sc.market, sc.engine.grid);
            const MultiSegmentSolution sol =
                price_american_tree(opt, sc.market, sc.schedule, grid, sc.engine.tree);
            for (std::size_t i = 0; i < xs.size(); ++i) values[i] = sol.value_at(t, xs[i]);
            break;
        }
        case EngineKind::mc: {
            McParams mc = sc.engine.mc;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (t >= opt.maturity) {
                    values[i] = opt.payoff(xs[i]);
                } else if (xs[i] <= 0.0) {
                    values[i] = opt.strike;  // immediate exercise is optimal at zero
                } else {
                    mc.n_steps = steps_covering_dates(t, opt.maturity, sc.schedule,
                                                      sc.engine.mc.n_steps);
                    values[i] = price_ls(opt, sc.market, sc.schedule, xs[i], t, mc).value;
                }
            }
            break;
        }
        case EngineKind::escrowed: {
            const auto [amount, date] = escrow_event(sc);
            const EscrowedSolution es =
                price_escrowed(opt, sc.market, amount, date, 0.0, sc.engine.grid,
                               sc.engine.time, sc.engine.pde);
            for (std::size_t i = 0; i < xs.size(); ++i) values[i] = es.value_at(t, xs[i]);
            break;
        }
    }

    std::ostringstream out;
    out << "t,x,value\n";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out << num12(t) << "," << num12(xs[i]) << "," << num12(values[i]) << "\n";
    }
    return out.str();
}

std::string boundary_csv(const Scenario& sc) {
    std::ostringstream out;
    out << "t,c\n";
    auto emit_curve = [&](const BoundaryCurve& c) {
        for (std::size_t k = 0; k < c.size(); ++k)
            out << num12(c.times[k]) << "," << num12(c.levels[k]) << "\n";
    };

    switch (sc.engine.kind) {
        case EngineKind::pde:
        case EngineKind::tree: {
            const PriceGrid grid = PriceGrid::make(sc.option, sc.market, sc.engine.grid);
            const MultiSegmentSolution sol =
                sc.engine.kind == EngineKind::pde
                    ? price_american_pde(sc.option, sc.market, sc.schedule, grid,
                                         sc.engine.time, sc.engine.pde)
                    : price_american_tree(sc.option, sc.market, sc.schedule, grid,
                                          sc.engine.tree);
            for (const auto& seg : sol.segments) emit_curve(extract_boundary(seg, sc.option));
            break;
        }
        case EngineKind::escrowed: {
            const auto [amount, date] = escrow_event(sc);
            const EscrowedSolution es =
                price_escrowed(sc.option, sc.market, amount, date, 0.0, sc.engine.grid,
                               sc.engine.time, sc.engine.pde);
            // Before the date the curve lives in the escrowed variable
            // y = x - D e^{-r (date - t)}; at and after the date y = x.
            emit_curve(escrowed_boundary(es));
            emit_curve(extract_boundary(es.base, sc.option));
            break;
        }
        case EngineKind::mc:
            throw ConfigInvalid("the mc engine does not produce an exercise boundary");
    }
    return out.str();
}

Scenario figure_scenario() {
    Scenario sc;
    sc.name = "reference-figure";
    sc.market.rate = 0.04;
    sc.market.volatility = 0.3;
    sc.option.strike = 100.0;
    sc.option.maturity = 4.0;
    sc.option.spot = 100.0;
    sc.schedule.events.push_back({3.5, DividendFunction::proportional(0.05)});
    sc.engine.grid.zero_refine = 4;
    return sc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"American put pricing with discrete dividends"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    Overrides ov;

    auto* price = app.add_subcommand("price", "price the option at (t, x) points");
    double price_t = 0.0;
    std::vector<double> price_xs;
    price->add_option("--config", config_path, "scenario JSON")->required();
    price->add_option("--out", out_path, "output CSV path (default stdout)");
    price->add_option("--t", price_t, "valuation time (default 0)");
    price->add_option("--x", price_xs, "asset prices (default: configured spot)");
    add_override_flags(price, ov, true);

    auto* boundary = app.add_subcommand("boundary", "emit exercise-boundary samples");
    boundary->add_option("--config", config_path, "scenario JSON")->required();
    boundary->add_option("--out", out_path, "output CSV path (default stdout)");
    add_override_flags(boundary, ov, true);

    auto* verify = app.add_subcommand("verify", "run the verification suite");
    verify->add_option("--config", config_path, "scenario JSON")->required();
    verify->add_option("--out", out_path, "write the JSON report here");
    add_override_flags(verify, ov, false);

    auto* figure = app.add_subcommand(
        "figure1", "boundary for the reference single-dividend configuration");
    int fig_tree_steps = 2000;
    figure->add_option("--out", out_path, "output CSV path (default stdout)");
    figure->add_option("--tree-steps", fig_tree_steps, "tree steps when --engine tree");
    add_override_flags(figure, ov, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (price->parsed()) {
            Scenario sc = load_scenario(config_path);
            apply_overrides(sc, ov);
            std::vector<double> xs = price_xs.empty()
                                         ? std::vector<double>{sc.option.spot}
                                         : price_xs;
            emit(out_path, price_csv(sc, price_t, xs));
        } else if (boundary->parsed()) {
            Scenario sc = load_scenario(config_path);
            apply_overrides(sc, ov);
            emit(out_path, boundary_csv(sc));
        } else if (verify->parsed()) {
            Scenario sc = load_scenario(config_path);
            apply_overrides(sc, ov);
            const CheckReport rep = run_suite(sc);
            std::cout << rep.to_text();
            if (!out_path.empty()) emit(out_path, rep.to_json_string());
            return rep.overall() ? 0 : 1;
        } else if (figure->parsed()) {
            Scenario sc = figure_scenario();
            sc.engine.tree.steps_per_segment = fig_tree_steps;
            apply_overrides(sc, ov);
            if (sc.engine.kind == EngineKind::mc ||
                sc.engine.kind == EngineKind::escrowed) {
                throw ConfigInvalid("figure1 supports the pde and tree engines");
            }
            emit(out_path, boundary_csv(sc));
        }
    } catch (const ConfigInvalid& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
