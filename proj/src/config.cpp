#include "amdiv/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "amdiv/errors.hpp"

namespace amdiv {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw ConfigInvalid(what); }

void expect_keys(const json& j, const std::string& where,
                 const std::set<std::string>& allowed) {
    if (!j.is_object()) bad(where + " must be a JSON object");
    for (const auto& item : j.items()) {
        if (!allowed.count(item.key())) {
            bad(where + ": unknown key '" + item.key() + "'");
        }
    }
}

double get_num(const json& j, const std::string& where, const std::string& key,
               double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) bad(where + "." + key + " must be a number");
    return j.at(key).get<double>();
}

double require_num(const json& j, const std::string& where, const std::string& key) {
    if (!j.contains(key)) bad(where + " requires key '" + key + "'");
    if (!j.at(key).is_number()) bad(where + "." + key + " must be a number");
    return j.at(key).get<double>();
}

int get_int(const json& j, const std::string& where, const std::string& key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) bad(where + "." + key + " must be an integer");
    return j.at(key).get<int>();
}

bool get_bool(const json& j, const std::string& where, const std::string& key,
              bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) bad(where + "." + key + " must be a boolean");
    return j.at(key).get<bool>();
}

DividendFunction parse_dividend_function(const json& j, const std::string& where) {
    if (!j.contains("family") || !j.at("family").is_string()) {
        bad(where + " requires a string 'family'");
    }
    const std::string family = j.at("family").get<std::string>();
    try {
        if (family == "proportional") {
            expect_keys(j, where, {"date", "family", "rho"});
            return DividendFunction::proportional(require_num(j, where, "rho"));
        }
        if (family == "constant") {
            expect_keys(j, where, {"date", "family", "amount"});
            return DividendFunction::constant_cash(require_num(j, where, "amount"));
        }
        if (family == "mixed") {
            expect_keys(j, where, {"date", "family", "a", "b", "c"});
            return DividendFunction::mixed(require_num(j, where, "a"),
                                           require_num(j, where, "b"),
                                           require_num(j, where, "c"));
        }
        if (family == "identity") {
            expect_keys(j, where, {"date", "family"});
            return DividendFunction::identity();
        }
        if (family == "threshold") {
            expect_keys(j, where, {"date", "family", "b", "d0"});
            return DividendFunction::threshold(require_num(j, where, "b"),
                                               require_num(j, where, "d0"));
        }
    } catch (const std::invalid_argument& e) {
        bad(where + ": " + e.what());
    }
    bad(where + ": unknown family '" + family + "'");
}

EngineKind parse_engine_kind(const std::string& s) {
    if (s == "pde") return EngineKind::pde;
    if (s == "tree") return EngineKind::tree;
    if (s == "mc") return EngineKind::mc;
    if (s == "escrowed") return EngineKind::escrowed;
    bad("engine.kind must be one of pde|tree|mc|escrowed, got '" + s + "'");
}

void parse_engine(const json& j, EngineConfig& e) {
    expect_keys(j, "engine",
                {"kind", "grid", "time", "time_steps", "scheme", "seed", "tree_steps",
                 "mc", "psor"});
    if (j.contains("kind")) {
        if (!j.at("kind").is_string()) bad("engine.kind must be a string");
        e.kind = parse_engine_kind(j.at("kind").get<std::string>());
    }
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        expect_keys(g, "engine.grid", {"nodes", "zero_refine", "x_max_mult", "quantile"});
        e.grid.nodes = get_int(g, "engine.grid", "nodes", e.grid.nodes);
        e.grid.zero_refine = get_num(g, "engine.grid", "zero_refine", e.grid.zero_refine);
        e.grid.x_max_mult = get_num(g, "engine.grid", "x_max_mult", e.grid.x_max_mult);
        e.grid.quantile = get_num(g, "engine.grid", "quantile", e.grid.quantile);
        if (e.grid.nodes < 50) bad("engine.grid.nodes must be >= 50");
    }
    if (j.contains("time")) {
        const json& t = j.at("time");
        expect_keys(t, "engine.time",
                    {"dt_fine", "dt_max", "fine_fraction", "growth", "uniform_steps"});
        e.time.dt_fine = get_num(t, "engine.time", "dt_fine", e.time.dt_fine);
        e.time.dt_max = get_num(t, "engine.time", "dt_max", e.time.dt_max);
        e.time.fine_fraction = get_num(t, "engine.time", "fine_fraction", e.time.fine_fraction);
        e.time.growth = get_num(t, "engine.time", "growth", e.time.growth);
        const int us = get_int(t, "engine.time", "uniform_steps", 0);
        if (us > 0) {
            e.time.uniform = true;
            e.time.uniform_steps = us;
        }
        if (!(e.time.dt_fine > 0.0) || !(e.time.dt_max >= e.time.dt_fine)) {
            bad("engine.time needs 0 < dt_fine <= dt_max");
        }
    }
    if (j.contains("time_steps")) {  // shorthand: uniform grid with this many steps
        const int us = get_int(j, "engine", "time_steps", 0);
        if (us < 1) bad("engine.time_steps must be a positive integer");
        e.time.uniform = true;
        e.time.uniform_steps = us;
    }
    if (j.contains("scheme")) {
        if (!j.at("scheme").is_string()) bad("engine.scheme must be a string");
        const std::string s = j.at("scheme").get<std::string>();
        if (s == "crank_nicolson") {
            e.pde.scheme = Scheme::crank_nicolson;
        } else if (s == "implicit_euler") {
            e.pde.scheme = Scheme::implicit_euler;
        } else {
            bad("engine.scheme must be crank_nicolson or implicit_euler");
        }
    }
    if (j.contains("psor")) {
        const json& p = j.at("psor");
        expect_keys(p, "engine.psor", {"omega", "tol_frac", "max_iter"});
        e.pde.psor_omega = get_num(p, "engine.psor", "omega", e.pde.psor_omega);
        e.pde.psor_tol_frac = get_num(p, "engine.psor", "tol_frac", e.pde.psor_tol_frac);
        e.pde.psor_max_iter = get_int(p, "engine.psor", "max_iter", e.pde.psor_max_iter);
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer()) bad("engine.seed must be an integer");
        e.mc.seed = j.at("seed").get<std::uint64_t>();
    }
    e.tree.steps_per_segment = get_int(j, "engine", "tree_steps", e.tree.steps_per_segment);
    if (e.tree.steps_per_segment < 2) bad("engine.tree_steps must be >= 2");
    if (j.contains("mc")) {
        const json& m = j.at("mc");
        expect_keys(m, "engine.mc", {"paths", "steps", "basis_degree", "seed"});
        const int paths = get_int(m, "engine.mc", "paths", static_cast<int>(e.mc.n_paths));
        if (paths < 1) bad("engine.mc.paths must be positive");
        e.mc.n_paths = static_cast<std::size_t>(paths);
        e.mc.n_steps = get_int(m, "engine.mc", "steps", e.mc.n_steps);
        e.mc.basis_degree = get_int(m, "engine.mc", "basis_degree", e.mc.basis_degree);
        if (m.contains("seed")) {
            if (!m.at("seed").is_number_integer()) bad("engine.mc.seed must be an integer");
            e.mc.seed = m.at("seed").get<std::uint64_t>();
        }
    }
}

void parse_checks(const json& j, CheckTolerances& c) {
    expect_keys(j, "checks",
                {"shape_frac", "jump_ratio_max", "residual_decay_min", "smooth_contact_tol",
                 "smooth_contact_samples", "slope_rel_tol", "asymptote_margin",
                 "cross_engine_frac", "mc_se_mult", "mc_floor_frac", "gamma_rel_tol",
                 "ut_rel_tol", "euro_frac", "run_cross_engine", "run_mc", "run_residual",
                 "run_identity_dominance", "run_reduced_consistency"});
    c.shape_frac = get_num(j, "checks", "shape_frac", c.shape_frac);
    c.jump_ratio_max = get_num(j, "checks", "jump_ratio_max", c.jump_ratio_max);
    c.residual_decay_min = get_num(j, "checks", "residual_decay_min", c.residual_decay_min);
    c.smooth_contact_tol = get_num(j, "checks", "smooth_contact_tol", c.smooth_contact_tol);
    c.smooth_contact_samples =
        get_int(j, "checks", "smooth_contact_samples", c.smooth_contact_samples);
    c.slope_rel_tol = get_num(j, "checks", "slope_rel_tol", c.slope_rel_tol);
    c.asymptote_margin = get_num(j, "checks", "asymptote_margin", c.asymptote_margin);
    c.cross_engine_frac = get_num(j, "checks", "cross_engine_frac", c.cross_engine_frac);
    c.mc_se_mult = get_num(j, "checks", "mc_se_mult", c.mc_se_mult);
    c.mc_floor_frac = get_num(j, "checks", "mc_floor_frac", c.mc_floor_frac);
    c.gamma_rel_tol = get_num(j, "checks", "gamma_rel_tol", c.gamma_rel_tol);
    c.ut_rel_tol = get_num(j, "checks", "ut_rel_tol", c.ut_rel_tol);
    c.euro_frac = get_num(j, "checks", "euro_frac", c.euro_frac);
    c.run_cross_engine = get_bool(j, "checks", "run_cross_engine", c.run_cross_engine);
    c.run_mc = get_bool(j, "checks", "run_mc", c.run_mc);
    c.run_residual = get_bool(j, "checks", "run_residual", c.run_residual);
    c.run_identity_dominance =
        get_bool(j, "checks", "run_identity_dominance", c.run_identity_dominance);
    c.run_reduced_consistency =
        get_bool(j, "checks", "run_reduced_consistency", c.run_reduced_consistency);
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        bad(std::string("scenario is not valid JSON: ") + e.what());
    }
    expect_keys(j, "scenario", {"name", "market", "option", "dividends", "engine", "checks"});

    Scenario sc;
    if (j.contains("name")) {
        if (!j.at("name").is_string()) bad("name must be a string");
        sc.name = j.at("name").get<std::string>();
    }

    if (!j.contains("market")) bad("scenario requires 'market'");
    const json& m = j.at("market");
    expect_keys(m, "market", {"r", "sigma"});
    sc.market.rate = require_num(m, "market", "r");
    sc.market.volatility = require_num(m, "market", "sigma");

    if (!j.contains("option")) bad("scenario requires 'option'");
    const json& o = j.at("option");
    expect_keys(o, "option", {"K", "T", "spot"});
    sc.option.strike = require_num(o, "option", "K");
    sc.option.maturity = require_num(o, "option", "T");
    sc.option.spot = get_num(o, "option", "spot", sc.option.strike);

    try {
        sc.market.validate();
        sc.option.validate();
    } catch (const std::invalid_argument& e) {
        bad(e.what());
    }

    if (j.contains("dividends")) {
        if (!j.at("dividends").is_array()) bad("dividends must be an array");
        std::size_t idx = 0;
        for (const json& d : j.at("dividends")) {
            const std::string where = "dividends[" + std::to_string(idx) + "]";
            DividendEvent ev{require_num(d, where, "date"), parse_dividend_function(d, where)};
            sc.schedule.events.push_back(std::move(ev));
            ++idx;
        }
        const auto check = validate_schedule(sc.schedule, sc.option, 2048);
        if (!check.ok) bad("dividends: " + check.violations.front().message);
    }

    if (j.contains("engine")) parse_engine(j.at("engine"), sc.engine);
    if (j.contains("checks")) parse_checks(j.at("checks"), sc.checks);

    if (sc.engine.kind == EngineKind::escrowed) {
        if (sc.schedule.size() != 1 ||
            sc.schedule.events[0].function.family() != DividendFamily::constant_cash) {
            bad("engine.kind=escrowed requires exactly one constant cash dividend");
        }
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

const char* engine_kind_name(EngineKind kind) {
    switch (kind) {
        case EngineKind::pde: return "pde";
        case EngineKind::tree: return "tree";
        case EngineKind::mc: return "mc";
        case EngineKind::escrowed: return "escrowed";
    }
    return "unknown";
}

}  // namespace amdiv
