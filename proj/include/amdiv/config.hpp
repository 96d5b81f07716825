#pragma once

#include <cstdint>
#include <string>

#include "amdiv/dividends.hpp"
#include "amdiv/grid.hpp"
#include "amdiv/lattice.hpp"
#include "amdiv/pde.hpp"
#include "amdiv/mc.hpp"
#include "amdiv/types.hpp"

namespace amdiv {

enum class EngineKind { pde, tree, mc, escrowed };

struct EngineConfig {
    EngineKind kind = EngineKind::pde;
    GridSpec grid;
    TimeGridSpec time;
    PdeParams pde;
    TreeParams tree;
    McParams mc;
};

// Per-check tolerances; defaults mirror the thresholds the verification suite
// is expected to meet at the default resolutions.
struct CheckTolerances {
    double shape_frac = 1e-6;          // value-shape violations, fraction of K
    double jump_ratio_max = 0.6;       // terminal-gap ratio under dt halving
    double residual_decay_min = 1.5;   // residual shrink factor under 2x refinement
    double smooth_contact_tol = 0.05;  // |u_x(c+) + 1|
    int smooth_contact_samples = 10;
    double slope_rel_tol = 0.10;       // fitted near-date slope vs r K mu
    double asymptote_margin = 0.35;    // slack on c <= r K mu (t_d - t)
    double cross_engine_frac = 1e-3;   // pde-vs-tree gap, fraction of K
    double mc_se_mult = 3.0;           // MC agreement: max(mult * SE, floor)
    double mc_floor_frac = 3e-3;       //   ... floor as fraction of K
    double gamma_rel_tol = 0.02;       // (sup gamma + rK)/rK below x*
    double ut_rel_tol = 0.02;          // time-derivative bound slack, units of rK
    double euro_frac = 1e-4;           // closed-form European dominance slack
    bool run_cross_engine = true;
    bool run_mc = true;
    bool run_residual = true;
    bool run_identity_dominance = true;
    bool run_reduced_consistency = true;
};

struct Scenario {
    std::string name = "scenario";
    MarketParams market;
    OptionSpec option;
    DividendSchedule schedule;
    EngineConfig engine;
    CheckTolerances checks;
};

// Parse a scenario from JSON text / file. Unknown keys are rejected, missing
// ones take the defaults above. Throws ConfigInvalid with a diagnostic.
Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::string& path);

const char* engine_kind_name(EngineKind kind);

}  // namespace amdiv
