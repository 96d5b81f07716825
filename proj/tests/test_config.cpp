#include <string>

#include "doctest.h"

#include "amdiv/config.hpp"
#include "amdiv/errors.hpp"

using namespace amdiv;

namespace {

const char* kMinimal = R"({
  "name": "unit",
  "market": { "r": 0.04, "sigma": 0.3 },
  "option": { "K": 100.0, "T": 2.0, "spot": 100.0 }
})";

const char* kFull = R"({
  "name": "full",
  "market": { "r": 0.05, "sigma": 0.25 },
  "option": { "K": 50.0, "T": 1.5, "spot": 55.0 },
  "dividends": [
    { "date": 0.5, "family": "proportional", "rho": 0.9 },
    { "date": 1.0, "family": "constant", "amount": 2.5 }
  ],
  "engine": {
    "kind": "tree",
    "grid": { "nodes": 400, "zero_refine": 2.0 },
    "time_steps": 64,
    "tree_steps": 500,
    "mc": { "paths": 5000, "steps": 20, "basis_degree": 2, "seed": 9 }
  },
  "checks": { "smooth_contact_tol": 0.1, "run_mc": false }
})";

}  // namespace

TEST_CASE("scenario parsing") {
    SUBCASE("minimal scenario takes defaults") {
        const Scenario sc = parse_scenario_text(kMinimal);
        CHECK(sc.name == "unit");
        CHECK(sc.market.rate == doctest::Approx(0.04));
        CHECK(sc.option.strike == doctest::Approx(100.0));
        CHECK(sc.schedule.empty());
        CHECK(sc.engine.kind == EngineKind::pde);
        CHECK(sc.engine.grid.nodes == 1200);
        CHECK(sc.checks.smooth_contact_tol == doctest::Approx(0.05));
        CHECK(sc.checks.run_mc);
    }
    SUBCASE("full scenario overrides engine, schedule and tolerances") {
        const Scenario sc = parse_scenario_text(kFull);
        CHECK(sc.engine.kind == EngineKind::tree);
        CHECK(sc.engine.grid.nodes == 400);
        CHECK(sc.engine.time.uniform);
        CHECK(sc.engine.time.uniform_steps == 64);
        CHECK(sc.engine.tree.steps_per_segment == 500);
        CHECK(sc.engine.mc.n_paths == 5000);
        CHECK(sc.engine.mc.seed == 9);
        REQUIRE(sc.schedule.size() == 2);
        CHECK(sc.schedule.events[0].date == doctest::Approx(0.5));
        CHECK(sc.schedule.events[0].function.near_zero_slope() == doctest::Approx(0.1));
        CHECK(sc.schedule.events[1].function.linear_radius() == doctest::Approx(2.5));
        CHECK(sc.checks.smooth_contact_tol == doctest::Approx(0.1));
        CHECK_FALSE(sc.checks.run_mc);
        CHECK(sc.checks.run_residual);
    }
}

TEST_CASE("scenario rejection") {
    SUBCASE("unknown keys are named in the diagnostic") {
        const std::string text = R"({
          "market": { "r": 0.04, "sigma": 0.3, "dividend_yield": 0.02 },
          "option": { "K": 100.0, "T": 1.0, "spot": 100.0 }
        })";
        CHECK_THROWS_WITH_AS(parse_scenario_text(text),
                             doctest::Contains("dividend_yield"), ConfigInvalid);
    }
    SUBCASE("unknown dividend family") {
        const std::string text = R"({
          "market": { "r": 0.04, "sigma": 0.3 },
          "option": { "K": 100.0, "T": 1.0, "spot": 100.0 },
          "dividends": [ { "date": 0.5, "family": "lognormal" } ]
        })";
        CHECK_THROWS_AS(parse_scenario_text(text), ConfigInvalid);
    }
    SUBCASE("family parameters are validated") {
        const std::string text = R"({
          "market": { "r": 0.04, "sigma": 0.3 },
          "option": { "K": 100.0, "T": 1.0, "spot": 100.0 },
          "dividends": [ { "date": 0.5, "family": "proportional", "rho": 1.5 } ]
        })";
        CHECK_THROWS_AS(parse_scenario_text(text), ConfigInvalid);
    }
    SUBCASE("engine kind must be known") {
        const std::string text = R"({
          "market": { "r": 0.04, "sigma": 0.3 },
          "option": { "K": 100.0, "T": 1.0, "spot": 100.0 },
          "engine": { "kind": "quantum" }
        })";
        CHECK_THROWS_AS(parse_scenario_text(text), ConfigInvalid);
    }
    SUBCASE("malformed JSON") {
        CHECK_THROWS_AS(parse_scenario_text("{ not json"), ConfigInvalid);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_scenario("/nonexistent/path/scenario.json"), ConfigInvalid);
    }
    SUBCASE("non-positive market or option parameters") {
        const std::string text = R"({
          "market": { "r": -0.01, "sigma": 0.3 },
          "option": { "K": 100.0, "T": 1.0, "spot": 100.0 }
        })";
        CHECK_THROWS(parse_scenario_text(text));
    }
}

TEST_CASE("engine kind names") {
    CHECK(std::string(engine_kind_name(EngineKind::pde)) == "pde");
    CHECK(std::string(engine_kind_name(EngineKind::tree)) == "tree");
    CHECK(std::string(engine_kind_name(EngineKind::mc)) == "mc");
    CHECK(std::string(engine_kind_name(EngineKind::escrowed)) == "escrowed");
}
