#include <cmath>
#include <stdexcept>

#include "doctest.h"

#include "amdiv/boundary.hpp"
#include "amdiv/closed_forms.hpp"
#include "amdiv/errors.hpp"
#include "amdiv/escrowed.hpp"
#include "amdiv/grid.hpp"
#include "amdiv/types.hpp"

using namespace amdiv;

namespace {

const MarketParams kMarket{0.04, 0.3};

OptionSpec make_spec() {
    OptionSpec spec;
    spec.strike = 100.0;
    spec.maturity = 3.0;
    spec.spot = 100.0;
    return spec;
}

EscrowedSolution solve_default() {
    GridSpec gs;
    gs.nodes = 900;
    gs.zero_refine = 2.0;
    TimeGridSpec ts;
    ts.dt_fine = 1e-3;
    return price_escrowed(make_spec(), kMarket, 5.0, 2.0, 0.0, gs, ts);
}

}  // namespace

TEST_CASE("no-exercise window closed form") {
    CHECK(no_exercise_window(100.0, 5.0, 0.04) ==
          doctest::Approx(1.219754104235801).epsilon(1e-12));
    // window grows with the dividend and shrinks with the rate
    CHECK(no_exercise_window(100.0, 10.0, 0.04) > no_exercise_window(100.0, 5.0, 0.04));
    CHECK(no_exercise_window(100.0, 5.0, 0.08) < no_exercise_window(100.0, 5.0, 0.04));
    CHECK_THROWS_AS(no_exercise_window(0.0, 5.0, 0.04), std::invalid_argument);
    CHECK_THROWS_AS(no_exercise_window(100.0, -1.0, 0.04), std::invalid_argument);
}

TEST_CASE("escrowed solution") {
    const EscrowedSolution sol = solve_default();

    SUBCASE("bookkeeping and the escrow offset") {
        CHECK(sol.window == doctest::Approx(1.219754104235801).epsilon(1e-12));
        CHECK(sol.escrow_offset(2.0) == doctest::Approx(5.0).epsilon(1e-12));
        CHECK(sol.escrow_offset(0.0) == doctest::Approx(5.0 * std::exp(-0.08)).epsilon(1e-12));
        CHECK(sol.effective_strike(0.0) ==
              doctest::Approx(100.0 - 5.0 * std::exp(-0.08)).epsilon(1e-12));
    }
    SUBCASE("after the date the value is the plain dividend-free put") {
        const double direct = surface_value_at(sol.base, 2.5, 90.0);
        CHECK(sol.value_at(2.5, 90.0) == doctest::Approx(direct).epsilon(1e-9));
        CHECK(sol.value_at(2.5, 90.0) >
              european_put(90.0, 100.0, 0.5, kMarket) - 1e-6);
    }
    SUBCASE("before the date the value dominates the payoff and the European floor") {
        for (double x : {60.0, 80.0, 100.0, 130.0}) {
            const double v = sol.value_at(0.0, x);
            CHECK(v >= std::max(100.0 - x, 0.0) - 1e-9);
            CHECK(v < 100.0);
        }
    }
    SUBCASE("prices below the escrow cannot be reached") {
        CHECK_THROWS_AS(sol.value_at(0.0, 1.0), EscrowViolation);
    }
    SUBCASE("boundary vanishes on the no-exercise window and wakes up outside it") {
        const BoundaryCurve curve = escrowed_boundary(sol);
        REQUIRE(curve.size() == sol.escrow.n_times());
        double max_inside = 0.0;
        double at_start = -1.0;
        for (std::size_t k = 0; k < curve.size(); ++k) {
            const double t = curve.times[k];
            const double gap = 2.0 - t;  // time to the dividend date
            if (gap < sol.window - 2e-3) max_inside = std::max(max_inside, curve.levels[k]);
            if (k == 0) at_start = curve.levels[k];
        }
        CHECK(max_inside == 0.0);  // exercising inside the window is never optimal
        CHECK(at_start > 0.0);     // far from the date the boundary is alive
        CHECK(at_start < 100.0);
    }
    SUBCASE("invalid construction") {
        CHECK_THROWS_AS(price_escrowed(make_spec(), kMarket, -5.0, 2.0, 0.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(price_escrowed(make_spec(), kMarket, 150.0, 2.0, 0.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(price_escrowed(make_spec(), kMarket, 5.0, 3.5, 0.0),
                        std::invalid_argument);
    }
}
