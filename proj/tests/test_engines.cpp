#include <cmath>
#include <vector>

#include "doctest.h"

#include "amdiv/closed_forms.hpp"
#include "amdiv/dividends.hpp"
#include "amdiv/errors.hpp"
#include "amdiv/grid.hpp"
#include "amdiv/lattice.hpp"
#include "amdiv/mc.hpp"
#include "amdiv/pde.hpp"
#include "amdiv/surface.hpp"
#include "amdiv/types.hpp"

using namespace amdiv;

namespace {

const MarketParams kMarket{0.04, 0.3};
constexpr double kStrike = 100.0;

OptionSpec make_spec(double maturity) {
    OptionSpec spec;
    spec.strike = kStrike;
    spec.maturity = maturity;
    spec.spot = kStrike;
    return spec;
}

}  // namespace

TEST_CASE("binomial tree vs PDE, no dividends") {
    const OptionSpec spec = make_spec(1.0);
    GridSpec gs;
    gs.nodes = 1200;
    const PriceGrid grid = PriceGrid::make(spec, kMarket, gs);

    TreeParams tp;
    tp.steps_per_segment = 2000;
    const MultiSegmentSolution tree =
        price_american_tree(spec, kMarket, DividendSchedule{}, grid, tp);
    const MultiSegmentSolution pde =
        price_american_pde(spec, kMarket, DividendSchedule{}, grid, TimeGridSpec{});

    SUBCASE("values at the strike agree within 0.05") {
        CHECK(std::abs(tree.value_at(0.0, 100.0) - pde.value_at(0.0, 100.0)) < 0.05);
    }
    SUBCASE("tree dominates the European closed form") {
        for (double x : {60.0, 100.0, 150.0}) {
            CHECK(tree.value_at(0.0, x) >= european_put(x, kStrike, 1.0, kMarket) - 5e-3);
        }
    }
    SUBCASE("resampled tree slices keep the value shape") {
        const SurfaceShapeReport rep = measure_shape(tree.segments[0], kStrike);
        CHECK(rep.below_payoff <= 1e-9);
        CHECK(rep.monotone <= 1e-9);
        CHECK(rep.lipschitz <= 1e-9);
        CHECK(rep.convexity <= 2e-6);  // resampling keeps convexity to ~1e-8 K
    }
}

TEST_CASE("binomial tree with a proportional dividend tracks the PDE") {
    const OptionSpec spec = make_spec(2.0);
    GridSpec gs;
    gs.nodes = 1200;
    const PriceGrid grid = PriceGrid::make(spec, kMarket, gs);
    DividendSchedule sched;
    sched.events.push_back({1.0, DividendFunction::proportional(0.8)});

    TreeParams tp;
    tp.steps_per_segment = 800;
    const MultiSegmentSolution tree = price_american_tree(spec, kMarket, sched, grid, tp);
    const MultiSegmentSolution pde =
        price_american_pde(spec, kMarket, sched, grid, TimeGridSpec{});

    REQUIRE(tree.segments.size() == 2);
    for (double x : {50.0, 80.0, 100.0, 120.0}) {
        CHECK(std::abs(tree.value_at(0.0, x) - pde.value_at(0.0, x)) < 0.05);
    }
}

TEST_CASE("degenerate tree steps are rejected") {
    // Two steps over 120 years: dt = 60 > (sigma/r)^2, so e^{r dt} >= u.
    const OptionSpec spec = make_spec(120.0);
    GridSpec gs;
    gs.nodes = 200;
    const PriceGrid grid = PriceGrid::make(spec, kMarket, gs);
    TreeParams tp;
    tp.steps_per_segment = 2;
    CHECK_THROWS_AS(solve_segment_tree(
                        grid, 0.0, 120.0,
                        [](double x) { return std::max(kStrike - x, 0.0); }, spec, kMarket, tp),
                    DegenerateStep);
}

TEST_CASE("path simulation") {
    const OptionSpec spec = make_spec(1.0);

    SUBCASE("discounted terminal mean is the spot (martingale)") {
        McParams mc;
        mc.n_paths = 1000000;
        mc.n_steps = 1;
        mc.seed = 1;
        const PathMatrix paths = simulate_paths(spec, kMarket, DividendSchedule{}, 100.0, 0.0, mc);
        REQUIRE(paths.times.size() == 2);
        const double disc = std::exp(-kMarket.rate * 1.0);
        double mean = 0.0, m2 = 0.0;
        for (std::size_t p = 0; p < paths.n_paths; ++p) {
            const double v = disc * paths.at(p, 1);
            mean += v;
            m2 += v * v;
        }
        mean /= paths.n_paths;
        const double var = m2 / paths.n_paths - mean * mean;
        const double se = std::sqrt(var / paths.n_paths);
        CHECK(std::abs(mean - 100.0) <= 3.0 * se);
    }
    SUBCASE("a proportional dividend scales the discounted mean") {
        McParams mc;
        mc.n_paths = 200000;
        mc.n_steps = 4;
        mc.seed = 7;
        DividendSchedule sched;
        sched.events.push_back({0.5, DividendFunction::proportional(0.8)});
        const PathMatrix paths = simulate_paths(spec, kMarket, sched, 100.0, 0.0, mc);
        const double disc = std::exp(-kMarket.rate * 1.0);
        double mean = 0.0, m2 = 0.0;
        for (std::size_t p = 0; p < paths.n_paths; ++p) {
            const double v = disc * paths.at(p, paths.times.size() - 1);
            mean += v;
            m2 += v * v;
        }
        mean /= paths.n_paths;
        const double var = m2 / paths.n_paths - mean * mean;
        const double se = std::sqrt(var / paths.n_paths);
        CHECK(std::abs(mean - 80.0) <= 3.0 * se);
    }
    SUBCASE("European payoff average within 3 SE of the closed form") {
        McParams mc;
        mc.n_paths = 400000;
        mc.n_steps = 1;
        mc.seed = 11;
        const PathMatrix paths = simulate_paths(spec, kMarket, DividendSchedule{}, 100.0, 0.0, mc);
        const double disc = std::exp(-kMarket.rate * 1.0);
        double mean = 0.0, m2 = 0.0;
        for (std::size_t p = 0; p < paths.n_paths; ++p) {
            const double v = disc * std::max(kStrike - paths.at(p, 1), 0.0);
            mean += v;
            m2 += v * v;
        }
        mean /= paths.n_paths;
        const double var = m2 / paths.n_paths - mean * mean;
        const double se = std::sqrt(var / paths.n_paths);
        CHECK(std::abs(mean - 9.832208562475877) <= 3.0 * se);
    }
    SUBCASE("same seed reproduces paths bit for bit") {
        McParams mc;
        mc.n_paths = 500;
        mc.n_steps = 8;
        mc.seed = 42;
        const PathMatrix a = simulate_paths(spec, kMarket, DividendSchedule{}, 100.0, 0.0, mc);
        const PathMatrix b = simulate_paths(spec, kMarket, DividendSchedule{}, 100.0, 0.0, mc);
        CHECK(a.values == b.values);
        mc.seed = 43;
        const PathMatrix c = simulate_paths(spec, kMarket, DividendSchedule{}, 100.0, 0.0, mc);
        CHECK(a.values != c.values);
    }
    SUBCASE("dividends off the step grid are rejected") {
        McParams mc;
        mc.n_paths = 10;
        mc.n_steps = 3;
        DividendSchedule sched;
        sched.events.push_back({0.5, DividendFunction::identity()});  // not on thirds
        CHECK_THROWS_AS(simulate_paths(spec, kMarket, sched, 100.0, 0.0, mc),
                        DateNotOnStepGrid);
    }
}

TEST_CASE("step counts aligned to dividend dates") {
    DividendSchedule sched;
    sched.events.push_back({1.0, DividendFunction::identity()});
    CHECK(steps_covering_dates(0.0, 2.0, sched, 10) == 10);  // 1.0 = 5th of 10 steps

    DividendSchedule odd;
    odd.events.push_back({0.7, DividendFunction::identity()});
    CHECK(steps_covering_dates(0.0, 2.0, odd, 10) == 20);  // 0.7 = 7th of 20 steps

    DividendSchedule thirds;
    thirds.events.push_back({1.0 / 3.0, DividendFunction::identity()});
    CHECK(steps_covering_dates(0.0, 1.0, thirds, 10) == 12);

    DividendSchedule awkward;
    awkward.events.push_back({0.1234567, DividendFunction::identity()});
    CHECK_THROWS_AS(steps_covering_dates(0.0, 2.0, awkward, 10), DateNotOnStepGrid);
}

TEST_CASE("Longstaff-Schwartz estimate") {
    const OptionSpec spec = make_spec(1.0);
    GridSpec gs;
    gs.nodes = 1200;
    const PriceGrid grid = PriceGrid::make(spec, kMarket, gs);

    SUBCASE("no dividends: within max(3 SE, 0.2% of K) of the PDE value") {
        const MultiSegmentSolution pde =
            price_american_pde(spec, kMarket, DividendSchedule{}, grid, TimeGridSpec{});
        McParams mc;
        mc.n_paths = 100000;
        mc.n_steps = 50;
        mc.seed = 1;
        const LsEstimate est = price_ls(spec, kMarket, DividendSchedule{}, 100.0, 0.0, mc);
        const double tol = std::max(3.0 * est.std_error, 2e-3 * kStrike);
        CHECK(std::abs(est.value - pde.value_at(0.0, 100.0)) <= tol);
        CHECK(est.std_error > 0.0);
        CHECK(est.n_paths == mc.n_paths);
    }
    SUBCASE("single proportional dividend: within max(3 SE, 0.3% of K)") {
        const OptionSpec spec2 = make_spec(2.0);
        DividendSchedule sched;
        sched.events.push_back({1.0, DividendFunction::proportional(0.8)});
        const PriceGrid grid2 = PriceGrid::make(spec2, kMarket, GridSpec{});
        const MultiSegmentSolution pde =
            price_american_pde(spec2, kMarket, sched, grid2, TimeGridSpec{});
        McParams mc;
        mc.n_paths = 100000;
        mc.n_steps = 50;
        mc.seed = 1;
        const LsEstimate est = price_ls(spec2, kMarket, sched, 100.0, 0.0, mc);
        const double tol = std::max(3.0 * est.std_error, 3e-3 * kStrike);
        CHECK(std::abs(est.value - pde.value_at(0.0, 100.0)) <= tol);
    }
    SUBCASE("deterministic in the seed") {
        McParams mc;
        mc.n_paths = 20000;
        mc.n_steps = 25;
        mc.seed = 5;
        const LsEstimate a = price_ls(spec, kMarket, DividendSchedule{}, 100.0, 0.0, mc);
        const LsEstimate b = price_ls(spec, kMarket, DividendSchedule{}, 100.0, 0.0, mc);
        CHECK(a.value == b.value);
        CHECK(a.std_error == b.std_error);
    }
    SUBCASE("deep out of the money: small nonnegative value") {
        McParams mc;
        mc.n_paths = 20000;
        mc.n_steps = 25;
        mc.seed = 3;
        const LsEstimate est = price_ls(spec, kMarket, DividendSchedule{}, 400.0, 0.0, mc);
        CHECK(est.value >= 0.0);
        CHECK(est.value < 0.5);
    }
}
