#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "amdiv/grid.hpp"
#include "amdiv/interp.hpp"
#include "amdiv/types.hpp"

using namespace amdiv;

namespace {

const MarketParams kMarket{0.04, 0.3};

OptionSpec make_spec() {
    OptionSpec spec;
    spec.strike = 100.0;
    spec.maturity = 2.0;
    spec.spot = 100.0;
    return spec;
}

}  // namespace

TEST_CASE("price grid construction") {
    const OptionSpec spec = make_spec();
    GridSpec gs;
    gs.nodes = 800;
    const PriceGrid grid = PriceGrid::make(spec, kMarket, gs);

    SUBCASE("strictly increasing from zero with roughly the requested budget") {
        // the patch/log split rounds, so the total can undershoot by a few percent
        CHECK(grid.size() >= static_cast<std::size_t>(0.9 * gs.nodes));
        CHECK(grid[0] == 0.0);
        for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
    }
    SUBCASE("covers the 4K floor and the far-field quantile") {
        const double quantile_reach =
            spec.spot * std::exp(kMarket.volatility * gs.quantile *
                                 std::sqrt(spec.maturity));
        CHECK(grid.x_max() >= 4.0 * spec.strike);
        CHECK(grid.x_max() >= quantile_reach * 0.999);
    }
    SUBCASE("locate and cell width are consistent") {
        for (double x : {0.0, 0.37, 1.0, 42.0, 100.0, grid.x_max()}) {
            const std::size_t i = grid.locate(x);
            CHECK(grid[i] <= x + 1e-12);
            if (i + 1 < grid.size()) {
                CHECK(x <= grid[i + 1] + 1e-12);
                CHECK(grid.cell_width(x) == doctest::Approx(grid[i + 1] - grid[i]));
            }
        }
        // out-of-range queries clamp rather than throw
        CHECK(grid.locate(-5.0) == 0);
        CHECK(grid.locate(grid.x_max() * 2.0) == grid.size() - 1);
    }
    SUBCASE("zero refinement shrinks the near-zero cells") {
        GridSpec fine = gs;
        fine.zero_refine = 8.0;
        const PriceGrid refined = PriceGrid::make(spec, kMarket, fine);
        CHECK(refined.cell_width(0.1) < grid.cell_width(0.1));
        CHECK(refined.cell_width(0.1) <= grid.cell_width(0.1) / 4.0);
    }
    SUBCASE("explicit node lists are validated") {
        CHECK_THROWS_AS(PriceGrid::from_nodes({0.0, 1.0, 1.0, 2.0}), std::invalid_argument);
        CHECK_THROWS_AS(PriceGrid::from_nodes({1.0, 2.0}), std::invalid_argument);
        const PriceGrid g = PriceGrid::from_nodes({0.0, 1.0, 2.5, 7.0});
        CHECK(g.size() == 4);
        CHECK(g.x_max() == doctest::Approx(7.0));
    }
}

TEST_CASE("time grid construction") {
    SUBCASE("graded grid: fine near the segment end, capped coarsening") {
        TimeGridSpec ts;
        ts.dt_fine = 1e-3;
        ts.dt_max = 1e-2;
        const std::vector<double> t = make_time_grid(0.0, 1.0, ts);
        REQUIRE(t.size() >= 3);
        CHECK(t.front() == doctest::Approx(0.0));
        CHECK(t.back() == doctest::Approx(1.0));
        for (std::size_t k = 1; k < t.size(); ++k) {
            const double dt = t[k] - t[k - 1];
            CHECK(dt > 0.0);
            // the first step may absorb a sliver, stretching it to 1.25 dt_max
            CHECK(dt <= 1.25 * ts.dt_max * (1.0 + 1e-9));
        }
        // last step (next to the terminal condition) is the fine one
        CHECK(t[t.size() - 1] - t[t.size() - 2] <= ts.dt_fine * (1.0 + 1e-9));
    }
    SUBCASE("uniform grid has exactly the requested steps") {
        TimeGridSpec ts;
        ts.uniform = true;
        ts.uniform_steps = 40;
        const std::vector<double> t = make_time_grid(0.5, 1.5, ts);
        REQUIRE(t.size() == 41);
        for (std::size_t k = 0; k < t.size(); ++k) {
            CHECK(t[k] == doctest::Approx(0.5 + k * (1.0 / 40.0)).epsilon(1e-12));
        }
    }
    SUBCASE("degenerate inputs") {
        CHECK_THROWS_AS(make_time_grid(1.0, 1.0, TimeGridSpec{}), std::invalid_argument);
        TimeGridSpec bad;
        bad.dt_fine = 0.0;
        CHECK_THROWS_AS(make_time_grid(0.0, 1.0, bad), std::invalid_argument);
        // a uniform request below 2 steps is clamped, not rejected
        TimeGridSpec tiny;
        tiny.uniform = true;
        tiny.uniform_steps = 0;
        CHECK(make_time_grid(0.0, 1.0, tiny).size() == 3);
    }
}

TEST_CASE("monotone cubic interpolation") {
    SUBCASE("reproduces linear data exactly and preserves monotonicity") {
        std::vector<double> x{0.0, 1.0, 2.0, 4.0, 8.0};
        std::vector<double> lin{3.0, 2.5, 2.0, 1.0, -1.0};
        const MonotoneCubic f(x, lin);
        for (double q = 0.0; q <= 8.0; q += 0.1) {
            CHECK(f(q) == doctest::Approx(3.0 - 0.5 * q).epsilon(1e-12));
        }
        CHECK(f.derivative(3.0) == doctest::Approx(-0.5).epsilon(1e-9));
    }
    SUBCASE("no overshoot on monotone convex data") {
        // samples of the put payoff (K - x)^+: interpolant must stay within
        // the data range and keep the slope in [-1, 0]
        std::vector<double> x, y;
        for (double v = 0.0; v <= 200.0; v += 12.5) {
            x.push_back(v);
            y.push_back(std::max(100.0 - v, 0.0));
        }
        const MonotoneCubic f(x, y);
        double prev = f(0.0);
        for (double q = 0.0; q <= 200.0; q += 0.5) {
            const double v = f(q);
            CHECK(v <= prev + 1e-12);   // nonincreasing
            CHECK(v >= -1e-12);         // no undershoot below the data floor
            CHECK(v <= 100.0 + 1e-12);  // no overshoot above the data cap
            prev = v;
        }
    }
    SUBCASE("clamped extrapolation") {
        const MonotoneCubic f({0.0, 1.0, 2.0}, {1.0, 2.0, 5.0});
        CHECK(f(-1.0) == doctest::Approx(1.0));
        CHECK(f(3.0) == doctest::Approx(5.0));
    }
    SUBCASE("input validation") {
        CHECK_THROWS_AS(MonotoneCubic({0.0, 0.0, 1.0}, {1.0, 2.0, 3.0}),
                        std::invalid_argument);
        CHECK_THROWS_AS(MonotoneCubic({0.0, 1.0}, {1.0}), std::invalid_argument);
    }
}

TEST_CASE("sorted linear interpolation") {
    const std::vector<double> x{0.0, 1.0, 3.0};
    const std::vector<double> y{0.0, 2.0, 2.0};
    CHECK(lerp_sorted(x, y, 0.5) == doctest::Approx(1.0));
    CHECK(lerp_sorted(x, y, 2.0) == doctest::Approx(2.0));
    CHECK(lerp_sorted(x, y, -1.0) == doctest::Approx(0.0));  // clamped
    CHECK(lerp_sorted(x, y, 9.0) == doctest::Approx(2.0));   // clamped
}
