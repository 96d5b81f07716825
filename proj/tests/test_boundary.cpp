#include <cmath>
#include <vector>

#include "doctest.h"

#include "amdiv/boundary.hpp"
#include "amdiv/closed_forms.hpp"
#include "amdiv/dividends.hpp"
#include "amdiv/errors.hpp"
#include "amdiv/grid.hpp"
#include "amdiv/surface.hpp"
#include "amdiv/types.hpp"

using namespace amdiv;

namespace {

const MarketParams kMarket{0.04, 0.3};
constexpr double kStrike = 100.0;

OptionSpec make_spec() {
    OptionSpec spec;
    spec.strike = kStrike;
    spec.maturity = 2.0;
    spec.spot = kStrike;
    return spec;
}

// Analytically known obstacle solution: value/boundary of the perpetual put.
ValueSurface perpetual_surface(int nodes = 1500) {
    const PerpetualPut pp(kStrike, kMarket);
    GridSpec gs;
    gs.nodes = nodes;
    ValueSurface s;
    s.grid = PriceGrid::make(make_spec(), kMarket, gs);
    s.times = {0.0, 0.25, 0.5, 0.75, 1.0};
    s.t_lo = 0.0;
    s.t_hi = 1.0;
    s.obstacle_tol = 1e-9 * kStrike;
    const std::size_t n = s.grid.size();
    s.values.resize(s.times.size() * n);
    s.exercise.resize(s.times.size() * n);
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const double x = s.grid[i];
            s.values[k * n + i] = pp.value(x);
            s.exercise[k * n + i] = x <= pp.boundary() ? 1 : 0;
        }
    }
    return s;
}

BoundaryCurve linear_curve(double slope, double t_d, int n) {
    BoundaryCurve curve;
    for (int k = 0; k < n; ++k) {
        const double t = t_d * k / n;  // last sample short of t_d
        curve.times.push_back(t);
        curve.levels.push_back(slope * (t_d - t));
        curve.refined.push_back(1);
    }
    curve.tolerance = 1e-7 * kStrike;
    return curve;
}

}  // namespace

TEST_CASE("boundary extraction recovers the perpetual boundary") {
    const ValueSurface s = perpetual_surface();
    const OptionSpec spec = make_spec();
    const BoundaryCurve curve = extract_boundary(s, spec);
    const double cbar = 47.05882352941177;

    REQUIRE(curve.size() == s.n_times());
    for (std::size_t k = 0; k < curve.size(); ++k) {
        CHECK(curve.times[k] == doctest::Approx(s.times[k]));
        CHECK(std::abs(curve.levels[k] - cbar) <= s.grid.cell_width(cbar) + 1e-6);
        CHECK(curve.refined[k] == 1);
    }
    CHECK(curve.tolerance > 0.0);
}

TEST_CASE("extraction refinement tightens with the grid") {
    const double cbar = 47.05882352941177;
    const BoundaryCurve coarse = extract_boundary(perpetual_surface(300), make_spec());
    const BoundaryCurve fine = extract_boundary(perpetual_surface(3000), make_spec());
    const double err_coarse = std::abs(coarse.levels[0] - cbar);
    const double err_fine = std::abs(fine.levels[0] - cbar);
    CHECK(err_fine <= err_coarse);
    CHECK(err_fine <= 0.05);
}

TEST_CASE("smooth contact slope on an analytically smooth surface") {
    const ValueSurface s = perpetual_surface();
    const BoundaryCurve curve = extract_boundary(s, make_spec());
    for (std::size_t k = 0; k < curve.size(); ++k) {
        const double slope = smooth_contact_slope(s, k, curve.levels[k], kStrike);
        CHECK(std::abs(slope + 1.0) <= 0.01);
    }
    SUBCASE("level at zero is a precondition violation") {
        CHECK_THROWS_AS(smooth_contact_slope(s, 0, 0.0, kStrike), BoundaryAtZero);
    }
}

TEST_CASE("asymptotic slope fit") {
    SUBCASE("recovers an exactly linear boundary") {
        const BoundaryCurve curve = linear_curve(20.0, 1.0, 400);
        const SlopeFit fit = asymptotic_slope(curve, 1.0, 0.0, 0.06);
        CHECK(fit.slope == doctest::Approx(20.0).epsilon(1e-9));
        CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(fit.samples >= 10);
    }
    SUBCASE("window with no samples throws") {
        const BoundaryCurve curve = linear_curve(20.0, 1.0, 10);
        CHECK_THROWS_AS(asymptotic_slope(curve, 1.0, 1e-9, 2e-9), EmptyWindow);
    }
    SUBCASE("default window scales with the segment") {
        const auto [lo, hi] = default_slope_window(0.0, 1.0, 5e-4);
        CHECK(lo == doctest::Approx(1e-3));
        CHECK(hi == doctest::Approx(0.05));
    }
}

TEST_CASE("boundary bound checks") {
    const OptionSpec spec = make_spec();
    GridSpec gs;
    gs.nodes = 900;
    const PriceGrid grid = PriceGrid::make(spec, kMarket, gs);
    const double cbar = 47.05882352941177;

    SUBCASE("proportional: a compliant curve passes all applicable bounds") {
        const auto df = DividendFunction::proportional(0.8);  // D = 0.2x, mu = 5
        // c = 18 (t_d - t): safely below both r K mu = 20 and the exponential bound
        const BoundaryCurve curve = linear_curve(18.0, 1.0, 600);
        const BoundCheckReport rep =
            check_bounds(curve, spec, kMarket, df, 1.0, cbar, grid);
        CHECK(rep.exp_bound_applicable);
        CHECK(rep.exp_bound_ok);
        CHECK(rep.exp_bound_min_margin >= 0.0);
        CHECK(rep.asymptote_applicable);
        CHECK(rep.asymptote_ok);
        CHECK(rep.asymptote_max_ratio <= 1.0);
        CHECK_FALSE(rep.cap_applicable);
        CHECK(rep.monotone_ok);
        CHECK(rep.monotone_samples >= 10);
    }
    SUBCASE("proportional: a curve breaching the near-date bound is caught") {
        const auto df = DividendFunction::proportional(0.8);
        const BoundaryCurve curve = linear_curve(40.0, 1.0, 600);  // twice r K mu
        const BoundCheckReport rep =
            check_bounds(curve, spec, kMarket, df, 1.0, cbar, grid);
        CHECK(rep.asymptote_applicable);
        CHECK_FALSE(rep.asymptote_ok);
        CHECK(rep.asymptote_max_ratio > 1.35);
    }
    SUBCASE("identity: the exponential bound is attained, slack absorbs extraction") {
        const auto df = DividendFunction::identity();
        BoundaryCurve curve;
        for (int k = 0; k < 400; ++k) {
            const double t = k / 400.0;
            curve.times.push_back(t);
            // exact bound K(1 - e^{-r(t_d - t)}), as the identity boundary attains
            curve.levels.push_back(kStrike * (1.0 - std::exp(-kMarket.rate * (1.0 - t))));
            curve.refined.push_back(1);
        }
        const BoundCheckReport rep =
            check_bounds(curve, spec, kMarket, df, 1.0, cbar, grid);
        CHECK(rep.exp_bound_applicable);
        CHECK(rep.exp_bound_ok);
    }
    SUBCASE("constant cash: exponential bound not applicable, asymptote still is") {
        const auto df = DividendFunction::constant_cash(5.0);  // mu = 1
        const BoundaryCurve curve = linear_curve(3.5, 1.0, 600);
        const BoundCheckReport rep =
            check_bounds(curve, spec, kMarket, df, 1.0, cbar, grid);
        CHECK_FALSE(rep.exp_bound_applicable);
        CHECK(rep.asymptote_applicable);
        CHECK(rep.asymptote_ok);
    }
    SUBCASE("threshold: tail cap against min(d0, cbar)") {
        const auto df = DividendFunction::threshold(0.5, 20.0);
        BoundaryCurve ok_curve;
        BoundaryCurve bad_curve;
        for (int k = 0; k < 500; ++k) {
            const double t = k / 500.0;
            ok_curve.times.push_back(t);
            bad_curve.times.push_back(t);
            ok_curve.levels.push_back(19.0);   // under the d0 = 20 cap
            bad_curve.levels.push_back(26.0);  // over it by several cells
            ok_curve.refined.push_back(1);
            bad_curve.refined.push_back(1);
        }
        const BoundCheckReport ok_rep =
            check_bounds(ok_curve, spec, kMarket, df, 1.0, cbar, grid);
        CHECK(ok_rep.cap_applicable);
        CHECK(ok_rep.cap_ok);
        const BoundCheckReport bad_rep =
            check_bounds(bad_curve, spec, kMarket, df, 1.0, cbar, grid);
        CHECK(bad_rep.cap_applicable);
        CHECK_FALSE(bad_rep.cap_ok);
        CHECK(bad_rep.cap_excess > 0.0);
    }
}
