#pragma once

#include "amdiv/boundary.hpp"
#include "amdiv/grid.hpp"
#include "amdiv/pde.hpp"
#include "amdiv/surface.hpp"
#include "amdiv/types.hpp"

namespace amdiv {

// Length of the pre-dividend interval on which early exercise is never
// optimal under the escrowed model: (1/r) ln((K + D) / K).
double no_exercise_window(double strike, double dividend, double rate);

// American put when a cash dividend D is escrowed: before the date the asset
// splits into y = x - D e^{-r(date - t)} (geometric Brownian motion) plus the
// riskless escrow, and exercising pays (K - x)^+ = (K_eff(t) - y)^+ with the
// shrunken effective strike K_eff(t) = K - D e^{-r(date - t)}.
struct EscrowedSolution {
    double strike = 0.0, rate = 0.0;
    double dividend = 0.0, date = 0.0;
    double window = 0.0;       // no-exercise window length
    ValueSurface base;         // dividend-free put on [date, T], in x
    ValueSurface escrow;       // [t_lo, date], in the escrowed variable y

    double escrow_offset(double t) const;     // D e^{-r(date - t)}
    double effective_strike(double t) const;  // K - escrow_offset(t)

    // Value at (t, x). For t < date requires x >= escrow_offset(t)
    // (EscrowViolation otherwise: such an x cannot carry the escrow).
    double value_at(double t, double x) const;
};

EscrowedSolution price_escrowed(const OptionSpec& spec, const MarketParams& params,
                                double dividend, double date, double t_lo,
                                const GridSpec& gs = {}, const TimeGridSpec& ts = {},
                                const PdeParams& pde = {});

// Exercise boundary of the escrow segment in the escrowed variable y; levels
// are 0 on slices where the exercise region is empty. Add escrow_offset(t) to
// translate a positive level back to the cum-escrow price.
BoundaryCurve escrowed_boundary(const EscrowedSolution& sol, const ExtractParams& ep = {});

}  // namespace amdiv
