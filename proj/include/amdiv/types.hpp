#pragma once

#include <stdexcept>

namespace amdiv {

// Flat market: constant short rate and lognormal volatility.
struct MarketParams {
    double rate = 0.0;        // continuously compounded, r > 0
    double volatility = 0.0;  // sigma > 0

    void validate() const {
        if (!(rate > 0.0)) throw std::invalid_argument("MarketParams: rate must be > 0");
        if (!(volatility > 0.0))
            throw std::invalid_argument("MarketParams: volatility must be > 0");
    }
};

// American put contract and initial condition.
struct OptionSpec {
    double strike = 0.0;    // K > 0
    double maturity = 0.0;  // T > 0, in years
    double spot = 0.0;      // S_0 >= 0

    void validate() const {
        if (!(strike > 0.0)) throw std::invalid_argument("OptionSpec: strike must be > 0");
        if (!(maturity > 0.0)) throw std::invalid_argument("OptionSpec: maturity must be > 0");
        if (spot < 0.0) throw std::invalid_argument("OptionSpec: spot must be >= 0");
    }

    double payoff(double x) const {
        const double v = strike - x;
        return v > 0.0 ? v : 0.0;
    }
};

}  // namespace amdiv
