#pragma once

#include <limits>
#include <string>
#include <vector>

#include "amdiv/types.hpp"

namespace amdiv {

enum class DividendFamily { proportional, constant_cash, mixed, identity, threshold };

// One dividend policy D(x): amount paid when the pre-dividend price is x.
// All families satisfy D >= 0, D non-decreasing and x - D(x) >= 0 non-decreasing,
// which validate_schedule re-checks by sampling.
class DividendFunction {
public:
    // D(x) = (1 - rho) x, rho in (0, 1)
    static DividendFunction proportional(double rho);
    // D(x) = min(amount, x), amount > 0
    static DividendFunction constant_cash(double amount);
    // D(x) = min(a + b x, c x), a,b,c >= 0, c <= 1
    static DividendFunction mixed(double a, double b, double c);
    // D(x) = x (the whole price)
    static DividendFunction identity();
    // D(x) = b max(x - d0, 0), b in (0, 1], d0 > 0
    static DividendFunction threshold(double b, double d0);

    DividendFamily family() const { return family_; }

    // Dividend paid at pre-dividend price x (x >= 0 required).
    double operator()(double x) const;

    // Left derivative D'_-(x); lies in [0, 1] for every family.
    double left_derivative(double x) const;

    // ----- structural profile used by the boundary theory -----

    // D(x) > 0 for every x > 0?
    bool is_positive() const;
    // Concave on [0, inf)?
    bool is_concave() const;
    // Largest d0 >= 0 with D == 0 on [0, d0].
    double zero_radius() const;
    // D(x) = near_zero_slope() * x on [0, linear_radius()); slope in [0, 1].
    double near_zero_slope() const;
    double linear_radius() const;

    // mu = inf_{x > 0} x / D(x) (>= 1), closed form per family.
    // Throws NotPositiveDividend when D vanishes somewhere on (0, inf).
    double inf_ratio() const;

    // Parameters in declaration order (for reporting / serialization).
    double param_a() const { return a_; }
    double param_b() const { return b_; }
    double param_c() const { return c_; }

    std::string describe() const;

private:
    DividendFunction(DividendFamily f, double a, double b, double c)
        : family_(f), a_(a), b_(b), c_(c) {}

    DividendFamily family_;
    double a_ = 0.0, b_ = 0.0, c_ = 0.0;
};

// Numeric cross-check of inf_ratio: min of x / D(x) over n log-spaced points
// spanning [x_lo, x_hi].
double inf_ratio_scan(const DividendFunction& df, double x_lo, double x_hi, int n);

struct DividendEvent {
    double date = 0.0;  // in (0, T)
    DividendFunction function = DividendFunction::identity();
};

// Dates strictly increasing; paid at the instants in `events`.
struct DividendSchedule {
    std::vector<DividendEvent> events;

    bool empty() const { return events.empty(); }
    std::size_t size() const { return events.size(); }
};

struct ScheduleViolation {
    enum class Code { DateOutOfRange, DatesNotDistinct, MonotonicityViolation };
    Code code;
    std::size_t event_index;
    double where;  // offending date or price sample
    std::string message;
};

struct DividendStructure {
    bool positive = false;
    bool concave = false;
    double zero_radius = 0.0;
    double near_zero_slope = 0.0;
    double linear_radius = 0.0;
};

struct ScheduleValidation {
    bool ok = false;
    std::vector<ScheduleViolation> violations;
    std::vector<DividendStructure> structure;  // one per event, schedule order
};

// Checks dates (strictly inside (0, T), strictly increasing) and re-verifies the
// monotonicity axioms of each D by scanning sample_count log-spaced prices.
ScheduleValidation validate_schedule(const DividendSchedule& schedule, const OptionSpec& spec,
                                     int sample_count = 10000);

}  // namespace amdiv
