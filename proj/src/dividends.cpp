#include "amdiv/dividends.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "amdiv/errors.hpp"

namespace amdiv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_price(double x) {
    if (x < 0.0 || !std::isfinite(x))
        throw std::domain_error("DividendFunction: price must be finite and >= 0");
}

}  // namespace

DividendFunction DividendFunction::proportional(double rho) {
    if (!(rho > 0.0 && rho < 1.0))
        throw std::invalid_argument("proportional dividend: rho must lie in (0, 1)");
    return DividendFunction(DividendFamily::proportional, rho, 0.0, 0.0);
}

DividendFunction DividendFunction::constant_cash(double amount) {
    if (!(amount > 0.0))
        throw std::invalid_argument("constant dividend: amount must be > 0");
    return DividendFunction(DividendFamily::constant_cash, amount, 0.0, 0.0);
}

DividendFunction DividendFunction::mixed(double a, double b, double c) {
    if (a < 0.0 || b < 0.0 || c < 0.0)
        throw std::invalid_argument("mixed dividend: a, b, c must be >= 0");
    if (c > 1.0) throw std::invalid_argument("mixed dividend: c must be <= 1");
    return DividendFunction(DividendFamily::mixed, a, b, c);
}

DividendFunction DividendFunction::identity() {
    return DividendFunction(DividendFamily::identity, 0.0, 0.0, 0.0);
}

DividendFunction DividendFunction::threshold(double b, double d0) {
    if (!(b > 0.0 && b <= 1.0))
        throw std::invalid_argument("threshold dividend: b must lie in (0, 1]");
    if (!(d0 > 0.0)) throw std::invalid_argument("threshold dividend: d0 must be > 0");
    return DividendFunction(DividendFamily::threshold, b, d0, 0.0);
}

double DividendFunction::operator()(double x) const {
    require_price(x);
    switch (family_) {
        case DividendFamily::proportional:
            return (1.0 - a_) * x;
        case DividendFamily::constant_cash:
            return std::min(a_, x);
        case DividendFamily::mixed:
            return std::min(a_ + b_ * x, c_ * x);
        case DividendFamily::identity:
            return x;
        case DividendFamily::threshold:
            return a_ * std::max(x - b_, 0.0);
    }
    return 0.0;
}

double DividendFunction::left_derivative(double x) const {
    require_price(x);
    switch (family_) {
        case DividendFamily::proportional:
            return 1.0 - a_;
        case DividendFamily::constant_cash:
            // kink at x = amount; left derivative there is still 1
            return x <= a_ ? 1.0 : 0.0;
        case DividendFamily::mixed: {
            if (x == 0.0) return a_ == 0.0 ? std::min(b_, c_) : c_;
            // D = c x while c x <= a + b x, i.e. below the crossing point
            const double lhs = c_ * x, rhs = a_ + b_ * x;
            if (lhs < rhs) return c_;
            if (lhs > rhs) return b_;
            return c_;  // at the crossing the left branch is the cheaper line c x
        }
        case DividendFamily::identity:
            return 1.0;
        case DividendFamily::threshold:
            return x <= b_ ? 0.0 : a_;
    }
    return 0.0;
}

bool DividendFunction::is_positive() const {
    switch (family_) {
        case DividendFamily::proportional:
        case DividendFamily::constant_cash:
        case DividendFamily::identity:
            return true;
        case DividendFamily::mixed:
            return c_ > 0.0 && (a_ > 0.0 || b_ > 0.0);
        case DividendFamily::threshold:
            return false;
    }
    return false;
}

bool DividendFunction::is_concave() const {
    // min of affine functions is concave; threshold is b(x-d0)^+ which is convex
    // (and not affine), hence not concave.
    return family_ != DividendFamily::threshold;
}

double DividendFunction::zero_radius() const {
    switch (family_) {
        case DividendFamily::threshold:
            return b_;
        case DividendFamily::mixed:
            return is_positive() ? 0.0 : kInf;
        default:
            return 0.0;
    }
}

double DividendFunction::near_zero_slope() const {
    switch (family_) {
        case DividendFamily::proportional:
            return 1.0 - a_;
        case DividendFamily::constant_cash:
        case DividendFamily::identity:
            return 1.0;
        case DividendFamily::mixed:
            return a_ > 0.0 ? c_ : std::min(b_, c_);
        case DividendFamily::threshold:
            return 0.0;
    }
    return 0.0;
}

double DividendFunction::linear_radius() const {
    switch (family_) {
        case DividendFamily::proportional:
        case DividendFamily::identity:
            return kInf;
        case DividendFamily::constant_cash:
            return a_;
        case DividendFamily::mixed:
            if (a_ == 0.0) return kInf;         // D = min(b,c) x everywhere
            if (c_ <= b_) return kInf;          // c x never exceeds a + b x
            return a_ / (c_ - b_);              // crossing of the two lines
        case DividendFamily::threshold:
            return b_;  // D == 0 (slope 0) on [0, d0]
    }
    return 0.0;
}

double DividendFunction::inf_ratio() const {
    if (!is_positive())
        throw NotPositiveDividend("inf_ratio: dividend vanishes on part of (0, inf): " +
                                  describe());
    switch (family_) {
        case DividendFamily::proportional:
            return 1.0 / (1.0 - a_);
        case DividendFamily::constant_cash:
        case DividendFamily::identity:
            return 1.0;  // x / min(D, x) and x / x both reach 1
        case DividendFamily::mixed:
            // x / D = max(x / (a + b x), 1 / c); the first term is increasing in x
            // and tends to 1/b, so the infimum is 1/c (attained near zero when a>0;
            // when a == 0 the ratio is constant 1/min(b, c)).
            return a_ > 0.0 ? 1.0 / c_ : 1.0 / std::min(b_, c_);
        case DividendFamily::threshold:
            break;  // unreachable: not positive
    }
    return kInf;
}

std::string DividendFunction::describe() const {
    std::ostringstream out;
    switch (family_) {
        case DividendFamily::proportional:
            out << "proportional(rho=" << a_ << ")";
            break;
        case DividendFamily::constant_cash:
            out << "constant(amount=" << a_ << ")";
            break;
        case DividendFamily::mixed:
            out << "mixed(a=" << a_ << ", b=" << b_ << ", c=" << c_ << ")";
            break;
        case DividendFamily::identity:
            out << "identity";
            break;
        case DividendFamily::threshold:
            out << "threshold(b=" << a_ << ", d0=" << b_ << ")";
            break;
    }
    return out.str();
}

double inf_ratio_scan(const DividendFunction& df, double x_lo, double x_hi, int n) {
    if (!(x_lo > 0.0 && x_hi > x_lo) || n < 2)
        throw std::invalid_argument("inf_ratio_scan: need 0 < x_lo < x_hi and n >= 2");
    const double step = std::log(x_hi / x_lo) / (n - 1);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double x = x_lo * std::exp(step * i);
        const double d = df(x);
        if (d > 0.0) best = std::min(best, x / d);
    }
    return best;
}

ScheduleValidation validate_schedule(const DividendSchedule& schedule, const OptionSpec& spec,
                                     int sample_count) {
    spec.validate();
    if (sample_count < 2) throw std::invalid_argument("validate_schedule: sample_count >= 2");

    ScheduleValidation out;
    using Code = ScheduleViolation::Code;

    for (std::size_t i = 0; i < schedule.events.size(); ++i) {
        const double d = schedule.events[i].date;
        if (!(d > 0.0 && d < spec.maturity)) {
            std::ostringstream msg;
            msg << "dividend date " << d << " outside (0, " << spec.maturity << ")";
            out.violations.push_back({Code::DateOutOfRange, i, d, msg.str()});
        }
        if (i > 0 && !(d > schedule.events[i - 1].date)) {
            std::ostringstream msg;
            msg << "dividend dates not strictly increasing at index " << i;
            out.violations.push_back({Code::DatesNotDistinct, i, d, msg.str()});
        }
    }

    // Re-verify the axioms numerically: D >= 0 non-decreasing and x - D(x) >= 0
    // non-decreasing over a wide log-spaced price scan.
    const double x_lo = spec.strike * 1e-6;
    const double x_hi = spec.strike * 1e2;
    const double step = std::log(x_hi / x_lo) / (sample_count - 1);
    const double slack = 1e-12 * spec.strike;

    for (std::size_t i = 0; i < schedule.events.size(); ++i) {
        const DividendFunction& df = schedule.events[i].function;
        double prev_d = df(0.0), prev_keep = 0.0;
        bool bad = false;
        for (int k = 0; k < sample_count && !bad; ++k) {
            const double x = x_lo * std::exp(step * k);
            const double d = df(x);
            const double keep = x - d;
            if (d < -slack || keep < -slack || d < prev_d - slack || keep < prev_keep - slack) {
                std::ostringstream msg;
                msg << "dividend " << df.describe() << " violates monotonicity axioms near x="
                    << x;
                out.violations.push_back({Code::MonotonicityViolation, i, x, msg.str()});
                bad = true;
            }
            prev_d = d;
            prev_keep = keep;
        }

        out.structure.push_back({df.is_positive(), df.is_concave(), df.zero_radius(),
                                 df.near_zero_slope(), df.linear_radius()});
    }

    out.ok = out.violations.empty();
    return out;
}

}  // namespace amdiv
