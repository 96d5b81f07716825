#pragma once

#include <string>
#include <vector>

#include "amdiv/config.hpp"

namespace amdiv {

enum class CheckStatus { pass, fail, skipped, error };

const char* check_status_name(CheckStatus s);

struct CheckResult {
    std::string id;          // stable slug, e.g. "boundary-exp-bound"
    std::string property;    // what is verified, in plain words
    double measured = 0.0;   // the quantity that was compared
    double threshold = 0.0;  // the limit it was compared against
    std::string comparison = "<=";  // how measured relates to threshold on pass
    CheckStatus status = CheckStatus::skipped;
    std::string detail;      // grid metadata, sub-measurements, or error text
};

struct CheckReport {
    std::string scenario;
    std::vector<CheckResult> entries;

    // True iff no entry failed or errored (skipped entries do not count).
    bool overall() const;
    int failures() const;

    std::string to_text() const;               // aligned human-readable table
    std::string to_json_string(int indent = 2) const;
};

// Run every applicable verification against the scenario: value-surface shape,
// boundary positivity / bounds / asymptotics, smooth contact, dividend-date
// continuity, operator residual decay, cross-engine and Monte Carlo agreement,
// and the escrowed-model window when the schedule allows it. Checks whose
// hypotheses the scenario does not meet are reported as skipped; engine errors
// are captured per entry without aborting the rest.
CheckReport run_suite(const Scenario& scenario);

}  // namespace amdiv
