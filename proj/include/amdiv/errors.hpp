#pragma once

#include <stdexcept>
#include <string>

namespace amdiv {

// Base for all solver-side failures. Input validation uses std::invalid_argument;
// these are raised when a numerical routine cannot honour its contract.
class EngineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Binomial step with e^{r dt} outside (d, u): no risk-neutral weight exists.
class DegenerateStep : public EngineError {
public:
    using EngineError::EngineError;
};

// Projected SOR failed to reach tolerance within the iteration budget.
class PsorNonConvergence : public EngineError {
public:
    PsorNonConvergence(const std::string& what, int iterations)
        : EngineError(what), iterations_(iterations) {}
    int iterations() const { return iterations_; }

private:
    int iterations_ = 0;
};

// Grid too small / malformed for the requested operation.
class GridTooCoarse : public EngineError {
public:
    using EngineError::EngineError;
};

// Least-squares continuation regression is genuinely rank-deficient
// (not enough usable in-the-money samples).
class RegressionSingular : public EngineError {
public:
    using EngineError::EngineError;
};

// A dividend date does not coincide with a simulation step time.
class DateNotOnStepGrid : public EngineError {
public:
    using EngineError::EngineError;
};

// Escrowed-model transform evaluated where the escrow would make the
// de-escrowed price negative.
class EscrowViolation : public EngineError {
public:
    using EngineError::EngineError;
};

// Boundary-analysis preconditions.
class BoundaryAtZero : public EngineError {
public:
    using EngineError::EngineError;
};

class InsufficientNodes : public EngineError {
public:
    using EngineError::EngineError;
};

class EmptyWindow : public EngineError {
public:
    using EngineError::EngineError;
};

// Dividend-function structural preconditions (e.g. inf-ratio of a family
// that vanishes near zero).
class NotPositiveDividend : public EngineError {
public:
    using EngineError::EngineError;
};

// Scenario / configuration file cannot be parsed or fails validation. Kept
// outside the EngineError hierarchy: the engines never see such input.
class ConfigInvalid : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace amdiv
