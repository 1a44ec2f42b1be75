#pragma once

#include <stdexcept>
#include <string>

namespace sddetem {

// Model parameters violate the standing assumptions; message names the failed inequality.
class AssumptionViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Truncation policy override breaks an admissibility condition in strict mode, or a step
// size outside (0, delta_star] was requested from a strict policy.
class PolicyViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Drift-implicit step has no positive root (rhs + alpha*mu*delta <= 0) or the root solve
// failed its residual check. step_index() is the offending step, or -1 outside a solve.
class ImplicitStepFailure : public std::runtime_error {
public:
    explicit ImplicitStepFailure(const std::string& msg, long step = -1)
        : std::runtime_error(msg), step_(step) {}
    long step_index() const { return step_; }

private:
    long step_;
};

// Path aborted: a state magnitude exceeded the overflow guard.
class SolverFailure : public std::runtime_error {
public:
    explicit SolverFailure(const std::string& msg, long step = -1)
        : std::runtime_error(msg), step_(step) {}
    long step_index() const { return step_; }

private:
    long step_;
};

// Statistic requested on fewer samples than it is defined for.
class InsufficientSamples : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration input (CLI flag or config-file key); message names the offending key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sddetem
