#pragma once

#include <stdexcept>
#include <string>

namespace ilbrl {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates a documented precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A model (MDP, policy, dataset) violates one of its invariants.
class ModelError : public Error {
public:
    using Error::Error;
};

/// The Markov chain induced by a policy is reducible or periodic.
class ErgodicityError : public Error {
public:
    using Error::Error;
};

/// A structural assumption of the analysis does not hold, e.g. repeated
/// eigenvalues of a transition matrix.
class AssumptionError : public Error {
public:
    using Error::Error;
};

/// An iterative procedure stopped before reaching its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// The exploratory rollout exhausted its step budget before every
/// state-action bucket was filled.
class CoverageError : public Error {
public:
    CoverageError(const std::string& what, long long steps_used)
        : Error(what), steps_used_(steps_used) {}

    long long steps_used() const noexcept { return steps_used_; }

private:
    long long steps_used_;
};

/// The parameter planner could not produce a feasible budget.
class PlanningError : public Error {
public:
    using Error::Error;
};

/// Malformed input while reading one of the text formats.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace ilbrl
