#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tolpred {

// Base of every error raised by the library. The CLI maps subclasses onto
// exit codes, so new failure kinds should derive from one of these.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A parameter or argument lies outside the domain of the operation.
class DomainError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// Data that admit no finite estimate (e.g. all-equal gamma sample).
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

// Complete separation in a binomial fit (a zero cell in the 2x2 table).
class SeparationError : public Error {
public:
    using Error::Error;
};

// An iterative solver failed to converge. Carries the iterate trace.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> trace = {})
        : Error(what), trace_(std::move(trace)) {}

    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

// A constraint on fitted values was violated (e.g. a negative fitted mean
// under an identity link).
class ConstraintError : public Error {
public:
    using Error::Error;
};

// Missing or inconsistent run configuration (e.g. no future site schedule).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed input file. line() is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0) : Error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A horizon search ran past its configured maximum.
class HorizonExceededError : public Error {
public:
    using Error::Error;
};

// A simulation request exceeded the configured run budget.
class SimulationBudgetError : public Error {
public:
    using Error::Error;
};

}  // namespace tolpred
