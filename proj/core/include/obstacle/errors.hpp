#pragma once

#include <stdexcept>
#include <string>

namespace obstacle {

/// Violated operation precondition (bad data ordering, missing barrier, ...).
class PreconditionError : public std::invalid_argument {
public:
    explicit PreconditionError(const std::string& what)
        : std::invalid_argument(what) {}
};

/// Config / expression parse failure.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Iterative solver failure.
class SolverError : public std::runtime_error {
public:
    enum class Kind { NonConvergence, ContinuationStalled, MaxSweeps };

    SolverError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

}  // namespace obstacle
