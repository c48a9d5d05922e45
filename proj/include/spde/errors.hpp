#pragma once

#include <stdexcept>
#include <string>

namespace spde {

/// A declared parameter violates one of the admissibility inequalities.
class ConstraintError : public std::runtime_error {
public:
    ConstraintError(std::string constraint, const std::string& detail)
        : std::runtime_error(detail + " (requires " + constraint + ")"),
          constraint_(std::move(constraint)) {}

    const std::string& constraint() const { return constraint_; }

private:
    std::string constraint_;
};

/// A non-finite value appeared while accumulating a step; names the term.
class OverflowError : public std::runtime_error {
public:
    explicit OverflowError(std::string term)
        : std::runtime_error("non-finite value in step term: " + term),
          term_(std::move(term)) {}

    const std::string& term() const { return term_; }

private:
    std::string term_;
};

/// A scheme path was requested whose preconditions were not verified.
class CommutativityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace spde
