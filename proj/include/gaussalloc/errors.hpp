#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gaussalloc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Precondition or invariant violation in caller-supplied data.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature ran out of refinement budget before reaching the
/// requested tolerance. Carries the best available estimate.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double best_estimate, double error_estimate)
        : Error(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double best_estimate_;
    double error_estimate_;
};

/// An enumeration would exceed its configured node budget.
class BudgetExceeded : public Error {
public:
    BudgetExceeded(const std::string& what, std::uint64_t required, std::uint64_t budget)
        : Error(what), required_(required), budget_(budget) {}

    std::uint64_t required() const noexcept { return required_; }
    std::uint64_t budget() const noexcept { return budget_; }

private:
    std::uint64_t required_;
    std::uint64_t budget_;
};

/// Malformed or invariant-violating document. `path()` names the offending
/// field, e.g. "means[2]" or "sets[0][1]".
class ParseError : public Error {
public:
    ParseError(std::string path, const std::string& message)
        : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class FactorizationError : public Error {
public:
    using Error::Error;
};

}  // namespace gaussalloc
