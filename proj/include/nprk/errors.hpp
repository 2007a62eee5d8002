#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nprk {

/// Malformed input: bad level sequence, wrong tensor shape, violated precondition.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Arguments outside the mathematical domain of an operation (order <= 0, color mismatch, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A configured resource cap (tree count, naive-summation iterations) would be exceeded.
class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Nonlinear stage solve failed or produced non-finite values.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual_norm, std::vector<double> iterate)
        : std::runtime_error(what), residual_norm_(residual_norm), iterate_(std::move(iterate)) {}

    double residual_norm() const noexcept { return residual_norm_; }
    const std::vector<double>& iterate() const noexcept { return iterate_; }

private:
    double residual_norm_;
    std::vector<double> iterate_;
};

} // namespace nprk
