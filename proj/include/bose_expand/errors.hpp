#ifndef BOSE_EXPAND_ERRORS_HPP
#define BOSE_EXPAND_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bose_expand {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A requested basis or mode set exceeds its configured budget.
class CapacityError : public Error {
public:
    CapacityError(const std::string& what, double required, double budget)
        : Error(what + " (required " + std::to_string(required) + ", budget " +
                std::to_string(budget) + ")"),
          required_(required), budget_(budget) {}
    double required() const { return required_; }
    double budget() const { return budget_; }

private:
    double required_;
    double budget_;
};

/// Malformed or physically inadmissible input (configuration, potential, observable).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An iterative method hit its iteration or step budget.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what + " (last residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// The operation is only defined for the homogeneous torus condensate.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// A state left the space it is allowed to occupy (excitation sectors above N, cutoff too small).
class TruncationError : public Error {
public:
    using Error::Error;
};

/// Bogoliubov stability A(p) > |B(p)| or a resolvent denominator failed.
class InstabilityError : public Error {
public:
    using Error::Error;
};

/// Least-squares fit could not be performed on the supplied data.
class FitError : public Error {
public:
    using Error::Error;
};

} // namespace bose_expand

#endif
