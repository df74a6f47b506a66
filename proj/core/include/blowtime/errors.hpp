#pragma once

#include <stdexcept>
#include <string>

namespace blowtime {

// Base class for every error the toolkit raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An argument lies outside the mathematical domain of an operation
// (q <= 1, t <= 0, alpha >= 1/(N-1), ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// A parameter is outside a parametrization or recorded range.
class RangeError : public Error {
public:
    using Error::Error;
};

// Structurally invalid input: malformed specs, empty Gamma_1, bad partitions.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// Adaptive quadrature ran out of refinements before meeting its tolerance.
class QuadratureFailure : public Error {
public:
    QuadratureFailure(const std::string& what, double achieved_error)
        : Error(what), achieved_error_(achieved_error) {}

    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

// g(lambda) = y has no root with lambda > 1 (y exceeds E_q).
class NoRootError : public Error {
public:
    using Error::Error;
};

}  // namespace blowtime
