#pragma once

#include <stdexcept>
#include <string>

namespace magrelax {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller-supplied argument violates a documented precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// A sector is larger than the dense-algebra path accepts.
class CapacityError : public Error {
public:
    CapacityError(const std::string& what, std::size_t dimension, std::size_t limit)
        : Error(what), dimension_(dimension), limit_(limit) {}

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t limit() const noexcept { return limit_; }

private:
    std::size_t dimension_;
    std::size_t limit_;
};

// Constraint targets cannot be met by any admissible set of populations.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

// An iterative solver stopped before reaching its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}

    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

} // namespace magrelax
