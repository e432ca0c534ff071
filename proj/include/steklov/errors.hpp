#pragma once

#include <stdexcept>
#include <string>

namespace steklov {

// Base for every error thrown by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid user input: bad curve data, bad config fields, bad parameter ranges.
struct ConfigError : Error {
    using Error::Error;
};

// Numerical failure during a computation: degenerate curve, resolvent pole,
// conditioning breakdown, fit failure.
struct NumericalError : Error {
    using Error::Error;
};

struct DegenerateCurveError : NumericalError {
    using NumericalError::NumericalError;
};

struct SingularSymbolError : NumericalError {
    using NumericalError::NumericalError;
};

struct ResolventPoleError : NumericalError {
    using NumericalError::NumericalError;
};

struct UnsupportedOrderError : NumericalError {
    using NumericalError::NumericalError;
};

struct ConditioningError : NumericalError {
    using NumericalError::NumericalError;
};

struct InsufficientModesError : NumericalError {
    using NumericalError::NumericalError;
};

struct UnsupportedDomainError : NumericalError {
    using NumericalError::NumericalError;
};

struct FitError : NumericalError {
    using NumericalError::NumericalError;
};

struct InversionError : NumericalError {
    using NumericalError::NumericalError;
};

struct DimensionError : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace steklov
