#pragma once

#include <stdexcept>
#include <string>

namespace dicholin {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Mixing incompatible state spaces (dense vs bi-infinite, or mismatched dimensions).
struct ShapeError : Error {
    using Error::Error;
};

/// An operator failed its invertibility check (near-singular LU, zero weight, ...).
struct SingularError : Error {
    using Error::Error;
};

/// An iteration failed to converge within its cap; message carries the last residual.
struct ConvergenceError : Error {
    using Error::Error;
};

/// A smallness / contraction precondition is violated (q >= 1, c*e^rho >= 1, ...).
struct ContractionError : Error {
    using Error::Error;
};

/// Invalid experiment configuration (schema violation, bad generator parameters).
struct ConfigError : Error {
    using Error::Error;
};

} // namespace dicholin
