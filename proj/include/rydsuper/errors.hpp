#pragma once

#include <stdexcept>
#include <string>

namespace rydsuper {

// Bad inputs: rejected before any computation runs. The CLI maps these to exit code 2.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EmptyGrid : ValidationError {
    EmptyGrid() : ValidationError("grid is empty or not strictly increasing") {}
    explicit EmptyGrid(const std::string& what) : ValidationError(what) {}
};

struct InsufficientData : ValidationError {
    using ValidationError::ValidationError;
};

struct NotNormalized : ValidationError {
    NotNormalized() : ValidationError("response curve carries no normalization metadata") {}
};

struct BadGuess : ValidationError {
    using ValidationError::ValidationError;
};

struct ZeroSlope : ValidationError {
    ZeroSlope() : ValidationError("response slope must be strictly positive") {}
};

struct ConfigError : ValidationError {
    ConfigError(const std::string& what, int line = 0)
        : ValidationError(line > 0 ? "config line " + std::to_string(line) + ": " + what : what),
          line_number(line)
    {
    }
    int line_number = 0;
};

// Numerical failures: the computation itself broke down. The CLI maps these to exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateDenominator : NumericalError {
    DegenerateDenominator()
        : NumericalError("G denominator vanished: decay-free resonant input has no steady state")
    {
    }
};

struct SingularSystem : NumericalError {
    SingularSystem() : NumericalError("harmonic block system is numerically singular") {}
};

struct NotConverged : NumericalError {
    using NumericalError::NumericalError;
};

struct NonConvergent : NumericalError {
    using NumericalError::NumericalError;
};

struct NoInteriorMax : NumericalError {
    NoInteriorMax() : NumericalError("maximum sits at a bracket edge; widen the bracket") {}
};

} // namespace rydsuper
