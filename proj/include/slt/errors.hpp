#pragma once

#include <stdexcept>
#include <string>

namespace slt {

/// Base of every error raised by the library. The CLI maps subclasses onto
/// exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
    using Error::Error;
};

// Window bookkeeping
struct WindowUnderflow : Error {
    using Error::Error;
};

// Group / shape preconditions
struct NotStrictlyNegative : ValidationError {
    using ValidationError::ValidationError;
};
struct NotUnipotent : ValidationError {
    using ValidationError::ValidationError;
};
struct SingularLeading : Error {
    using Error::Error;
};
struct ShapeViolation : ValidationError {
    using ValidationError::ValidationError;
};
struct IndexOutOfRange : ValidationError {
    using ValidationError::ValidationError;
};
struct SideMismatch : ValidationError {
    using ValidationError::ValidationError;
};
struct FlowSupportViolation : ValidationError {
    using ValidationError::ValidationError;
};

// Frames
struct NotCommuting : ValidationError {
    using ValidationError::ValidationError;
};
struct NotTraceless : ValidationError {
    using ValidationError::ValidationError;
};
struct DependentBasis : ValidationError {
    using ValidationError::ValidationError;
};

// Symbolic engine
struct UnboundDerivative : Error {
    using Error::Error;
};
struct ResourceExceeded : Error {
    using Error::Error;
};

// Numerics
struct BigCellViolation : Error {
    using Error::Error;
};
struct AliasingDetected : Error {
    using Error::Error;
};

} // namespace slt
