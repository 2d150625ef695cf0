#pragma once

#include <stdexcept>
#include <string>

namespace swarmtrack {

// Base class for all library failures.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad or missing user-supplied input (files, configs). CLI exit code 2.
struct InputError : Error {
    using Error::Error;
};

// Numerical or runtime failure inside the pipeline. CLI exit code 3.
struct NumericError : Error {
    using Error::Error;
};

struct ConfigError : InputError {
    using InputError::InputError;
};
struct CalibrationMissing : InputError {
    using InputError::InputError;
};
struct InsufficientFrames : InputError {
    using InputError::InputError;
};

struct PointBehindCamera : NumericError {
    using NumericError::NumericError;
};
struct DegenerateRays : NumericError {
    using NumericError::NumericError;
};
struct DegenerateRig : NumericError {
    using NumericError::NumericError;
};
struct DimensionMismatch : NumericError {
    using NumericError::NumericError;
};
struct SingularInnovation : NumericError {
    using NumericError::NumericError;
};
struct FactorizationFailure : NumericError {
    using NumericError::NumericError;
};
struct AllZeroWeights : NumericError {
    using NumericError::NumericError;
};
struct ObjectOutOfView : NumericError {
    using NumericError::NumericError;
};
struct NoMatches : NumericError {
    using NumericError::NumericError;
};

// Operation called while its preconditions do not hold (programming error).
struct ContractViolation : Error {
    using Error::Error;
};

}  // namespace swarmtrack
