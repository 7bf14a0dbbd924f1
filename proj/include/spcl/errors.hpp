#pragma once

#include <stdexcept>
#include <string>

namespace spcl {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Zero-norm or otherwise unusable numeric input. A zero representation
// indicates an encoder bug and must surface loudly.
struct DegenerateInputError : Error {
    using Error::Error;
};

// Shape/dimension/label-range violations.
struct StructuralError : Error {
    using Error::Error;
};

// Bad configuration values (non-positive temperature, unknown keys, ...).
struct ConfigError : Error {
    using Error::Error;
};

// A wrapped function returned a non-finite value.
struct EvaluationError : Error {
    using Error::Error;
};

// I/O and parse failures; message carries path / line number.
struct IoError : Error {
    using Error::Error;
};

}  // namespace spcl
