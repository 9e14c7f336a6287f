#pragma once

#include <stdexcept>
#include <string>

namespace pae {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tensor/layer dimension mismatch; message names the offending stage.
struct ShapeError : Error {
    using Error::Error;
};

/// API misuse (e.g. backward without a recorded forward pass).
struct UsageError : Error {
    using Error::Error;
};

/// Invalid or inconsistent configuration values.
struct ConfigError : Error {
    using Error::Error;
};

/// Training diverged (non-finite loss or gradient); message carries the
/// epoch/iteration coordinates.
struct TrainingError : Error {
    using Error::Error;
};

/// Mathematically degenerate input (e.g. normalizing a zero vector).
struct DegenerateInputError : Error {
    using Error::Error;
};

/// Checkpoint file problems, one distinct kind per failure mode.
struct CheckpointError : Error {
    enum class Kind { BadMagic, UnsupportedVersion, Truncated, DimMismatch, Malformed, Io };
    Kind kind;
    CheckpointError(Kind k, const std::string& msg) : Error(msg), kind(k) {}
};

}  // namespace pae
