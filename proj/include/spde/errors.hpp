#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spde {

/// Bad input: a parameter or configuration value breaks a stated constraint.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numeric routine could not produce a meaningful result (singular matrix,
/// degenerate path, non-decaying mode).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem or stream failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Field-file corruption. Each kind is its own type so callers and tests can
// tell them apart.

class BadMagicError : public IoError {
public:
    using IoError::IoError;
};

class VersionMismatchError : public IoError {
public:
    using IoError::IoError;
};

class TruncatedBodyError : public IoError {
public:
    TruncatedBodyError(const std::string& what, std::size_t slice)
        : IoError(what), slice_(slice) {}
    std::size_t slice_index() const noexcept { return slice_; }

private:
    std::size_t slice_;
};

class SliceCountMismatchError : public IoError {
public:
    using IoError::IoError;
};

}  // namespace spde
