#pragma once

#include <stdexcept>
#include <string>

namespace cmguide {

/// Invalid model or scenario configuration (bad dimensions, non-positive rates, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Time index outside the range an operation is defined on.
class IndexError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Factorization or inversion failure. Carries the offending time index when known.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what, int step = -1)
        : std::runtime_error(step >= 0 ? what + " (k=" + std::to_string(step) + ")" : what),
          step_(step) {}

    int step() const noexcept { return step_; }

private:
    int step_;
};

/// Oracle problem too large for dense evaluation.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable input or unwritable output.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cmguide
