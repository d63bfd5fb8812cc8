#pragma once

#include <stdexcept>
#include <string>

namespace rgg {

// Bad arguments or malformed configuration. Maps to CLI exit code 1.
class UsageError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Quadrature or root finding failed to converge. Maps to CLI exit code 2.
class NumericFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// The cube partition of a ball has no cell fully inside the ball.
class InsufficientResolution : public UsageError {
  public:
    using UsageError::UsageError;
};

}  // namespace rgg
