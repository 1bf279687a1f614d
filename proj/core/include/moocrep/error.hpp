#pragma once

#include <stdexcept>
#include <string>

namespace moocrep {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: parse failures, dangling references, bad config values.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, shape mismatches and other numeric failures.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A checkpoint or resume request whose configuration disagrees with the saved one.
class ConfigMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace moocrep
