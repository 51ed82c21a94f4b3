#pragma once

#include <stdexcept>
#include <string>

namespace ewt {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: wrong dimensions, malformed files, violated preconditions.
/// The CLI maps this to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A computation produced or met non-finite values, or could not proceed.
/// The CLI maps this to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ewt
