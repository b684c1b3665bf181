#pragma once

#include <stdexcept>
#include <string>

namespace quditops {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands built for different qudit dimensions (or different operator spaces).
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Invalid argument or precondition violated by the caller.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A string does not fit in the packed key layout, or a dense object is too big.
class CapacityExceeded : public Error {
 public:
  using Error::Error;
};

/// Stored amplitude count passed the caller's cap.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// Requested operation is not available in the given mode.
class UnsupportedMode : public Error {
 public:
  using Error::Error;
};

/// Internal consistency check failed; indicates a bug, never bad input.
class InternalError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input (config files, serialized strings, snapshots).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace quditops
