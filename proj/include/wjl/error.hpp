#pragma once

#include <stdexcept>
#include <string>

namespace wjl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument's value was violated (zero dimension, bad probability, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Two compressed representations came from different matrices or hash families.
class ProvenanceMismatch : public Error {
 public:
  using Error::Error;
};

/// Malformed or truncated serialized data.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace wjl
