#pragma once

#include <stdexcept>
#include <string>

namespace superk {

/// Base for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed or unusable input data (CSV content, class composition).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Point or matrix dimensionality does not match the model or generator set.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Model file is malformed, corrupt, or of an unsupported version.
class ModelFormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace superk
