#pragma once

#include <stdexcept>
#include <string>

namespace palasso {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A step size that must be strictly positive was not.
class InvalidStepError : public Error {
 public:
  using Error::Error;
};

/// An operator was called outside the parameter regime it is defined for.
class RegimeError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain (nonpositive penalty weight, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Bad input data: unparsable CSV, invalid response for a family, ...
class DataError : public Error {
 public:
  using Error::Error;
};

/// Root bracketing or other numerical procedure failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace palasso
