#pragma once

#include <stdexcept>
#include <string>

namespace boson_owf {

// Every failure the library reports derives from Error so callers can catch
// one type; the subclasses let the CLI map failures onto messages and tests
// assert the precise category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class SizeLimitError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

// Raised when an enumeration or an integer result exceeds what we can hold.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class IntegrityError : public Error {
 public:
  using Error::Error;
};

// A bin source (sampling oracle) failed while feeding the MPB estimator.
class SourceError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace boson_owf
