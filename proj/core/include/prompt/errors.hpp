#pragma once

#include <stdexcept>
#include <string>

namespace prompt {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented precondition or type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Parameter lies outside the model's declared support box.
class SupportError : public Error {
 public:
  using Error::Error;
};

// Floating point breakdown (NaN likelihood, failed factorization, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A normalizer collapsed to zero, so the requested distribution does not exist.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// The requested combination of options is not defined for this model.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace prompt
