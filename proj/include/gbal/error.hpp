#pragma once

#include <stdexcept>
#include <string>

namespace gbal {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed data or arguments that violate a type invariant.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A tuning parameter outside its admissible range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Request that does not match the current session state (HTTP 409).
class Conflict : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace gbal
