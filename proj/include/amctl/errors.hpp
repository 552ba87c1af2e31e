#pragma once

#include <stdexcept>
#include <string>

namespace amctl {

// Base for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension mismatches, out-of-range indices, invalid model data.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Malformed or schema-violating configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public NumericalError {
 public:
  NonConvergenceError(const std::string& what, double last_residual, int iterations)
      : NumericalError(what), last_residual_(last_residual), iterations_(iterations) {}
  double last_residual() const { return last_residual_; }
  int iterations() const { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace amctl
