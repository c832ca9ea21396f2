#pragma once

#include <stdexcept>
#include <string>

namespace orthant_lab {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied something outside an operation's domain (CLI exit code 2).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not deliver a trustworthy value (CLI exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The slab parameter a -> a/sqrt(1-a^2) reached 1 while unfolding the volume recursion.
class ParameterOverflow : public NumericalError {
 public:
  ParameterOverflow(int dim, int depth, double value)
      : NumericalError("slab parameter overflow at dimension " + std::to_string(dim) +
                       " (recursion depth " + std::to_string(depth) +
                       "): transformed a = " + std::to_string(value) + " >= 1"),
        dim_(dim),
        depth_(depth) {}

  int dim() const noexcept { return dim_; }
  int depth() const noexcept { return depth_; }

 private:
  int dim_;
  int depth_;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : NumericalError(what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

class InsufficientSamples : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class FitWindowError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateCurve : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace orthant_lab
