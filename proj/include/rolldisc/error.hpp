#pragma once

#include <stdexcept>
#include <string>

namespace rolldisc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class ArgumentError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "argument"; }
};

class PreconditionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "precondition"; }
};

/// Constraint matrix lost rank; carries the estimated condition number of G.
class NumericalRankError : public Error {
 public:
  NumericalRankError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }
  const char* kind() const noexcept override { return "numerical_rank"; }

 private:
  double condition_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations, double residual)
      : Error(what), iterations_(iterations), residual_(residual) {}
  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }
  const char* kind() const noexcept override { return "convergence"; }

 private:
  int iterations_;
  double residual_;
};

}  // namespace rolldisc
