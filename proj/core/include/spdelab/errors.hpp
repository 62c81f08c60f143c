#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spdelab {

// Caller broke a precondition (dimension mismatch, empty input, parameter
// outside its documented range).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a function (t <= 0, x outside
// [0,1]).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid user configuration: unknown preset, bad expression, non power of
// two refinement, moderate-regime violation.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// NaN or Inf appeared in a solver state.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(std::size_t step, const std::string& what)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// A study produced no usable data (e.g. every path exceeded the cap).
class StudyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterative solver hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(double last_residual, int iterations, const std::string& what)
      : std::runtime_error(what), last_residual_(last_residual), iterations_(iterations) {}

  double last_residual() const noexcept { return last_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

}  // namespace spdelab
