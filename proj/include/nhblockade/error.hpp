#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nhblockade {

/// Layouts disagree or a mode index is out of range.
class LayoutError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Physical parameters or experiment configuration violate an invariant.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A steady-state solver did not reach its residual tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// The rightmost Liouvillian eigenvalue is not simple.
class DegeneracyError : public std::runtime_error {
 public:
  DegeneracyError(const std::string& what, std::size_t multiplicity)
      : std::runtime_error(what), multiplicity_(multiplicity) {}
  std::size_t multiplicity() const noexcept { return multiplicity_; }

 private:
  std::size_t multiplicity_;
};

class PositivityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A closed-form expression hits a pole (resonance with no loss to regularise it).
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An optimal-condition solver found no admissible solution.
class ConditionNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nhblockade
