#pragma once

#include "rbm/types.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace rbm {

/// NaN/Inf produced mid-computation. Carries the step (outer loop) and the
/// inner iteration when known.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, std::optional<int> step = std::nullopt,
                   std::optional<int> iteration = std::nullopt);

  std::optional<int> step() const { return step_; }
  std::optional<int> iteration() const { return iteration_; }

 private:
  std::optional<int> step_;
  std::optional<int> iteration_;
};

/// A trajectory stopped because its state became non-finite.
class AbortedTrajectory : public NumericalFailure {
 public:
  AbortedTrajectory(const std::string& what, int last_finite_step, Vector last_finite_state);

  int last_finite_step() const { return last_finite_step_; }
  const Vector& last_finite_state() const { return last_finite_state_; }

 private:
  int last_finite_step_;
  Vector last_finite_state_;
};

/// Evaluation at t >= 1 of a formula with a 1/(1-t) factor.
class SingularTime : public std::domain_error {
 public:
  explicit SingularTime(const std::string& what) : std::domain_error(what) {}
};

/// DDIM step from a noiseless level with an inconsistent clean estimate.
class SingularDenoise : public std::domain_error {
 public:
  explicit SingularDenoise(const std::string& what) : std::domain_error(what) {}
};

class LinearSolveFailure : public std::runtime_error {
 public:
  explicit LinearSolveFailure(const std::string& what) : std::runtime_error(what) {}
};

class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& what, int iterations, double final_residual);

  int iterations() const { return iterations_; }
  double final_residual() const { return final_residual_; }

 private:
  int iterations_;
  double final_residual_;
};

void require_dimension(const Vector& v, Eigen::Index expected, const char* what);

}  // namespace rbm
