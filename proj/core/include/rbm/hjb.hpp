#pragma once

#include "rbm/control.hpp"
#include "rbm/types.hpp"

#include <functional>

namespace rbm::control {

/// Candidate value function V(x, t). Derivatives not supplied in closed
/// form fall back to central differences.
class ValueFunction {
 public:
  using Scalar = std::function<double(const Vector&, double)>;
  using Gradient = std::function<Vector(const Vector&, double)>;

  explicit ValueFunction(Scalar value, Gradient gradient = {}, Scalar time_derivative = {});

  double value(const Vector& x, double t) const { return value_(x, t); }
  Vector gradient(const Vector& x, double t) const;
  double time_derivative(const Vector& x, double t) const;

  bool has_analytic_gradient() const { return static_cast<bool>(gradient_); }
  bool has_analytic_time_derivative() const { return static_cast<bool>(time_derivative_); }

 private:
  Scalar value_;
  Gradient gradient_;
  Scalar time_derivative_;
};

/// V(x, t) = ||x1 - x||^2 / (2 (1 - t)) with analytic derivatives.
ValueFunction bridge_value_function(Vector x1);

/// Signed HJB residual with running cost |u|^2 / 2:
///   pure-control:       dV/dt - |grad V|^2 / 2
///   state-plus-control: dV/dt - |grad V|^2 / 2 + grad V . x
/// Throws NumericalFailure on non-finite derivatives.
double hjb_residual(const ValueFunction& v, const Vector& x, double t, DriftMode mode);

}  // namespace rbm::control
