#include "rbm/hjb.hpp"

#include "rbm/errors.hpp"
#include "rbm/numerics.hpp"

#include <cmath>
#include <memory>

namespace rbm::control {

ValueFunction::ValueFunction(Scalar value, Gradient gradient, Scalar time_derivative)
    : value_(std::move(value)),
      gradient_(std::move(gradient)),
      time_derivative_(std::move(time_derivative)) {
  if (!value_) throw std::invalid_argument("ValueFunction: missing evaluator");
}

Vector ValueFunction::gradient(const Vector& x, double t) const {
  if (gradient_) return gradient_(x, t);
  return central_difference_gradient([&](const Vector& p) { return value_(p, t); }, x, 1e-5, 1e-5);
}

double ValueFunction::time_derivative(const Vector& x, double t) const {
  if (time_derivative_) return time_derivative_(x, t);
  const double h = std::max(1e-5 * std::abs(t), 1e-6);
  return (value_(x, t + h) - value_(x, t - h)) / (2.0 * h);
}

ValueFunction bridge_value_function(Vector x1) {
  auto target = std::make_shared<const Vector>(std::move(x1));
  return ValueFunction(
      [target](const Vector& x, double t) {
        return (*target - x).squaredNorm() / (2.0 * (1.0 - t));
      },
      [target](const Vector& x, double t) -> Vector { return (x - *target) / (1.0 - t); },
      [target](const Vector& x, double t) {
        return (*target - x).squaredNorm() / (2.0 * (1.0 - t) * (1.0 - t));
      });
}

double hjb_residual(const ValueFunction& v, const Vector& x, double t, DriftMode mode) {
  const double dv_dt = v.time_derivative(x, t);
  const Vector grad = v.gradient(x, t);
  if (!std::isfinite(dv_dt) || !grad.allFinite()) {
    throw NumericalFailure("hjb_residual: non-finite value-function derivative");
  }
  double residual = dv_dt - 0.5 * grad.squaredNorm();
  if (mode == DriftMode::StatePlusControl) residual += grad.dot(x);
  return residual;
}

}  // namespace rbm::control
