#pragma once

#include "rbm/types.hpp"

#include <span>

namespace rbm {

/// Moore-Penrose pseudoinverse via SVD. Singular values below
/// `relative_tolerance * sigma_max` are treated as zero.
Matrix pseudo_inverse(const Matrix& a, double relative_tolerance = 1e-10);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Central-difference gradient of a scalar function. Step per coordinate is
/// max(relative_step * |x_i|, absolute_floor).
template <class F>
Vector central_difference_gradient(const F& f, const Vector& x, double relative_step = 1e-4,
                                   double absolute_floor = 1e-8) {
  Vector grad(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = std::max(relative_step * std::abs(x[i]), absolute_floor);
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// Central-difference Jacobian of a vector function.
template <class F>
Matrix central_difference_jacobian(const F& f, const Vector& x, double relative_step = 1e-4,
                                   double absolute_floor = 1e-8) {
  Matrix jac;
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = std::max(relative_step * std::abs(x[i]), absolute_floor);
    probe[i] = x[i] + h;
    const Vector up = f(probe);
    probe[i] = x[i] - h;
    const Vector down = f(probe);
    probe[i] = x[i];
    if (i == 0) jac.resize(up.size(), x.size());
    jac.col(i) = (up - down) / (2.0 * h);
  }
  return jac;
}

}  // namespace rbm
