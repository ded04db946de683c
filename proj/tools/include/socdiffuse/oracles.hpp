#pragma once

#include <rbm/types.hpp>

#include <vector>

/// Independent reference computations used by the verification suites.
/// None of these call into the library code they check.
namespace socdiffuse::oracle {

using rbm::Matrix;
using rbm::Vector;

/// 1-D Gaussian mixture prior.
struct Mixture1d {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;
};

/// E[X0 | X = x] where X = signal * X0 + noise * eps, by composite Simpson
/// quadrature over X0.
double posterior_mean_quadrature(const Mixture1d& prior, double signal, double noise, double x,
                                 int intervals = 20000);

/// Closed-form E[X0 | X = x] for a N(mean, variance I) prior.
Vector gaussian_posterior_mean(const Vector& mean, double variance, double signal, double noise,
                               const Vector& x);

/// Linear-beta cumulative products by direct multiplication in long double.
double linear_beta_alpha_bar(int training_steps, int index);

/// softmax(Q K^T scale) V with explicit loops, no max shift, long double sums.
Matrix attention_bruteforce(const Matrix& q, const Matrix& k, const Matrix& v, double scale);

/// Row-wise [A; B; ...] stacking by explicit copying.
Matrix stack_rows(const std::vector<Matrix>& blocks);

/// P(t) of V = P(t) x^2 / 2 for dX = (X + u) dt with terminal weight
/// (gamma/2) x^2 (scalar, A = 1, y1 = 0): P' = P^2 - 2P, P(1) = gamma.
double riccati_p(double gamma, double t);
double riccati_p_dot(double gamma, double t);

/// Ridge solution (A^T A + lambda I)^{-1} (A^T y + lambda x_bar).
Vector ridge_solution(const Matrix& a, const Vector& y, double lambda, const Vector& x_bar);

}  // namespace socdiffuse::oracle
