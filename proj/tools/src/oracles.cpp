#include "socdiffuse/oracles.hpp"

#include <cmath>
#include <numbers>

namespace socdiffuse::oracle {

double posterior_mean_quadrature(const Mixture1d& prior, double signal, double noise, double x,
                                 int intervals) {
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < prior.means.size(); ++i) {
    const double sd = std::sqrt(prior.variances[i]);
    lo = std::min(lo, prior.means[i] - 14.0 * sd);
    hi = std::max(hi, prior.means[i] + 14.0 * sd);
  }
  if (intervals % 2) ++intervals;
  const double h = (hi - lo) / intervals;
  long double num = 0.0L, den = 0.0L;
  for (int j = 0; j <= intervals; ++j) {
    const double x0 = lo + j * h;
    long double prior_density = 0.0L;
    for (std::size_t i = 0; i < prior.means.size(); ++i) {
      const double v = prior.variances[i];
      prior_density += prior.weights[i] * std::exp(-(x0 - prior.means[i]) * (x0 - prior.means[i]) / (2 * v)) /
                       std::sqrt(2 * std::numbers::pi * v);
    }
    const double r = (x - signal * x0) / noise;
    const long double likelihood = std::exp(-0.5 * r * r);
    const double w = (j == 0 || j == intervals) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    num += w * x0 * prior_density * likelihood;
    den += w * prior_density * likelihood;
  }
  return static_cast<double>(num / den);
}

Vector gaussian_posterior_mean(const Vector& mean, double variance, double signal, double noise,
                               const Vector& x) {
  const double gain = variance * signal / (signal * signal * variance + noise * noise);
  Vector out(mean.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i) out[i] = mean[i] + gain * (x[i] - signal * mean[i]);
  return out;
}

double linear_beta_alpha_bar(int training_steps, int index) {
  long double prod = 1.0L;
  for (int i = 1; i <= index; ++i) {
    const long double beta =
        training_steps == 1
            ? 1e-4L
            : 1e-4L + (0.02L - 1e-4L) * static_cast<long double>(i - 1) / (training_steps - 1);
    prod *= 1.0L - beta;
  }
  return static_cast<double>(prod);
}

Matrix attention_bruteforce(const Matrix& q, const Matrix& k, const Matrix& v, double scale) {
  Matrix out = Matrix::Zero(q.rows(), v.cols());
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    std::vector<long double> w(static_cast<std::size_t>(k.rows()));
    long double total = 0.0L;
    for (Eigen::Index j = 0; j < k.rows(); ++j) {
      long double dot = 0.0L;
      for (Eigen::Index c = 0; c < q.cols(); ++c) dot += static_cast<long double>(q(i, c)) * k(j, c);
      w[static_cast<std::size_t>(j)] = std::exp(dot * scale);
      total += w[static_cast<std::size_t>(j)];
    }
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      long double acc = 0.0L;
      for (Eigen::Index j = 0; j < k.rows(); ++j) acc += w[static_cast<std::size_t>(j)] * v(j, c);
      out(i, c) = static_cast<double>(acc / total);
    }
  }
  return out;
}

Matrix stack_rows(const std::vector<Matrix>& blocks) {
  Eigen::Index rows = 0;
  for (const auto& b : blocks) rows += b.rows();
  Matrix out(rows, blocks.front().cols());
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    for (Eigen::Index i = 0; i < b.rows(); ++i, ++r) {
      for (Eigen::Index c = 0; c < b.cols(); ++c) out(r, c) = b(i, c);
    }
  }
  return out;
}

double riccati_p(double gamma, double t) {
  const double c = (1.0 - 2.0 / gamma) * std::exp(-2.0);
  return 2.0 / (1.0 - c * std::exp(2.0 * t));
}

double riccati_p_dot(double gamma, double t) {
  const double c = (1.0 - 2.0 / gamma) * std::exp(-2.0);
  const double e = c * std::exp(2.0 * t);
  return 4.0 * e / ((1.0 - e) * (1.0 - e));
}

Vector ridge_solution(const Matrix& a, const Vector& y, double lambda, const Vector& x_bar) {
  Matrix lhs = a.transpose() * a;
  lhs.diagonal().array() += lambda;
  return lhs.ldlt().solve(a.transpose() * y + lambda * x_bar);
}

}  // namespace socdiffuse::oracle
