#include "rbm/numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace rbm {

Matrix pseudo_inverse(const Matrix& a, double relative_tolerance) {
  if (a.size() == 0) return Matrix(a.cols(), a.rows());
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cutoff = relative_tolerance * (s.size() > 0 ? s[0] : 0.0);
  Vector inv_s(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    inv_s[i] = (s[i] > cutoff && s[i] > 0.0) ? 1.0 / s[i] : 0.0;
  }
  return svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose();
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("loglog_slope: need at least two paired points");
  }
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) {
      throw std::invalid_argument("loglog_slope: inputs must be positive");
    }
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("loglog_slope: x values are all equal");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace rbm
