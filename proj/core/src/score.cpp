#include "rbm/score.hpp"

#include "rbm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rbm::diffusion {

NoiseLevel VariancePreservingPath::at(double t) const {
  if (!(t >= 0.0) || !(t <= 1.0)) throw std::out_of_range("VP path: t outside [0, 1]");
  const double abar = schedule_.alpha_bar_at(t * schedule_.num_steps());
  return {std::sqrt(abar), std::sqrt(1.0 - abar)};
}

NoiseLevel FlowPath::at(double s) const {
  if (!(s >= 0.0) || !(s <= 1.0)) throw std::out_of_range("flow path: s outside [0, 1]");
  return {s, 1.0 - s};
}

std::shared_ptr<const MarginalPath> variance_preserving(NoiseSchedule schedule) {
  return std::make_shared<VariancePreservingPath>(std::move(schedule));
}

std::shared_ptr<const MarginalPath> flow_path() { return std::make_shared<FlowPath>(); }

AnalyticScoreModel::AnalyticScoreModel(std::shared_ptr<const MarginalPath> path)
    : path_(std::move(path)) {
  if (!path_) throw std::invalid_argument("score model: null marginal path");
}

// --- isotropic Gaussian ---------------------------------------------------

IsotropicGaussianScore::IsotropicGaussianScore(Vector mean, double variance,
                                               std::shared_ptr<const MarginalPath> path)
    : AnalyticScoreModel(std::move(path)), mean_(std::move(mean)), variance_(variance) {
  if (mean_.size() == 0) throw std::invalid_argument("IsotropicGaussianScore: empty mean");
  if (!(variance_ > 0.0) || !std::isfinite(variance_)) {
    throw std::invalid_argument("IsotropicGaussianScore: variance must be positive");
  }
}

Vector IsotropicGaussianScore::score(const Vector& x, double t, const Context&) const {
  require_dimension(x, mean_.size(), "IsotropicGaussianScore::score");
  const auto [a, b] = path_->at(t);
  const double v = a * a * variance_ + b * b;
  return -(x - a * mean_) / v;
}

std::optional<Matrix> IsotropicGaussianScore::score_jacobian(const Vector& x, double t,
                                                             const Context&) const {
  require_dimension(x, mean_.size(), "IsotropicGaussianScore::score_jacobian");
  const auto [a, b] = path_->at(t);
  const double v = a * a * variance_ + b * b;
  return Matrix(-Matrix::Identity(x.size(), x.size()) / v);
}

double IsotropicGaussianScore::log_density(const Vector& x, double t) const {
  require_dimension(x, mean_.size(), "IsotropicGaussianScore::log_density");
  const auto [a, b] = path_->at(t);
  const double v = a * a * variance_ + b * b;
  const double d = static_cast<double>(x.size());
  return -0.5 * (x - a * mean_).squaredNorm() / v - 0.5 * d * std::log(2.0 * std::numbers::pi * v);
}

// --- Gaussian mixture -----------------------------------------------------

GaussianMixtureScore::GaussianMixtureScore(std::vector<double> weights, std::vector<Vector> means,
                                           std::vector<double> variances,
                                           std::shared_ptr<const MarginalPath> path)
    : AnalyticScoreModel(std::move(path)),
      weights_(std::move(weights)),
      means_(std::move(means)),
      variances_(std::move(variances)) {
  if (weights_.empty() || weights_.size() != means_.size() ||
      weights_.size() != variances_.size()) {
    throw std::invalid_argument("GaussianMixtureScore: component counts disagree");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] > 0.0)) throw std::invalid_argument("GaussianMixtureScore: weight <= 0");
    if (!(variances_[i] > 0.0)) throw std::invalid_argument("GaussianMixtureScore: variance <= 0");
    if (means_[i].size() != means_[0].size() || means_[i].size() == 0) {
      throw std::invalid_argument("GaussianMixtureScore: mean dimensions disagree");
    }
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("GaussianMixtureScore: weights must sum to 1");
  }
}

GaussianMixtureScore::Posterior GaussianMixtureScore::posterior(const Vector& x, double t) const {
  require_dimension(x, means_[0].size(), "GaussianMixtureScore");
  const auto [a, b] = path_->at(t);
  const double d = static_cast<double>(x.size());
  const std::size_t n = weights_.size();

  Posterior post;
  post.responsibilities.resize(n);
  post.component_scores.resize(n);
  post.marginal_variances.resize(n);
  std::vector<double> log_terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = a * a * variances_[i] + b * b;
    const Vector diff = x - a * means_[i];
    post.marginal_variances[i] = v;
    post.component_scores[i] = -diff / v;
    log_terms[i] = std::log(weights_[i]) - 0.5 * diff.squaredNorm() / v -
                   0.5 * d * std::log(2.0 * std::numbers::pi * v);
  }
  const double peak = *std::max_element(log_terms.begin(), log_terms.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    post.responsibilities[i] = std::exp(log_terms[i] - peak);
    sum += post.responsibilities[i];
  }
  for (auto& r : post.responsibilities) r /= sum;
  post.log_density = peak + std::log(sum);
  return post;
}

Vector GaussianMixtureScore::score(const Vector& x, double t, const Context&) const {
  const Posterior post = posterior(x, t);
  Vector s = Vector::Zero(x.size());
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    s += post.responsibilities[i] * post.component_scores[i];
  }
  return s;
}

std::optional<Matrix> GaussianMixtureScore::score_jacobian(const Vector& x, double t,
                                                           const Context&) const {
  const Posterior post = posterior(x, t);
  const auto d = x.size();
  Vector s = Vector::Zero(d);
  Matrix jac = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const double r = post.responsibilities[i];
    const Vector& g = post.component_scores[i];
    s += r * g;
    jac += r * (g * g.transpose());
    jac.diagonal().array() -= r / post.marginal_variances[i];
  }
  jac -= s * s.transpose();
  return jac;
}

double GaussianMixtureScore::log_density(const Vector& x, double t) const {
  return posterior(x, t).log_density;
}

// --- tabulated ------------------------------------------------------------

TabulatedScore::TabulatedScore(int dimension, double t_min, double t_max, double x_min,
                               double x_max, Matrix values)
    : dimension_(dimension),
      t_min_(t_min),
      t_max_(t_max),
      x_min_(x_min),
      x_max_(x_max),
      values_(std::move(values)) {
  if (dimension_ < 1) throw std::invalid_argument("TabulatedScore: dimension must be >= 1");
  if (values_.rows() < 2 || values_.cols() < 2) {
    throw std::invalid_argument("TabulatedScore: grid needs at least 2x2 points");
  }
  if (!(t_max_ > t_min_) || !(x_max_ > x_min_)) {
    throw std::invalid_argument("TabulatedScore: empty grid range");
  }
  if (!values_.allFinite()) throw std::invalid_argument("TabulatedScore: non-finite table");
}

TabulatedScore TabulatedScore::from_model(const ScoreModel& model, int dimension, double t_min,
                                          double t_max, int nt, double x_min, double x_max,
                                          int nx) {
  if (model.dimension() != 1) throw std::invalid_argument("TabulatedScore: model must be 1-D");
  Matrix values(nt, nx);
  Vector probe(1);
  for (int i = 0; i < nt; ++i) {
    const double t = t_min + (t_max - t_min) * i / (nt - 1);
    for (int j = 0; j < nx; ++j) {
      probe[0] = x_min + (x_max - x_min) * j / (nx - 1);
      values(i, j) = model.score(probe, t)[0];
    }
  }
  return TabulatedScore(dimension, t_min, t_max, x_min, x_max, std::move(values));
}

double TabulatedScore::lookup(double x, double t) const {
  const auto locate = [](double v, double lo, double hi, Eigen::Index n, Eigen::Index& i,
                         double& w) {
    const double pos = std::clamp((v - lo) / (hi - lo), 0.0, 1.0) * static_cast<double>(n - 1);
    i = std::min<Eigen::Index>(static_cast<Eigen::Index>(pos), n - 2);
    w = pos - static_cast<double>(i);
  };
  Eigen::Index ti = 0, xi = 0;
  double tw = 0, xw = 0;
  locate(t, t_min_, t_max_, values_.rows(), ti, tw);
  locate(x, x_min_, x_max_, values_.cols(), xi, xw);
  const double lo = (1 - xw) * values_(ti, xi) + xw * values_(ti, xi + 1);
  const double hi = (1 - xw) * values_(ti + 1, xi) + xw * values_(ti + 1, xi + 1);
  return (1 - tw) * lo + tw * hi;
}

Vector TabulatedScore::score(const Vector& x, double t, const Context&) const {
  require_dimension(x, dimension_, "TabulatedScore::score");
  Vector s(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) s[i] = lookup(x[i], t);
  return s;
}

// --- conditional ----------------------------------------------------------

ConditionalScore::ConditionalScore(std::shared_ptr<const ScoreModel> unconditional,
                                   std::map<Context, std::shared_ptr<const ScoreModel>> by_context)
    : unconditional_(std::move(unconditional)), by_context_(std::move(by_context)) {
  if (!unconditional_) throw std::invalid_argument("ConditionalScore: null default model");
  for (const auto& [tag, model] : by_context_) {
    if (!model || model->dimension() != unconditional_->dimension()) {
      throw std::invalid_argument("ConditionalScore: model for '" + tag +
                                  "' missing or of wrong dimension");
    }
  }
}

const ScoreModel& ConditionalScore::select(const Context& context) const {
  if (context.empty()) return *unconditional_;
  const auto it = by_context_.find(context);
  if (it == by_context_.end()) {
    throw std::invalid_argument("ConditionalScore: unknown context '" + context + "'");
  }
  return *it->second;
}

Vector ConditionalScore::score(const Vector& x, double t, const Context& context) const {
  return select(context).score(x, t, context);
}

std::optional<Matrix> ConditionalScore::score_jacobian(const Vector& x, double t,
                                                       const Context& context) const {
  return select(context).score_jacobian(x, t, context);
}

// --- counting -------------------------------------------------------------

Vector CountingScore::score(const Vector& x, double t, const Context& context) const {
  ++score_calls_;
  return inner_->score(x, t, context);
}

std::optional<Matrix> CountingScore::score_jacobian(const Vector& x, double t,
                                                    const Context& context) const {
  ++jacobian_calls_;
  return inner_->score_jacobian(x, t, context);
}

}  // namespace rbm::diffusion
