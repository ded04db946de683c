#pragma once

#include "rbm/schedule.hpp"
#include "rbm/types.hpp"

#include <atomic>
#include <map>
#include <memory>
#include <optional>

namespace rbm::diffusion {

/// Marginal X_t = signal * X_0 + noise * eps with eps ~ N(0, I).
struct NoiseLevel {
  double signal;
  double noise;
};

/// Maps continuous time t in [0, 1] to a noise level.
class MarginalPath {
 public:
  virtual ~MarginalPath() = default;
  virtual NoiseLevel at(double t) const = 0;
};

/// Variance-preserving path of a schedule: signal = sqrt(abar(t*T)),
/// noise = sqrt(1 - abar(t*T)). t = 0 is data.
class VariancePreservingPath final : public MarginalPath {
 public:
  explicit VariancePreservingPath(NoiseSchedule schedule) : schedule_(std::move(schedule)) {}
  NoiseLevel at(double t) const override;
  const NoiseSchedule& schedule() const { return schedule_; }

 private:
  NoiseSchedule schedule_;
};

/// Straight-line flow path X_s = s X_0 + (1 - s) eps. s = 1 is data.
class FlowPath final : public MarginalPath {
 public:
  NoiseLevel at(double s) const override;
};

std::shared_ptr<const MarginalPath> variance_preserving(NoiseSchedule schedule);
std::shared_ptr<const MarginalPath> flow_path();

/// Score field s(x, t, context) approximating grad log p(x, t).
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;
  virtual int dimension() const = 0;
  virtual Vector score(const Vector& x, double t, const Context& context = {}) const = 0;

  /// d score / d x when available in closed form.
  virtual std::optional<Matrix> score_jacobian(const Vector& /*x*/, double /*t*/,
                                               const Context& /*context*/ = {}) const {
    return std::nullopt;
  }
};

/// Score model with a closed-form marginal log-density.
class AnalyticScoreModel : public ScoreModel {
 public:
  virtual double log_density(const Vector& x, double t) const = 0;
  const MarginalPath& path() const { return *path_; }

 protected:
  explicit AnalyticScoreModel(std::shared_ptr<const MarginalPath> path);
  std::shared_ptr<const MarginalPath> path_;
};

/// Data distribution N(mean, variance * I).
class IsotropicGaussianScore final : public AnalyticScoreModel {
 public:
  IsotropicGaussianScore(Vector mean, double variance, std::shared_ptr<const MarginalPath> path);

  int dimension() const override { return static_cast<int>(mean_.size()); }
  Vector score(const Vector& x, double t, const Context& context = {}) const override;
  std::optional<Matrix> score_jacobian(const Vector& x, double t,
                                       const Context& context = {}) const override;
  double log_density(const Vector& x, double t) const override;

  const Vector& mean() const { return mean_; }
  double variance() const { return variance_; }

 private:
  Vector mean_;
  double variance_;
};

/// Data distribution sum_i w_i N(mu_i, sigma_i^2 I).
class GaussianMixtureScore final : public AnalyticScoreModel {
 public:
  GaussianMixtureScore(std::vector<double> weights, std::vector<Vector> means,
                       std::vector<double> variances, std::shared_ptr<const MarginalPath> path);

  int dimension() const override { return static_cast<int>(means_.front().size()); }
  Vector score(const Vector& x, double t, const Context& context = {}) const override;
  std::optional<Matrix> score_jacobian(const Vector& x, double t,
                                       const Context& context = {}) const override;
  double log_density(const Vector& x, double t) const override;

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Vector>& means() const { return means_; }
  const std::vector<double>& variances() const { return variances_; }

 private:
  struct Posterior {
    std::vector<double> responsibilities;
    std::vector<Vector> component_scores;
    std::vector<double> marginal_variances;
    double log_density;
  };
  Posterior posterior(const Vector& x, double t) const;

  std::vector<double> weights_;
  std::vector<Vector> means_;
  std::vector<double> variances_;
};

/// Score of a product density with identical 1-D factors, read off a
/// regular (t, x) grid by bilinear interpolation. x outside the grid is
/// clamped to the edge. No Jacobian; callers fall back to finite differences.
class TabulatedScore final : public ScoreModel {
 public:
  /// `values(i, j)` is the 1-D score at time t_i and coordinate x_j.
  TabulatedScore(int dimension, double t_min, double t_max, double x_min, double x_max,
                 Matrix values);

  /// Tabulates coordinate 0 of a 1-D model on an nt x nx grid.
  static TabulatedScore from_model(const ScoreModel& one_dimensional, int dimension,
                                   double t_min, double t_max, int nt, double x_min,
                                   double x_max, int nx);

  int dimension() const override { return dimension_; }
  Vector score(const Vector& x, double t, const Context& context = {}) const override;

 private:
  double lookup(double x, double t) const;

  int dimension_;
  double t_min_, t_max_, x_min_, x_max_;
  Matrix values_;
};

/// Selects a score model by context tag; the empty tag maps to the default.
class ConditionalScore final : public ScoreModel {
 public:
  ConditionalScore(std::shared_ptr<const ScoreModel> unconditional,
                   std::map<Context, std::shared_ptr<const ScoreModel>> by_context);

  int dimension() const override { return unconditional_->dimension(); }
  Vector score(const Vector& x, double t, const Context& context = {}) const override;
  std::optional<Matrix> score_jacobian(const Vector& x, double t,
                                       const Context& context = {}) const override;

 private:
  const ScoreModel& select(const Context& context) const;

  std::shared_ptr<const ScoreModel> unconditional_;
  std::map<Context, std::shared_ptr<const ScoreModel>> by_context_;
};

/// Decorator counting score and score-Jacobian evaluations.
class CountingScore final : public ScoreModel {
 public:
  explicit CountingScore(std::shared_ptr<const ScoreModel> inner) : inner_(std::move(inner)) {}

  int dimension() const override { return inner_->dimension(); }
  Vector score(const Vector& x, double t, const Context& context = {}) const override;
  std::optional<Matrix> score_jacobian(const Vector& x, double t,
                                       const Context& context = {}) const override;

  long score_calls() const { return score_calls_.load(); }
  long jacobian_calls() const { return jacobian_calls_.load(); }

 private:
  std::shared_ptr<const ScoreModel> inner_;
  mutable std::atomic<long> score_calls_{0};
  mutable std::atomic<long> jacobian_calls_{0};
};

}  // namespace rbm::diffusion
