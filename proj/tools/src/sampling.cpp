#include "socdiffuse/sampling.hpp"

#include "socdiffuse/pool.hpp"

#include <cmath>
#include <stdexcept>

namespace socdiffuse {

using namespace rbm;

SamplingSetup make_sampling_setup(const ExperimentConfig& c) {
  auto schedule = diffusion::NoiseSchedule::make(c.sampler.num_steps, c.schedule);
  auto path = diffusion::variance_preserving(schedule);
  std::shared_ptr<const diffusion::ScoreModel> score;
  if (c.score.kind == "gaussian") {
    score = std::make_shared<diffusion::IsotropicGaussianScore>(c.score.mean, c.score.variance, path);
  } else {
    std::vector<Vector> means;
    for (Eigen::Index r = 0; r < c.score.means.rows(); ++r) means.push_back(c.score.means.row(r).transpose());
    score = std::make_shared<diffusion::GaussianMixtureScore>(c.score.weights, std::move(means),
                                                              c.score.variances, path);
  }
  std::shared_ptr<const style::FeatureExtractor> extractor;
  if (c.extractor.kind == "linear") {
    extractor = std::make_shared<style::LinearExtractor>(c.extractor.matrix);
  } else {
    extractor = std::make_shared<style::QuadraticExtractor>(score->dimension());
  }
  auto cost = std::make_shared<style::TerminalCost>(extractor, c.extractor.reference);
  return {std::move(schedule), std::move(score), std::move(cost)};
}

SamplingSetup gaussian_linear_benchmark(int num_steps, double reference) {
  auto schedule = diffusion::NoiseSchedule::make(num_steps);
  auto score = std::make_shared<diffusion::IsotropicGaussianScore>(
      Vector::Zero(2), 1.0, diffusion::variance_preserving(schedule));
  Matrix a(1, 2);
  a << 1.0, 0.0;
  auto cost = std::make_shared<style::TerminalCost>(std::make_shared<style::LinearExtractor>(a),
                                                    Vector::Constant(1, reference));
  return {std::move(schedule), std::move(score), std::move(cost)};
}

std::vector<SeedRun> run_seeds(Algorithm algorithm, const sampling::SamplerConfig& config,
                               const SamplingSetup& setup, const std::vector<std::uint64_t>& seeds,
                               int threads) {
  std::vector<SeedRun> runs(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t i) {
    sampling::SamplerConfig cfg = config;
    cfg.seed = seeds[i];
    SeedRun run;
    run.seed = seeds[i];
    run.baseline = sampling::sample_uncontrolled(cfg, *setup.score, setup.schedule, setup.cost.get());
    switch (algorithm) {
      case Algorithm::Uncontrolled:
        run.controlled = run.baseline;
        break;
      case Algorithm::Alg1:
        run.controlled = sampling::run_algorithm1(cfg, *setup.score, *setup.cost, setup.schedule);
        break;
      case Algorithm::Alg2:
        run.controlled = sampling::run_algorithm2(cfg, *setup.score, *setup.cost, setup.schedule);
        break;
    }
    runs[i] = std::move(run);
  });
  return runs;
}

std::vector<double> mean_cost_record(const std::vector<SeedRun>& runs) {
  if (runs.empty()) throw std::invalid_argument("mean_cost_record: no runs");
  std::vector<double> curve(runs.front().controlled.trajectory.costs.size(), 0.0);
  for (const auto& run : runs) {
    const auto& costs = run.controlled.trajectory.costs;
    if (costs.size() != curve.size()) throw std::invalid_argument("mean_cost_record: ragged cost records");
    for (std::size_t k = 0; k < curve.size(); ++k) curve[k] += costs[k];
  }
  for (double& c : curve) c /= static_cast<double>(runs.size());
  return curve;
}

std::vector<double> cost_rise_zscores(const std::vector<SeedRun>& runs) {
  if (runs.size() < 2) throw std::invalid_argument("cost_rise_zscores: needs at least two runs");
  const std::size_t len = runs.front().controlled.trajectory.costs.size();
  if (len < 2) throw std::invalid_argument("cost_rise_zscores: cost record too short");
  const double n = static_cast<double>(runs.size());
  std::vector<double> z(len - 1, 0.0);
  for (std::size_t k = 0; k + 1 < len; ++k) {
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& run : runs) {
      const auto& c = run.controlled.trajectory.costs;
      if (c.size() != len) throw std::invalid_argument("cost_rise_zscores: ragged cost records");
      const double d = c[k + 1] - c[k];
      sum += d;
      sum_sq += d * d;
    }
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    const double se = std::sqrt(var / n);
    // A deterministic change (zero spread) is infinitely significant.
    z[k] = se > 0.0 ? mean / se : (mean > 0.0 ? HUGE_VAL : (mean < 0.0 ? -HUGE_VAL : 0.0));
  }
  return z;
}

double mean_terminal_cost(const std::vector<SeedRun>& runs, bool baseline) {
  double total = 0.0;
  for (const auto& r : runs) {
    total += (baseline ? r.baseline : r.controlled).trajectory.costs.back();
  }
  return total / static_cast<double>(runs.size());
}

double mean_feature_error(const std::vector<SeedRun>& runs, bool baseline) {
  double total = 0.0;
  for (const auto& r : runs) {
    total += std::sqrt((baseline ? r.baseline : r.controlled).trajectory.costs.back());
  }
  return total / static_cast<double>(runs.size());
}

}  // namespace socdiffuse
