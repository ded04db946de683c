#pragma once

#include "socdiffuse/config.hpp"

#include <rbm/features.hpp>
#include <rbm/sampler.hpp>
#include <rbm/score.hpp>

#include <memory>

namespace socdiffuse {

enum class Algorithm { Uncontrolled, Alg1, Alg2 };

/// Score, cost and schedule for a sampling experiment.
struct SamplingSetup {
  rbm::diffusion::NoiseSchedule schedule;
  std::shared_ptr<const rbm::diffusion::ScoreModel> score;
  std::shared_ptr<const rbm::style::TerminalCost> cost;
};

SamplingSetup make_sampling_setup(const ExperimentConfig& config);

/// The standard benchmark: N(0, I) prior in d = 2, Psi = [[1, 0]],
/// reference feature `reference`.
SamplingSetup gaussian_linear_benchmark(int num_steps, double reference);

struct SeedRun {
  std::uint64_t seed = 0;
  rbm::sampling::SamplingResult controlled;
  rbm::sampling::SamplingResult baseline;
};

/// Runs one controlled trajectory and its uncontrolled baseline per seed.
/// Results are ordered like `seeds`, independent of `threads`.
std::vector<SeedRun> run_seeds(Algorithm algorithm, const rbm::sampling::SamplerConfig& config,
                               const SamplingSetup& setup, const std::vector<std::uint64_t>& seeds,
                               int threads);

/// Seed-averaged cost record (one entry per state) of the controlled runs.
std::vector<double> mean_cost_record(const std::vector<SeedRun>& runs);
/// Entry k: mean over seeds of cost[k+1] - cost[k] divided by its standard
/// error. Positive values mean the record rises at that step. Needs >= 2 runs.
std::vector<double> cost_rise_zscores(const std::vector<SeedRun>& runs);

double mean_terminal_cost(const std::vector<SeedRun>& runs, bool baseline);
/// Mean of |Psi(X_0) - reference| (square root of the terminal cost).
double mean_feature_error(const std::vector<SeedRun>& runs, bool baseline);

}  // namespace socdiffuse
