#include <socdiffuse/checks.hpp>
#include <socdiffuse/sampling.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace socdiffuse;

namespace {

SeedRun with_costs(std::vector<double> costs) {
  SeedRun r;
  r.controlled.trajectory.costs = std::move(costs);
  return r;
}

bool all_passed(const RunReport& r) {
  for (const auto& c : r.checks) {
    if (!c.passed) {
      ADD_FAILURE() << c.name << ": " << c.measured << " " << c.relation << " " << c.threshold;
    }
  }
  return r.passed() && !r.checks.empty();
}

}  // namespace

TEST(CostRecordStatistics, ZScoresOfPairedIncreases) {
  // Increments at step 0: (-1, -3) -> mean -2, sd sqrt(2), se 1 -> z = -2.
  // Step 1: (+1, +2) -> mean 1.5, sd sqrt(0.5), se 0.5 -> z = 3.
  const std::vector<SeedRun> runs{with_costs({5, 4, 5}), with_costs({6, 3, 5})};
  const auto z = cost_rise_zscores(runs);
  ASSERT_EQ(z.size(), 2u);
  EXPECT_NEAR(z[0], -2.0, 1e-12);
  EXPECT_NEAR(z[1], 3.0, 1e-12);
  const auto mean = mean_cost_record(runs);
  EXPECT_EQ(mean, (std::vector<double>{5.5, 3.5, 5}));
}

TEST(CostRecordStatistics, ZeroSpread) {
  const std::vector<SeedRun> runs{with_costs({1, 2, 2}), with_costs({1, 2, 2})};
  const auto z = cost_rise_zscores(runs);
  EXPECT_EQ(z[0], HUGE_VAL);
  EXPECT_EQ(z[1], 0.0);
}

TEST(CostRecordStatistics, Errors) {
  EXPECT_THROW(cost_rise_zscores({with_costs({1, 2})}), std::invalid_argument);
  EXPECT_THROW(cost_rise_zscores({with_costs({1, 2}), with_costs({1, 2, 3})}), std::invalid_argument);
}

TEST(RunSeeds, ThreadCountDoesNotChangeResults) {
  const auto bench = gaussian_linear_benchmark(20, 2.0);
  rbm::sampling::SamplerConfig cfg;
  cfg.num_steps = 20;
  cfg.proximal_strength = 1.0;
  const std::vector<std::uint64_t> seeds{4, 1, 9, 2, 7};
  for (auto alg : {Algorithm::Alg1, Algorithm::Alg2}) {
    const auto one = run_seeds(alg, cfg, bench, seeds, 1);
    const auto four = run_seeds(alg, cfg, bench, seeds, 4);
    ASSERT_EQ(one.size(), seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      EXPECT_EQ(one[i].seed, seeds[i]);
      EXPECT_EQ(four[i].seed, seeds[i]);
      EXPECT_TRUE(same(one[i].controlled.trajectory.final_state().values,
                       four[i].controlled.trajectory.final_state().values));
    }
  }
}

TEST(Suites, ReductionIdentity) {
  RunReport r;
  checks::reduction_identity(r, 1);
  EXPECT_TRUE(all_passed(r));
}

TEST(Suites, DeterministicBridge) {
  RunReport r;
  rbm::Vector x0(2), x1(2);
  x0 << 1, -1;
  x1 << 0, 0;
  checks::bridge(r, x0, x1, 1e-3);
  EXPECT_TRUE(all_passed(r));
}

TEST(Suites, CoarseBridgeFails) {
  RunReport r;
  rbm::Vector x0(2), x1(2);
  x0 << 1, -1;
  x1 << 0, 0;
  checks::bridge(r, x0, x1, 0.25);
  EXPECT_FALSE(r.passed());
}

TEST(Suites, Attention) {
  RunReport r;
  checks::afa(r, AfaSpec{}, 3);
  EXPECT_TRUE(all_passed(r));
}

TEST(Suites, PosteriorMeans) {
  RunReport r;
  checks::posterior_means(r, 0);
  EXPECT_TRUE(all_passed(r));
}

TEST(Suites, ScalarStatePlusControlTerminal) {
  RunReport r;
  checks::prop2_scalar_terminal(r);
  EXPECT_TRUE(all_passed(r));
}
