#include <rbm/diffusion.hpp>
#include <rbm/errors.hpp>
#include <rbm/features.hpp>
#include <rbm/numerics.hpp>
#include <rbm/sampler.hpp>
#include <rbm/schedule.hpp>
#include <rbm/score.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

using namespace rbm;
using namespace rbm::diffusion;
using namespace rbm::sampling;
using rbm::style::TerminalCost;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

bool same_bits(const Vector& a, const Vector& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

// N(0, I) in R^2, Psi = first coordinate, T = 50.
struct Bench {
  NoiseSchedule schedule = NoiseSchedule::make(50);
  IsotropicGaussianScore score{Vector::Zero(2), 1.0, variance_preserving(schedule)};
  TerminalCost cost;

  explicit Bench(double ref)
      : cost(std::make_shared<style::LinearExtractor>(Matrix(Eigen::RowVector2d(1, 0))),
             vec({ref})) {}
};

SamplerConfig op(std::uint64_t seed = 0) {
  SamplerConfig c;
  c.num_steps = 50;
  c.step_size = 0.1;
  c.opt_steps = 3;
  c.proximal_strength = 1.0;
  c.seed = seed;
  return c;
}

class ResetProbe : public SamplerObserver {
 public:
  void on_control_init(int, const Vector& u) override {
    ++inits;
    if (u.norm() != 0.0) ++nonzero;
  }
  void on_inner_iteration(int, int, const Vector&, double) override { ++inner; }
  int inits = 0, nonzero = 0, inner = 0;
};

double mean_feature_error(const std::vector<SamplingResult>& runs, double ref) {
  double s = 0.0;
  for (const auto& r : runs) s += std::abs(r.trajectory.final_state().values[0] - ref);
  return s / static_cast<double>(runs.size());
}

}  // namespace

TEST(ControlStep, ZeroIterationsLeaveTheTweedieEstimate) {
  const Bench b(2.0);
  SamplerConfig cfg = op();
  cfg.opt_steps = 0;
  const Vector x = vec({0.3, -1.2});
  const auto step = optimize_control_step({x, 20}, b.score, b.cost, b.schedule, cfg);
  EXPECT_EQ(step.control, Vector::Zero(2));
  EXPECT_TRUE(same_bits(step.x0_hat, tweedie_posterior_mean(x, 20, b.score, b.schedule)));
}

TEST(ControlStep, MetReferenceNeedsNoControl) {
  const Bench b(2.0);
  const double s = std::sqrt(b.schedule.alpha_bar(10));
  const Vector x = vec({2.0 / s, 0.4});
  const auto step = optimize_control_step({x, 10}, b.score, b.cost, b.schedule, op());
  EXPECT_LT(step.control.norm(), 1e-12);
}

TEST(ControlStep, LongInnerLoopReachesTheLeastSquaresMinimizer) {
  const Bench b(2.0);
  SamplerConfig cfg = op();
  cfg.opt_steps = 500;
  cfg.step_size = 0.05;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  // Contraction per step is 1 - 2 eta abar_t; keep to steps where 500
  // iterations converge far below the tolerance.
  for (int t : {1, 3, 5}) {
    const Vector x = vec({n(rng), n(rng)});
    const double s = std::sqrt(b.schedule.alpha_bar(t));
    // Minimum-norm u with s (x + u)_0 = ref: only the first coordinate moves.
    const Vector u_star = vec({2.0 / s - x[0], 0.0});
    const auto step = optimize_control_step({x, t}, b.score, b.cost, b.schedule, cfg);
    EXPECT_LT((step.control - u_star).norm(), 1e-6) << "t=" << t;
  }
}

TEST(ControlStep, NonFiniteGradientNamesStepAndIteration) {
  const Bench b(0.0);
  const auto nan_box = std::make_shared<style::CallableExtractor>(
      [](const Vector&) { return Vector(Vector::Constant(1, std::nan(""))); }, 2, 1);
  const TerminalCost bad(nan_box, vec({0}));
  for (auto mode : {GradientMode::Analytic, GradientMode::FiniteDifference}) {
    SamplerConfig cfg = op();
    cfg.gradient_mode = mode;
    try {
      (void)optimize_control_step({vec({0.1, 0.2}), 7}, b.score, bad, b.schedule, cfg);
      FAIL() << "expected NumericalFailure";
    } catch (const NumericalFailure& e) {
      ASSERT_TRUE(e.step().has_value());
      EXPECT_EQ(*e.step(), 7);
      ASSERT_TRUE(e.iteration().has_value());
      EXPECT_EQ(*e.iteration(), 0);
    }
    try {
      (void)run_algorithm1(cfg, b.score, bad, b.schedule);
      FAIL() << "expected NumericalFailure";
    } catch (const NumericalFailure& e) {
      ASSERT_TRUE(e.step().has_value());
      EXPECT_EQ(*e.step(), 50);
    }
  }
}

TEST(ControlGradient, AnalyticMatchesFiniteDifferences) {
  const Bench b(2.0);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  SamplerCounters counters;
  for (int i = 0; i < 100; ++i) {
    const Vector x = vec({n(rng), n(rng)}), u = 0.3 * vec({n(rng), n(rng)});
    const int t = 1 + i % 50;
    const Vector ga = control_gradient(x, u, t, b.score, b.cost, b.schedule,
                                       GradientMode::Analytic, {}, &counters);
    const Vector gf = control_gradient(x, u, t, b.score, b.cost, b.schedule,
                                       GradientMode::FiniteDifference, {}, &counters);
    EXPECT_LE((ga - gf).norm(), 1e-4 * std::max(ga.norm(), 1e-12)) << "t=" << t;
  }
  EXPECT_GE(counters.score_gradient_evaluations, 200);
}

TEST(Algorithm1, ZeroIterationsReproduceUncontrolledDdimBitwise) {
  const Bench b(2.0);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    SamplerConfig cfg = op(seed);
    cfg.opt_steps = 0;
    const auto a = run_algorithm1(cfg, b.score, b.cost, b.schedule);
    const auto u = sample_uncontrolled(cfg, b.score, b.schedule, &b.cost);
    ASSERT_EQ(a.trajectory.states.size(), 51u);
    for (std::size_t i = 0; i < a.trajectory.states.size(); ++i) {
      ASSERT_TRUE(same_bits(a.trajectory.states[i].values, u.trajectory.states[i].values))
          << "seed " << seed << " state " << i;
    }
  }
}

TEST(Algorithm1, SteersTheMeanFeatureToTheReference) {
  const Bench b(2.0);
  double feature = 0.0, controlled = 0.0, free = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto a = run_algorithm1(op(seed), b.score, b.cost, b.schedule);
    const auto u = sample_uncontrolled(op(seed), b.score, b.schedule, &b.cost);
    feature += a.trajectory.final_state().values[0];
    controlled += a.trajectory.costs.back();
    free += u.trajectory.costs.back();
    EXPECT_NO_THROW(a.trajectory.validate());
    EXPECT_EQ(a.trajectory.costs.size(), 51u);
  }
  EXPECT_NEAR(feature / 200, 2.0, 0.1);
  EXPECT_LT(controlled / free, 0.2);
}

TEST(Algorithm1, ReferenceAtPriorMeanRarelyHurts) {
  const Bench b(0.0);
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto a = run_algorithm1(op(seed), b.score, b.cost, b.schedule);
    const auto u = sample_uncontrolled(op(seed), b.score, b.schedule, &b.cost);
    wins += a.trajectory.costs.back() <= u.trajectory.costs.back() ? 1 : 0;
  }
  EXPECT_GE(wins, 190);
}

TEST(Algorithm1, ControllerIsResetEveryStep) {
  const Bench b(2.0);
  ResetProbe probe;
  (void)run_algorithm1(op(3), b.score, b.cost, b.schedule, {}, &probe);
  EXPECT_EQ(probe.inits, 50);
  EXPECT_EQ(probe.nonzero, 0);
  EXPECT_EQ(probe.inner, 150);
}

TEST(Algorithm1, SameSeedSameBits) {
  const Bench b(2.0);
  const auto x = run_algorithm1(op(9), b.score, b.cost, b.schedule);
  const auto y = run_algorithm1(op(9), b.score, b.cost, b.schedule);
  const auto z = run_algorithm1(op(10), b.score, b.cost, b.schedule);
  for (std::size_t i = 0; i < x.trajectory.states.size(); ++i) {
    EXPECT_TRUE(same_bits(x.trajectory.states[i].values, y.trajectory.states[i].values));
  }
  EXPECT_FALSE(same_bits(x.trajectory.final_state().values, z.trajectory.final_state().values));
}

TEST(Algorithm1, GradientModesGiveTheSameSample) {
  const Bench b(2.0);
  SamplerConfig fd = op(4);
  fd.gradient_mode = GradientMode::FiniteDifference;
  const Vector a = run_algorithm1(op(4), b.score, b.cost, b.schedule).trajectory.final_state().values;
  const Vector f = run_algorithm1(fd, b.score, b.cost, b.schedule).trajectory.final_state().values;
  EXPECT_LT((a - f).norm(), 1e-4 * a.norm());
}

// For a Gaussian prior every step is affine, so the expected cost record
// has a closed-form recursion. The Monte Carlo record must track it.
TEST(Algorithm1, CostRecordMatchesTheExactExpectation) {
  const Bench b(2.0);
  const auto span = b.schedule.alpha_bars();
  const std::vector<double> abar(span.begin(), span.end());
  for (int m : {1, 3}) {
    const auto exact = test_oracle::gaussian_alg1_cost_record(abar, 0.1, m, 2.0);
    const int runs = 2000;
    std::vector<double> sum(exact.size(), 0.0), sq(exact.size(), 0.0);
    for (int s = 0; s < runs; ++s) {
      SamplerConfig cfg = op(static_cast<std::uint64_t>(s));
      cfg.opt_steps = m;
      const auto r = run_algorithm1(cfg, b.score, b.cost, b.schedule);
      ASSERT_EQ(r.trajectory.costs.size(), exact.size());
      for (std::size_t k = 0; k < exact.size(); ++k) {
        sum[k] += r.trajectory.costs[k];
        sq[k] += r.trajectory.costs[k] * r.trajectory.costs[k];
      }
    }
    for (std::size_t k = 0; k < exact.size(); ++k) {
      const double mean = sum[k] / runs;
      const double se = std::sqrt(std::max(sq[k] / runs - mean * mean, 0.0) / runs);
      EXPECT_LE(std::abs(mean - exact[k]), 4.5 * se + 1e-12) << "M=" << m << " k=" << k;
    }
  }
}

// Documents the shape of the exact expected record: monotone for a single
// inner step; at M = 3 the DDIM inflation overshoots the reference late in
// the run and the record rises (this is why the soc-sampler suite reports
// the "non-increasing in expectation" check as failing).
TEST(Algorithm1, ExactCostRecordShape) {
  const auto s = NoiseSchedule::make(50);
  const std::vector<double> abar(s.alpha_bars().begin(), s.alpha_bars().end());
  const auto one = test_oracle::gaussian_alg1_cost_record(abar, 0.1, 1, 2.0);
  for (std::size_t k = 1; k < one.size(); ++k) EXPECT_LE(one[k], one[k - 1]) << "k=" << k;
  const auto three = test_oracle::gaussian_alg1_cost_record(abar, 0.1, 3, 2.0);
  double rise = 0.0;
  for (std::size_t k = 1; k < three.size(); ++k) rise = std::max(rise, three[k] - three[k - 1]);
  EXPECT_GT(rise, 0.01);
  EXPECT_LT(rise, 0.02);
}

TEST(ProximalSolve, StiffPenaltyKeepsThePosteriorMean) {
  const Bench b(2.0);
  SamplerConfig cfg = op();
  cfg.proximal_strength = 1e8;
  const Vector bar = vec({-0.7, 0.4});
  EXPECT_LT((proximal_x0_solve(bar, b.cost, cfg) - bar).norm(), 1e-6);
}

TEST(ProximalSolve, JointMinimumIsAFixedPoint) {
  const Bench b(2.0);
  const Vector bar = vec({2.0, -0.3});
  EXPECT_EQ(proximal_x0_solve(bar, b.cost, op()), bar);
}

TEST(ProximalSolve, ConvergesToTheRidgeSolution) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n;
  SamplerConfig cfg = op();
  cfg.opt_steps = 500;
  cfg.step_size = 0.05;
  for (int i = 0; i < 10; ++i) {
    Matrix a(2, 3);
    for (Eigen::Index j = 0; j < a.size(); ++j) a.data()[j] = 0.5 * n(rng);
    const Vector ref = vec({n(rng), n(rng)}), bar = vec({n(rng), n(rng), n(rng)});
    const TerminalCost c(std::make_shared<style::LinearExtractor>(a), ref);
    EXPECT_LT((proximal_x0_solve(bar, c, cfg) - test_oracle::ridge(a, ref, 1.0, bar)).norm(), 1e-6);
  }
}

TEST(ProximalSolve, Validation) {
  const Bench b(2.0);
  SamplerConfig cfg = op();
  cfg.proximal_strength.reset();
  EXPECT_THROW(proximal_x0_solve(vec({0, 0}), b.cost, cfg), std::invalid_argument);
  cfg.proximal_strength = 0.0;
  EXPECT_THROW(proximal_x0_solve(vec({0, 0}), b.cost, cfg), std::invalid_argument);
  EXPECT_THROW(proximal_x0_solve(vec({0, 0, 0}), b.cost, op()), std::invalid_argument);
}

TEST(Algorithm2, StiffPenaltyTracksUncontrolledDdim) {
  const Bench b(2.0);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SamplerConfig cfg = op(seed);
    cfg.proximal_strength = 1e8;
    cfg.opt_steps = 1;
    const auto a = run_algorithm2(cfg, b.score, b.cost, b.schedule);
    const auto u = sample_uncontrolled(cfg, b.score, b.schedule);
    double gap = 0.0;
    for (std::size_t i = 0; i < a.trajectory.states.size(); ++i) {
      gap = std::max(gap, (a.trajectory.states[i].values - u.trajectory.states[i].values).norm());
    }
    EXPECT_LE(gap, 1e-4) << "seed " << seed;
  }
}

TEST(Algorithm2, ComparableToAlgorithm1OnMatchedSeeds) {
  const Bench b(2.0);
  std::vector<SamplingResult> one, two;
  double free = 0.0, c1 = 0.0, c2 = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    one.push_back(run_algorithm1(op(seed), b.score, b.cost, b.schedule));
    two.push_back(run_algorithm2(op(seed), b.score, b.cost, b.schedule));
    free += sample_uncontrolled(op(seed), b.score, b.schedule, &b.cost).trajectory.costs.back();
    c1 += one.back().trajectory.costs.back();
    c2 += two.back().trajectory.costs.back();
  }
  EXPECT_LE(c1 / free, 0.2);
  EXPECT_LE(c2 / free, 0.2);
  EXPECT_LE(mean_feature_error(two, 2.0) / mean_feature_error(one, 2.0), 2.0);
}

TEST(Algorithm2, NeverDifferentiatesTheScore) {
  const Bench b(2.0);
  auto inner = std::make_shared<IsotropicGaussianScore>(Vector::Zero(2), 1.0,
                                                        variance_preserving(b.schedule));
  const CountingScore counting(inner);
  const auto r = run_algorithm2(op(1), counting, b.cost, b.schedule);
  EXPECT_EQ(counting.jacobian_calls(), 0);
  EXPECT_EQ(r.counters.score_gradient_evaluations, 0);
  EXPECT_EQ(counting.score_calls(), 50);
  EXPECT_EQ(r.trajectory.controls.size(), 50u);
}

TEST(SamplerConfig, Validation) {
  EXPECT_NO_THROW(op().validate(true));
  SamplerConfig c = op();
  c.num_steps = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = op();
  c.opt_steps = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = op();
  c.step_size = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = op();
  c.proximal_strength.reset();
  EXPECT_NO_THROW(c.validate());
  EXPECT_THROW(c.validate(true), std::invalid_argument);
}

TEST(SamplerConfig, MismatchesAreRejected) {
  const Bench b(2.0);
  SamplerConfig c = op();
  c.num_steps = 20;
  EXPECT_THROW(run_algorithm1(c, b.score, b.cost, b.schedule), std::invalid_argument);
  EXPECT_THROW(sample_uncontrolled(c, b.score, b.schedule), std::invalid_argument);
  const TerminalCost wide(std::make_shared<style::LinearExtractor>(Matrix(Eigen::RowVector3d(1, 0, 0))),
                          vec({1}));
  EXPECT_THROW(run_algorithm1(op(), b.score, wide, b.schedule), std::invalid_argument);
  EXPECT_THROW(run_algorithm2(op(), b.score, wide, b.schedule), std::invalid_argument);
}

TEST(InitialNoise, DeterministicPerSeed) {
  EXPECT_TRUE(same_bits(initial_noise(4, 12), initial_noise(4, 12)));
  EXPECT_FALSE(same_bits(initial_noise(4, 12), initial_noise(4, 13)));
  Vector sum = Vector::Zero(1);
  double sq = 0.0;
  for (std::uint64_t s = 0; s < 4000; ++s) {
    const Vector z = initial_noise(1, s);
    sum += z;
    sq += z[0] * z[0];
  }
  EXPECT_NEAR(sum[0] / 4000, 0.0, 4.0 / std::sqrt(4000.0));
  EXPECT_NEAR(sq / 4000, 1.0, 0.1);
}
