#include <rbm/control.hpp>
#include <rbm/errors.hpp>
#include <rbm/features.hpp>
#include <rbm/simulate.hpp>

#include <gtest/gtest.h>

using namespace rbm;
using namespace rbm::control;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Controller bridge_to(const Vector& x1) {
  return [x1](const Vector& x, double t) { return bridge_controller(x, t, x1, Gamma::infinite()); };
}

}  // namespace

TEST(Simulate, ZeroControllerKeepsTheStateConstant) {
  const Vector x0 = vec({1.5, -2});
  const auto traj = simulate_controlled([](const Vector& x, double) { return Vector(Vector::Zero(x.size())); }, x0,
                                        {.initial_time = 0.0, .step = 0.01});
  ASSERT_EQ(traj.states.size(), 100u);
  EXPECT_EQ(traj.controls.size(), 99u);
  EXPECT_NO_THROW(traj.validate());
  for (const auto& s : traj.states) EXPECT_EQ(s.values, x0);
}

TEST(Simulate, DeterministicBridgeReachesTheTarget) {
  const Vector x1 = vec({0, 0});
  const auto traj = simulate_controlled(bridge_to(x1), vec({1, -1}), {.initial_time = 0.0, .step = 1e-3});
  EXPECT_LT((traj.final_state().values - x1).norm(), 1e-2);
  EXPECT_NEAR(simulated_time(traj.final_state(), 1e-3), 1.0 - 1e-3, 1e-12);
}

TEST(Simulate, NoisyBridgeMeanMatchesTheDeterministicPath) {
  // The feedback law is affine in x, so the Euler-Maruyama mean equals the
  // deterministic Euler path exactly (certainty equivalence at the discrete
  // level). The 1e4-path comparison against x1 itself lives in the
  // optimal-control verification suite.
  const Vector x0 = vec({1, -1}), x1 = vec({0.5, 0.25});
  const Vector target = simulate_controlled(bridge_to(x1), x0, {.initial_time = 0.0, .step = 1e-3})
                            .final_state()
                            .values;
  const int paths = 2000;
  Vector sum = Vector::Zero(2), sum_sq = Vector::Zero(2);
  for (int p = 0; p < paths; ++p) {
    SimulationOptions opt{.initial_time = 0.0, .step = 1e-3};
    opt.noise_seed = 1000 + p;
    const Vector end = simulate_controlled(bridge_to(x1), x0, opt).final_state().values;
    sum += end;
    sum_sq += end.cwiseProduct(end);
  }
  const Vector mean = sum / paths;
  const Vector var = (sum_sq - paths * mean.cwiseProduct(mean)) / (paths - 1);
  for (int i = 0; i < 2; ++i) EXPECT_LT(std::abs(mean[i] - target[i]), 3.0 * std::sqrt(var[i] / paths));
  EXPECT_LT((mean - x1).norm(), 1e-2);
}

TEST(Simulate, SameSeedSameNoise) {
  SimulationOptions opt{.initial_time = 0.2, .step = 1e-2};
  opt.noise_seed = 9;
  const auto a = simulate_controlled(bridge_to(vec({0})), vec({1}), opt);
  const auto b = simulate_controlled(bridge_to(vec({0})), vec({1}), opt);
  ASSERT_EQ(a.states.size(), 80u);
  for (std::size_t i = 0; i < a.states.size(); ++i) EXPECT_EQ(a.states[i].values, b.states[i].values);
}

TEST(Simulate, StatePlusControlDriftAndCostRecord) {
  const style::TerminalCost cost(std::make_shared<style::LinearExtractor>(Matrix::Identity(1, 1)), vec({0}));
  SimulationOptions opt{.initial_time = 0.0, .step = 1e-3};
  opt.drift_mode = DriftMode::StatePlusControl;
  opt.cost = &cost;
  const auto traj = simulate_controlled([](const Vector& x, double) { return Vector(Vector::Zero(x.size())); },
                                        vec({1}), opt);
  // Explicit Euler for x' = x: (1 + dt)^n.
  const double n = static_cast<double>(traj.states.size() - 1);
  EXPECT_NEAR(traj.final_state().values[0], std::pow(1.001, n), 1e-12);
  ASSERT_EQ(traj.costs.size(), traj.states.size());
  EXPECT_EQ(traj.costs.front(), 1.0);
}

TEST(Simulate, NonFiniteStateAborts) {
  const Controller blowup = [](const Vector& x, double t) {
    return t > 0.5 ? Vector(Vector::Constant(x.size(), std::numeric_limits<double>::infinity())) : Vector(x);
  };
  try {
    (void)simulate_controlled(blowup, vec({1}), {.initial_time = 0.0, .step = 0.1});
    FAIL() << "expected AbortedTrajectory";
  } catch (const AbortedTrajectory& e) {
    EXPECT_EQ(e.last_finite_step(), 6);
    EXPECT_TRUE(e.last_finite_state().allFinite());
  }
}

TEST(Simulate, InvalidArguments) {
  const auto zero = [](const Vector& x, double) { return Vector(Vector::Zero(x.size())); };
  EXPECT_THROW(simulate_controlled(zero, vec({1}), {.initial_time = 1.0, .step = 0.1}), std::invalid_argument);
  EXPECT_THROW(simulate_controlled(zero, vec({1}), {.initial_time = 0.0, .step = 0.0}), std::invalid_argument);
  EXPECT_THROW(simulate_controlled(nullptr, vec({1}), {}), std::invalid_argument);
}
