#include <rbm/numerics.hpp>
#include <rbm/schedule.hpp>
#include <rbm/score.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace rbm;
using namespace rbm::diffusion;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::vector<std::shared_ptr<AnalyticScoreModel>> analytic_models() {
  const auto vp = variance_preserving(NoiseSchedule::make(50));
  return {
      std::make_shared<IsotropicGaussianScore>(vec({0.5, -1.0}), 2.0, vp),
      std::make_shared<IsotropicGaussianScore>(vec({0.0, 0.0}), 1.0, flow_path()),
      std::make_shared<GaussianMixtureScore>(std::vector<double>{0.3, 0.7},
                                             std::vector<Vector>{vec({-1, -1}), vec({1.5, 1.5})},
                                             std::vector<double>{0.5, 0.2}, vp),
      std::make_shared<GaussianMixtureScore>(std::vector<double>{0.2, 0.5, 0.3},
                                             std::vector<Vector>{vec({-2, 0}), vec({0, 2}), vec({2, -1})},
                                             std::vector<double>{0.1, 0.3, 0.05}, flow_path()),
  };
}

}  // namespace

TEST(Score, MatchesLogDensityFiniteDifferencesAt1000Points) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.02, 0.98);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (const auto& model : analytic_models()) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double t = unit(rng);
      const Vector x = vec({normal(rng), normal(rng)});
      const Vector fd = central_difference_gradient(
          [&](const Vector& p) { return model->log_density(p, t); }, x, 0.0, 1e-5);
      const Vector s = model->score(x, t);
      worst = std::max(worst, (fd - s).norm() / std::max(s.norm(), 1.0));
    }
    EXPECT_LT(worst, 1e-5);
  }
}

TEST(Score, AnalyticJacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  for (const auto& model : analytic_models()) {
    for (int i = 0; i < 20; ++i) {
      const Vector x = vec({normal(rng), normal(rng)});
      const auto jac = model->score_jacobian(x, 0.4);
      ASSERT_TRUE(jac.has_value());
      const Matrix fd = central_difference_jacobian([&](const Vector& p) { return model->score(p, 0.4); },
                                                    x, 0.0, 1e-6);
      EXPECT_LT((*jac - fd).lpNorm<Eigen::Infinity>(), 1e-6 * std::max(1.0, fd.norm()));
    }
  }
}

TEST(Score, ConstructorValidation) {
  const auto vp = variance_preserving(NoiseSchedule::make(10));
  EXPECT_THROW(IsotropicGaussianScore(vec({0}), 0.0, vp), std::invalid_argument);
  EXPECT_THROW(IsotropicGaussianScore(vec({0}), 1.0, nullptr), std::invalid_argument);
  EXPECT_THROW(GaussianMixtureScore({0.5, 0.6}, {vec({0}), vec({1})}, {1, 1}, vp), std::invalid_argument);
  EXPECT_THROW(GaussianMixtureScore({0.5, 0.5}, {vec({0}), vec({1, 1})}, {1, 1}, vp), std::invalid_argument);
  EXPECT_THROW(GaussianMixtureScore({1.0}, {vec({0})}, {-1}, vp), std::invalid_argument);
}

TEST(Score, TabulatedApproximatesTheSourceModel) {
  const IsotropicGaussianScore one_d(vec({0.0}), 1.0, flow_path());
  const auto table = TabulatedScore::from_model(one_d, 3, 0.0, 0.9, 91, -4.0, 4.0, 801);
  EXPECT_EQ(table.dimension(), 3);
  EXPECT_FALSE(table.score_jacobian(vec({0, 0, 0}), 0.5).has_value());
  const Vector x = vec({0.31, -1.2, 2.05});
  const Vector expect = vec({one_d.score(vec({0.31}), 0.45)[0], one_d.score(vec({-1.2}), 0.45)[0],
                             one_d.score(vec({2.05}), 0.45)[0]});
  EXPECT_LT((table.score(x, 0.45) - expect).lpNorm<Eigen::Infinity>(), 1e-3);
}

TEST(Score, ConditionalSelectsByContext) {
  const auto vp = variance_preserving(NoiseSchedule::make(10));
  auto base = std::make_shared<IsotropicGaussianScore>(vec({0, 0}), 1.0, vp);
  auto cat = std::make_shared<IsotropicGaussianScore>(vec({3, 3}), 1.0, vp);
  const ConditionalScore cond(base, {{"cat", cat}});
  const Vector x = vec({0.5, 0.5});
  EXPECT_EQ(cond.score(x, 0.5), base->score(x, 0.5));
  EXPECT_EQ(cond.score(x, 0.5, "cat"), cat->score(x, 0.5));
  EXPECT_THROW(cond.score(x, 0.5, "dog"), std::invalid_argument);
}

TEST(Score, CountingWrapperCounts) {
  const auto vp = variance_preserving(NoiseSchedule::make(10));
  const CountingScore counting(std::make_shared<IsotropicGaussianScore>(vec({0, 0}), 1.0, vp));
  (void)counting.score(vec({1, 1}), 0.3);
  (void)counting.score(vec({1, 1}), 0.3);
  (void)counting.score_jacobian(vec({1, 1}), 0.3);
  EXPECT_EQ(counting.score_calls(), 2);
  EXPECT_EQ(counting.jacobian_calls(), 1);
}
