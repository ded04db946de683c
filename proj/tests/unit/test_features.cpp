#include <rbm/errors.hpp>
#include <rbm/features.hpp>
#include <rbm/numerics.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace rbm;
using namespace rbm::style;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Matrix mat(Eigen::Index r, Eigen::Index c, std::initializer_list<double> v) {
  Matrix m(r, c);
  auto it = v.begin();
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = *it++;
  return m;
}

Vector random_vec(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

/// Central differences written out independently of the library helpers.
Vector fd_gradient(const TerminalCost& cost, const Vector& x, double h) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector up = x, down = x;
    up[i] += h;
    down[i] -= h;
    g[i] = (cost.value(up) - cost.value(down)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST(Extract, Examples) {
  EXPECT_EQ(extract(LinearExtractor(Matrix::Identity(2, 2)), vec({3, 4})), vec({3, 4}));
  EXPECT_EQ(extract(LinearExtractor(mat(1, 2, {1, 0})), vec({3, 4})), vec({3}));
  EXPECT_EQ(extract(QuadraticExtractor(2), vec({2, -3})), vec({4, 9}));
  EXPECT_THROW(extract(LinearExtractor(mat(1, 2, {1, 0})), vec({3, 4, 5})), std::invalid_argument);
  EXPECT_THROW(LinearExtractor(Matrix(0, 2)), std::invalid_argument);
}

TEST(Extract, CompositeConcatenates) {
  const CompositeExtractor both({std::make_shared<LinearExtractor>(mat(1, 2, {1, 1})),
                                std::make_shared<QuadraticExtractor>(2)});
  EXPECT_EQ(both.output_dimension(), 3);
  EXPECT_EQ(extract(both, vec({2, -3})), vec({-1, 4, 9}));
  const Matrix jac = *both.jacobian(vec({2, -3}));
  EXPECT_EQ(jac, mat(3, 2, {1, 1, 4, 0, 0, -6}));
  EXPECT_THROW(CompositeExtractor({std::make_shared<QuadraticExtractor>(2),
                                   std::make_shared<QuadraticExtractor>(3)}),
               std::invalid_argument);
}

TEST(Extract, LinearSuperposition) {
  std::mt19937_64 rng(8);
  const LinearExtractor lin(mat(2, 3, {1, -2, 0.5, 3, 0.25, -1}));
  for (int i = 0; i < 100; ++i) {
    const Vector x = random_vec(rng, 3), y = random_vec(rng, 3);
    const double a = 1.7, b = -0.3;
    EXPECT_LT((lin.evaluate(a * x + b * y) - (a * lin.evaluate(x) + b * lin.evaluate(y))).norm(), 1e-12);
  }
}

TEST(TerminalCostValue, Examples) {
  const auto id = std::make_shared<LinearExtractor>(Matrix::Identity(2, 2));
  EXPECT_EQ(TerminalCost(id, vec({1, 0})).value(vec({1, 0})), 0.0);
  EXPECT_EQ(TerminalCost(id, vec({1, 0})).value(vec({0, 0})), 1.0);
  const TerminalCost sum(std::make_shared<LinearExtractor>(mat(1, 2, {1, 1})), vec({3}));
  EXPECT_EQ(sum.value(vec({1, 1})), 1.0);
  EXPECT_THROW(TerminalCost(id, vec({1, 0, 0})), std::invalid_argument);
  EXPECT_THROW(sum.value(vec({1, 1, 1})), std::invalid_argument);
}

TEST(TerminalCostValue, NonNegativeAndZeroOnlyAtReference) {
  std::mt19937_64 rng(4);
  const TerminalCost quad(std::make_shared<QuadraticExtractor>(3), vec({1, 4, 0}));
  for (int i = 0; i < 200; ++i) EXPECT_GE(quad.value(random_vec(rng, 3)), 0.0);
  EXPECT_EQ(quad.value(vec({-1, 2, 0})), 0.0);
  EXPECT_GT(quad.value(vec({-1, 2, 1e-3})), 0.0);
}

TEST(TerminalCostGradient, Examples) {
  const auto id = std::make_shared<LinearExtractor>(Matrix::Identity(2, 2));
  EXPECT_EQ(TerminalCost(id, vec({1, 0})).gradient(vec({1, 0})), vec({0, 0}));
  EXPECT_EQ(TerminalCost(id, vec({1, 0})).gradient(vec({0, 0})), vec({-2, 0}));
  const TerminalCost quad(std::make_shared<QuadraticExtractor>(2), vec({0, 0}));
  const Vector g = quad.gradient(vec({1, 1}));
  const Vector fd = fd_gradient(quad, vec({1, 1}), 1e-5);
  EXPECT_LT((g - fd).norm() / g.norm(), 1e-5);
}

TEST(TerminalCostGradient, MatchesFiniteDifferencesAt1000Points) {
  std::mt19937_64 rng(21);
  const TerminalCost lin(std::make_shared<LinearExtractor>(mat(2, 3, {1, -2, 0.5, 3, 0.25, -1})),
                         vec({0.3, -0.7}));
  const TerminalCost quad(std::make_shared<QuadraticExtractor>(3), vec({1, 0.5, 2}));
  double lin_err = 0.0, quad_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vector x = random_vec(rng, 3);
    const Vector gl = lin.gradient(x), gq = quad.gradient(x);
    lin_err = std::max(lin_err, (gl - fd_gradient(lin, x, 1e-5)).norm() / std::max(gl.norm(), 1e-3));
    quad_err = std::max(quad_err, (gq - fd_gradient(quad, x, 1e-5)).norm() / std::max(gq.norm(), 1e-3));
  }
  EXPECT_LT(lin_err, 1e-6);
  EXPECT_LT(quad_err, 1e-4);
}

TEST(TerminalCostGradient, FiniteDifferencePathForBlackBoxes) {
  const auto box = std::make_shared<CallableExtractor>(
      [](const Vector& x) { return Vector(Vector::Constant(1, std::sin(x[0]) * x[1])); }, 2, 1);
  const TerminalCost cost(box, vec({0.2}));
  const Vector x = vec({0.7, 1.3});
  // Chain rule by hand: 2 (Psi - ref) * dPsi.
  const double r = std::sin(0.7) * 1.3 - 0.2;
  const Vector expect = 2 * r * vec({std::cos(0.7) * 1.3, std::sin(0.7)});
  EXPECT_LT((cost.gradient(x) - expect).norm(), 1e-6);

  const auto nan_box = std::make_shared<CallableExtractor>(
      [](const Vector& x) { return Vector(Vector::Constant(1, x[0] > 0.5 ? std::nan("") : x[0])); }, 1, 1);
  EXPECT_THROW(TerminalCost(nan_box, vec({0})).gradient(vec({0.5})), NumericalFailure);
}

TEST(TerminalCostProperties, ConvexAlongLinesForLinearExtractors) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit;
  const TerminalCost lin(std::make_shared<LinearExtractor>(mat(2, 3, {1, -2, 0.5, 3, 0.25, -1})),
                         vec({0.3, -0.7}));
  for (int i = 0; i < 1000; ++i) {
    const Vector x = random_vec(rng, 3), y = random_vec(rng, 3);
    const double l = unit(rng);
    EXPECT_LE(lin.value(l * x + (1 - l) * y), l * lin.value(x) + (1 - l) * lin.value(y) + 1e-10);
  }
}

TEST(TerminalCostProperties, ScaleCovariance) {
  std::mt19937_64 rng(41);
  const Matrix a = mat(2, 3, {1, -2, 0.5, 3, 0.25, -1});
  const Vector ref = vec({0.3, -0.7});
  const TerminalCost base(std::make_shared<LinearExtractor>(a), ref);
  for (double c : {0.5, 2.0, -3.0}) {
    const TerminalCost scaled(std::make_shared<LinearExtractor>(c * a), c * ref);
    for (int i = 0; i < 50; ++i) {
      const Vector x = random_vec(rng, 3);
      EXPECT_NEAR(scaled.value(x), c * c * base.value(x), 1e-12 * std::max(1.0, c * c * base.value(x)));
    }
  }
}

TEST(TerminalCostProperties, InfiniteWeightIsAFlag) {
  const TerminalCost cost(std::make_shared<QuadraticExtractor>(1), vec({1}));
  EXPECT_TRUE(cost.weight().is_infinite());
  EXPECT_THROW((void)cost.weight().value(), std::logic_error);
  EXPECT_THROW(Gamma::finite(std::numeric_limits<double>::infinity()), std::invalid_argument);
  EXPECT_THROW(Gamma::finite(-1.0), std::invalid_argument);
  EXPECT_EQ(Gamma::finite(0.0).value(), 0.0);
}
