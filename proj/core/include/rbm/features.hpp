#pragma once

#include "rbm/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace rbm::style {

/// Style descriptor Psi: R^d -> R^k.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual int input_dimension() const = 0;
  virtual int output_dimension() const = 0;
  virtual Vector evaluate(const Vector& x) const = 0;
  /// k x d Jacobian when available in closed form.
  virtual std::optional<Matrix> jacobian(const Vector& x) const = 0;
};

/// Psi(x) = A x.
class LinearExtractor final : public FeatureExtractor {
 public:
  explicit LinearExtractor(Matrix a);
  int input_dimension() const override { return static_cast<int>(a_.cols()); }
  int output_dimension() const override { return static_cast<int>(a_.rows()); }
  Vector evaluate(const Vector& x) const override;
  std::optional<Matrix> jacobian(const Vector& x) const override;
  const Matrix& matrix() const { return a_; }

 private:
  Matrix a_;
};

/// Psi(x)_i = x_i^2.
class QuadraticExtractor final : public FeatureExtractor {
 public:
  explicit QuadraticExtractor(int dimension);
  int input_dimension() const override { return dimension_; }
  int output_dimension() const override { return dimension_; }
  Vector evaluate(const Vector& x) const override;
  std::optional<Matrix> jacobian(const Vector& x) const override;

 private:
  int dimension_;
};

/// Concatenation of several extractors over the same input.
class CompositeExtractor final : public FeatureExtractor {
 public:
  explicit CompositeExtractor(std::vector<std::shared_ptr<const FeatureExtractor>> parts);
  int input_dimension() const override { return input_dim_; }
  int output_dimension() const override { return output_dim_; }
  Vector evaluate(const Vector& x) const override;
  std::optional<Matrix> jacobian(const Vector& x) const override;

 private:
  std::vector<std::shared_ptr<const FeatureExtractor>> parts_;
  int input_dim_ = 0;
  int output_dim_ = 0;
};

/// Black-box extractor without a Jacobian (gradients by finite differences).
class CallableExtractor final : public FeatureExtractor {
 public:
  CallableExtractor(std::function<Vector(const Vector&)> fn, int input_dimension,
                    int output_dimension);
  int input_dimension() const override { return input_dim_; }
  int output_dimension() const override { return output_dim_; }
  Vector evaluate(const Vector& x) const override;
  std::optional<Matrix> jacobian(const Vector&) const override { return std::nullopt; }

 private:
  std::function<Vector(const Vector&)> fn_;
  int input_dim_;
  int output_dim_;
};

/// extract(): checks the input dimension, then evaluates.
Vector extract(const FeatureExtractor& extractor, const Vector& x);

/// h(x) = ||reference - Psi(x)||^2 with weight gamma carried alongside.
class TerminalCost {
 public:
  TerminalCost(std::shared_ptr<const FeatureExtractor> extractor, Vector reference,
               Gamma weight = Gamma::infinite());

  const FeatureExtractor& extractor() const { return *extractor_; }
  std::shared_ptr<const FeatureExtractor> extractor_ptr() const { return extractor_; }
  const Vector& reference() const { return reference_; }
  Gamma weight() const { return weight_; }
  int dimension() const { return extractor_->input_dimension(); }

  double value(const Vector& x) const;

  /// Analytic 2 J^T (Psi(x) - reference) when the extractor has a Jacobian,
  /// central differences (relative step 1e-4, floor 1e-8) otherwise.
  Vector gradient(const Vector& x) const;

  /// Always the finite-difference path; used as an oracle in tests.
  Vector gradient_finite_difference(const Vector& x) const;

 private:
  std::shared_ptr<const FeatureExtractor> extractor_;
  Vector reference_;
  Gamma weight_;
};

inline double terminal_cost(const TerminalCost& cost, const Vector& x) { return cost.value(x); }
inline Vector terminal_cost_grad(const TerminalCost& cost, const Vector& x) {
  return cost.gradient(x);
}

}  // namespace rbm::style
