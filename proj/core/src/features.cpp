#include "rbm/features.hpp"

#include "rbm/errors.hpp"
#include "rbm/numerics.hpp"

#include <stdexcept>

namespace rbm::style {

LinearExtractor::LinearExtractor(Matrix a) : a_(std::move(a)) {
  if (a_.rows() == 0 || a_.cols() == 0) throw std::invalid_argument("LinearExtractor: empty A");
  if (!a_.allFinite()) throw std::invalid_argument("LinearExtractor: non-finite A");
}

Vector LinearExtractor::evaluate(const Vector& x) const {
  require_dimension(x, a_.cols(), "LinearExtractor");
  return a_ * x;
}

std::optional<Matrix> LinearExtractor::jacobian(const Vector& x) const {
  require_dimension(x, a_.cols(), "LinearExtractor");
  return a_;
}

QuadraticExtractor::QuadraticExtractor(int dimension) : dimension_(dimension) {
  if (dimension_ < 1) throw std::invalid_argument("QuadraticExtractor: dimension must be >= 1");
}

Vector QuadraticExtractor::evaluate(const Vector& x) const {
  require_dimension(x, dimension_, "QuadraticExtractor");
  return x.array().square();
}

std::optional<Matrix> QuadraticExtractor::jacobian(const Vector& x) const {
  require_dimension(x, dimension_, "QuadraticExtractor");
  return Matrix((2.0 * x).asDiagonal());
}

CompositeExtractor::CompositeExtractor(std::vector<std::shared_ptr<const FeatureExtractor>> parts)
    : parts_(std::move(parts)) {
  if (parts_.empty()) throw std::invalid_argument("CompositeExtractor: no parts");
  input_dim_ = parts_.front()->input_dimension();
  for (const auto& p : parts_) {
    if (!p || p->input_dimension() != input_dim_) {
      throw std::invalid_argument("CompositeExtractor: parts disagree on input dimension");
    }
    output_dim_ += p->output_dimension();
  }
}

Vector CompositeExtractor::evaluate(const Vector& x) const {
  Vector out(output_dim_);
  Eigen::Index offset = 0;
  for (const auto& p : parts_) {
    out.segment(offset, p->output_dimension()) = p->evaluate(x);
    offset += p->output_dimension();
  }
  return out;
}

std::optional<Matrix> CompositeExtractor::jacobian(const Vector& x) const {
  Matrix jac(output_dim_, input_dim_);
  Eigen::Index offset = 0;
  for (const auto& p : parts_) {
    auto part = p->jacobian(x);
    if (!part) return std::nullopt;
    jac.middleRows(offset, p->output_dimension()) = *part;
    offset += p->output_dimension();
  }
  return jac;
}

CallableExtractor::CallableExtractor(std::function<Vector(const Vector&)> fn, int input_dimension,
                                     int output_dimension)
    : fn_(std::move(fn)), input_dim_(input_dimension), output_dim_(output_dimension) {
  if (!fn_ || input_dim_ < 1 || output_dim_ < 1) {
    throw std::invalid_argument("CallableExtractor: invalid function or dimensions");
  }
}

Vector CallableExtractor::evaluate(const Vector& x) const {
  require_dimension(x, input_dim_, "CallableExtractor");
  Vector y = fn_(x);
  if (y.size() != output_dim_) {
    throw std::logic_error("CallableExtractor: function returned wrong dimension");
  }
  return y;
}

Vector extract(const FeatureExtractor& extractor, const Vector& x) {
  require_dimension(x, extractor.input_dimension(), "extract");
  return extractor.evaluate(x);
}

TerminalCost::TerminalCost(std::shared_ptr<const FeatureExtractor> extractor, Vector reference,
                           Gamma weight)
    : extractor_(std::move(extractor)), reference_(std::move(reference)), weight_(weight) {
  if (!extractor_) throw std::invalid_argument("TerminalCost: null extractor");
  require_dimension(reference_, extractor_->output_dimension(), "TerminalCost: reference");
}

double TerminalCost::value(const Vector& x) const {
  return (reference_ - extract(*extractor_, x)).squaredNorm();
}

Vector TerminalCost::gradient(const Vector& x) const {
  require_dimension(x, extractor_->input_dimension(), "terminal_cost_grad");
  if (auto jac = extractor_->jacobian(x)) {
    return 2.0 * jac->transpose() * (extractor_->evaluate(x) - reference_);
  }
  return gradient_finite_difference(x);
}

Vector TerminalCost::gradient_finite_difference(const Vector& x) const {
  require_dimension(x, extractor_->input_dimension(), "terminal_cost_grad");
  Vector grad = central_difference_gradient([this](const Vector& p) { return value(p); }, x);
  if (!grad.allFinite()) throw NumericalFailure("terminal_cost_grad: finite difference is NaN");
  return grad;
}

}  // namespace rbm::style
