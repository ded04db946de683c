#include "rbm/attention.hpp"

#include <cmath>
#include <stdexcept>

namespace rbm::afa {

void AttentionBranch::validate() const {
  if (keys.rows() != values.rows()) {
    throw std::invalid_argument("AttentionBranch: keys and values differ in token count");
  }
  if (!keys.allFinite() || !values.allFinite()) {
    throw std::invalid_argument("AttentionBranch: non-finite entries");
  }
}

double default_scale(Eigen::Index query_width) {
  if (query_width < 1) throw std::invalid_argument("default_scale: empty query width");
  return 1.0 / std::sqrt(static_cast<double>(query_width));
}

namespace {

// Weights stored transposed (one column per query) so the normalization
// walks contiguous memory.
Matrix softmax_weights_t(const Matrix& q, const Matrix& k, double scale) {
  Matrix w = (k * q.transpose()) * scale;
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    auto col = w.col(c);
    col.array() = (col.array() - col.maxCoeff()).exp();
    col /= col.sum();
  }
  return w;
}

}  // namespace

Matrix softmax_weights(const Matrix& q, const Matrix& k, double scale) {
  if (k.rows() == 0) throw std::invalid_argument("attention: no keys");
  if (q.cols() != k.cols()) throw std::invalid_argument("attention: query/key width mismatch");
  return softmax_weights_t(q, k, scale).transpose();
}

Matrix attention(const Matrix& q, const Matrix& k, const Matrix& v, double scale, int heads) {
  if (!(scale > 0.0)) throw std::invalid_argument("attention: scale must be > 0");
  if (k.rows() == 0) throw std::invalid_argument("attention: no keys");
  if (k.rows() != v.rows()) throw std::invalid_argument("attention: key/value token mismatch");
  if (q.cols() != k.cols()) throw std::invalid_argument("attention: query/key width mismatch");
  if (heads < 1 || k.cols() % heads != 0 || v.cols() % heads != 0) {
    throw std::invalid_argument("attention: widths must split evenly across heads");
  }
  if (heads == 1) return softmax_weights_t(q, k, scale).transpose() * v;

  const Eigen::Index qk = k.cols() / heads;
  const Eigen::Index hv = v.cols() / heads;
  Matrix out(q.rows(), v.cols());
  for (int h = 0; h < heads; ++h) {
    out.middleCols(h * hv, hv) =
        softmax_weights_t(q.middleCols(h * qk, qk), k.middleCols(h * qk, qk), scale).transpose() *
        v.middleCols(h * hv, hv);
  }
  return out;
}

Matrix attention(const Matrix& q, const AttentionBranch& branch, double scale, int heads) {
  return attention(q, branch.keys, branch.values, scale, heads);
}

AttentionBranch concat_tokens(const std::vector<AttentionBranch>& branches) {
  if (branches.empty()) throw std::invalid_argument("concat_tokens: no branches");
  const Eigen::Index nq = branches.front().keys.cols();
  const Eigen::Index nh = branches.front().values.cols();
  Eigen::Index total = 0;
  for (const auto& b : branches) {
    if (b.keys.cols() != nq || b.values.cols() != nh) {
      throw std::invalid_argument("concat_tokens: branch widths differ");
    }
    if (b.keys.rows() != b.values.rows()) {
      throw std::invalid_argument("concat_tokens: keys and values differ in token count");
    }
    total += b.tokens();
  }
  AttentionBranch out{Matrix(total, nq), Matrix(total, nh)};
  Eigen::Index row = 0;
  for (const auto& b : branches) {
    out.keys.middleRows(row, b.tokens()) = b.keys;
    out.values.middleRows(row, b.tokens()) = b.values;
    row += b.tokens();
  }
  return out;
}

StylizeResult afa_stylize(const Matrix& q, const AttentionBranch& base,
                          const AttentionBranch& prompt, const AttentionBranch& style,
                          double scale, int heads) {
  StylizeResult r;
  r.branches[0] = attention(q, concat_tokens({base, prompt}), scale, heads);
  r.branches[1] = attention(q, concat_tokens({base, style}), scale, heads);
  r.branches[2] = attention(q, concat_tokens({base, prompt, style}), scale, heads);
  r.output = (r.branches[0] + r.branches[1] + r.branches[2]) / 3.0;
  return r;
}

ComposeResult afa_compose(const Matrix& q, const AttentionBranch& base,
                          const AttentionBranch& prompt, const AttentionBranch& style,
                          const AttentionBranch& content, double scale, int heads) {
  ComposeResult r;
  r.branches[0] = attention(q, concat_tokens({base, prompt}), scale, heads);
  r.branches[1] = attention(q, concat_tokens({base, style}), scale, heads);
  r.branches[2] = attention(q, concat_tokens({base, content}), scale, heads);
  r.branches[3] = attention(q, concat_tokens({base, style, content}), scale, heads);
  r.output = (r.branches[0] + r.branches[1] + r.branches[2] + r.branches[3]) / 4.0;
  return r;
}

}  // namespace rbm::afa
