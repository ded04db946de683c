#pragma once

#include "rbm/types.hpp"

#include <array>
#include <vector>

/// Attention feature aggregation over token-concatenated key/value branches.
namespace rbm::afa {

/// Keys (m x n_q) and values (m x n_h) for m tokens.
struct AttentionBranch {
  Matrix keys;
  Matrix values;

  Eigen::Index tokens() const { return keys.rows(); }
  /// Throws std::invalid_argument on mismatched token counts or non-finite entries.
  void validate() const;
};

/// 1 / sqrt(n_q).
double default_scale(Eigen::Index query_width);

/// Row-wise softmax(Q K^T scale), max-shifted for stability.
Matrix softmax_weights(const Matrix& q, const Matrix& k, double scale);

/// softmax(Q K^T scale) V. With heads > 1 the key and value widths are split
/// evenly and the per-head outputs are concatenated column-wise.
Matrix attention(const Matrix& q, const Matrix& k, const Matrix& v, double scale, int heads = 1);
Matrix attention(const Matrix& q, const AttentionBranch& branch, double scale, int heads = 1);

/// Stacks branches along the token axis, order preserved.
AttentionBranch concat_tokens(const std::vector<AttentionBranch>& branches);

struct StylizeResult {
  Matrix output;
  /// text, style, text+style
  std::array<Matrix, 3> branches;
};

struct ComposeResult {
  Matrix output;
  /// text, style, content, content+style
  std::array<Matrix, 4> branches;
};

/// Mean of Attention over [base; prompt], [base; style] and
/// [base; prompt; style].
StylizeResult afa_stylize(const Matrix& q, const AttentionBranch& base,
                          const AttentionBranch& prompt, const AttentionBranch& style,
                          double scale, int heads = 1);

/// Mean of Attention over [base; prompt], [base; style], [base; content] and
/// [base; style; content]. The text+style branch is deliberately absent.
ComposeResult afa_compose(const Matrix& q, const AttentionBranch& base,
                          const AttentionBranch& prompt, const AttentionBranch& style,
                          const AttentionBranch& content, double scale, int heads = 1);

}  // namespace rbm::afa
