#pragma once

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "simgc/autodiff/ops.hpp"

namespace simgc {

enum class HeadKind { linear, mlp };

inline const char* to_string(HeadKind h) { return h == HeadKind::linear ? "linear" : "mlp"; }

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization for a dense layer.
template <class T, class Rng>
Matrix<T> uniform_init(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(1, fan_in)));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix<T> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = static_cast<T>(dist(rng));
  return m;
}

/// SGC: K parameter-free propagation steps followed by a prediction head Θ
/// (houses Θ, K). Linear head params: [W (d x C), b (1 x C)]; mlp head:
/// [W1 (d x h), b1, W2 (h x C), b2] with a rectifier in between.
template <class T>
struct SgcModel {
  Index depth = 2;
  HeadKind head = HeadKind::linear;
  Index hidden = 0;
  std::vector<Matrix<T>> params;

  Index in_dim() const { return static_cast<Index>(params.front().rows()); }
  Index out_dim() const { return static_cast<Index>(params[params.size() - 2].cols()); }

  template <class Rng>
  static SgcModel init(Index in_dim, Index num_classes, Index depth, HeadKind head, Index hidden, Rng& rng) {
    SgcModel m;
    m.depth = depth;
    m.head = head;
    const auto d = static_cast<Eigen::Index>(in_dim);
    const auto c = static_cast<Eigen::Index>(num_classes);
    if (head == HeadKind::linear) {
      m.params.push_back(uniform_init<T>(d, c, d, rng));
      m.params.push_back(uniform_init<T>(1, c, d, rng));
    } else {
      m.hidden = hidden;
      const auto h = static_cast<Eigen::Index>(hidden);
      m.params.push_back(uniform_init<T>(d, h, d, rng));
      m.params.push_back(uniform_init<T>(1, h, d, rng));
      m.params.push_back(uniform_init<T>(h, c, h, rng));
      m.params.push_back(uniform_init<T>(1, c, h, rng));
    }
    return m;
  }
};

/// Applies the head to `x` on the tape using `leaves` for the parameters.
template <class T>
ad::Var<T> head_forward(HeadKind head, std::span<const ad::Var<T>> leaves, const ad::Var<T>& x) {
  if (head == HeadKind::linear) return ad::add_row(ad::matmul(x, leaves[0]), leaves[1]);
  auto h = ad::relu(ad::add_row(ad::matmul(x, leaves[0]), leaves[1]));
  return ad::add_row(ad::matmul(h, leaves[2]), leaves[3]);
}

/// Logits of the head on already-propagated features. No softmax.
template <class T>
Matrix<T> predict(const SgcModel<T>& model, const Matrix<T>& propagated) {
  require(static_cast<Index>(propagated.cols()) == model.in_dim(), "predict: features have width ",
          propagated.cols(), ", head expects ", model.in_dim());
  ad::Tape<T> tape;
  std::vector<ad::Var<T>> leaves;
  for (const auto& p : model.params) leaves.push_back(tape.constant(p));
  return head_forward<T>(model.head, leaves, tape.constant(propagated)).value();
}

/// Row argmax with ties going to the lowest class id.
template <class T>
Index argmax_row(const Matrix<T>& logits, Eigen::Index row) {
  Index best = 0;
  for (Eigen::Index c = 1; c < logits.cols(); ++c)
    if (logits(row, c) > logits(row, static_cast<Eigen::Index>(best))) best = static_cast<Index>(c);
  return best;
}

/// Fraction of `mask` nodes whose argmax matches the label. Logit rows are
/// indexed by node id.
template <class T>
double accuracy(const Matrix<T>& logits, std::span<const Index> labels, std::span<const Index> mask) {
  if (mask.empty()) return 0.0;
  std::size_t hits = 0;
  for (Index v : mask) {
    require(v < static_cast<Index>(logits.rows()) && v < labels.size(), "accuracy: node ", v, " out of range");
    if (argmax_row(logits, static_cast<Eigen::Index>(v)) == labels[v]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(mask.size());
}

}  // namespace simgc
