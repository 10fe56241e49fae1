#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "simgc/autodiff/ops.hpp"
#include "simgc/core/log.hpp"
#include "simgc/sgc/model.hpp"

namespace simgc {

enum class ReductionBasis {
  nodes,  // r * N condensed nodes, split by the training-label histogram
  train,  // r * N_c per class, N_c counted over training nodes
};

enum class Activation { relu, tanh };

/// Condensed labels Y'. Class c receives max(1, round(N_c * rate)) nodes
/// where N_c counts training nodes of class c; with the `nodes` basis the
/// rate is rescaled to r * N / |train| so the total tracks r * N. The result
/// is sorted by class id. Classes without training nodes are skipped.
inline IndexList sample_labels(std::span<const Index> labels, std::span<const Index> train, Index num_classes,
                               double rate, ReductionBasis basis, Index original_nodes) {
  require(rate > 0.0 && rate <= 1.0, "sample_labels: reduction rate must be in (0, 1], got ", rate);
  require(!train.empty(), "sample_labels: empty training split");
  std::vector<Index> counts(num_classes, 0);
  for (Index v : train) {
    require(labels[v] < num_classes, "sample_labels: training node ", v, " has no valid label");
    ++counts[labels[v]];
  }
  const double effective = basis == ReductionBasis::nodes
                               ? rate * static_cast<double>(original_nodes) / static_cast<double>(train.size())
                               : rate;
  IndexList out;
  for (Index c = 0; c < num_classes; ++c) {
    if (counts[c] == 0) {
      log::info("sample_labels: class ", c, " has no training nodes; skipped");
      continue;
    }
    const auto n = std::max<long long>(1, std::llround(static_cast<double>(counts[c]) * effective));
    out.insert(out.end(), static_cast<std::size_t>(n), c);
  }
  return out;
}

/// Each condensed node copies the features of a training node of its class.
/// Sources are drawn without replacement per class, reshuffling once a class
/// runs out.
template <class T>
Matrix<T> init_features(const Matrix<T>& features, std::span<const Index> labels, std::span<const Index> train,
                        std::span<const Index> condensed_labels, std::uint64_t seed) {
  Index num_classes = 0;
  for (Index y : condensed_labels) num_classes = std::max(num_classes, y + 1);
  std::vector<IndexList> pool(num_classes);
  for (Index v : train)
    if (labels[v] < num_classes) pool[labels[v]].push_back(v);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> cursor(num_classes, 0);
  for (auto& p : pool) std::shuffle(p.begin(), p.end(), rng);

  Matrix<T> out(static_cast<Eigen::Index>(condensed_labels.size()), features.cols());
  for (std::size_t i = 0; i < condensed_labels.size(); ++i) {
    const Index c = condensed_labels[i];
    auto& p = pool[c];
    require(!p.empty(), "init_features: class ", c, " has no training node to copy");
    if (cursor[c] == p.size()) {
      std::shuffle(p.begin(), p.end(), rng);
      cursor[c] = 0;
    }
    out.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(p[cursor[c]++]));
  }
  return out;
}

/// g_φ: MLP scoring a concatenated feature pair [x_i ; x_j] (houses φ).
/// params = [W_in (2d x h), b_in, {W (h x h), b} x (layers - 1), W_out (h x 1), b_out].
template <class T>
struct AdjacencyGenerator {
  Index in_dim = 0;
  Index hidden = 128;
  Index layers = 2;
  Activation activation = Activation::relu;
  std::vector<Matrix<T>> params;

  template <class Rng>
  static AdjacencyGenerator init(Index in_dim, Index hidden, Index layers, Activation act, Rng& rng) {
    require(layers >= 1, "generator needs at least one hidden layer");
    AdjacencyGenerator g;
    g.in_dim = in_dim;
    g.hidden = hidden;
    g.layers = layers;
    g.activation = act;
    const auto d2 = static_cast<Eigen::Index>(2 * in_dim);
    const auto h = static_cast<Eigen::Index>(hidden);
    g.params.push_back(uniform_init<T>(d2, h, d2, rng));
    g.params.push_back(uniform_init<T>(1, h, d2, rng));
    for (Index l = 1; l < layers; ++l) {
      g.params.push_back(uniform_init<T>(h, h, h, rng));
      g.params.push_back(uniform_init<T>(1, h, h, rng));
    }
    g.params.push_back(uniform_init<T>(h, 1, h, rng));
    g.params.push_back(uniform_init<T>(1, 1, h, rng));
    return g;
  }

  /// Scores g_φ([x_i ; x_j]) for all ordered pairs, row i*n + j. The first
  /// layer is split as X W_top ⊕ X W_bottom so the n² x 2d pair matrix is
  /// never formed.
  ad::Var<T> pair_scores(std::span<const ad::Var<T>> leaves, const ad::Var<T>& x) const {
    const auto d = static_cast<Eigen::Index>(in_dim);
    require(x.cols() == d, "generator: features have width ", x.cols(), ", expected ", d);
    auto act = [this](const ad::Var<T>& v) { return activation == Activation::relu ? ad::relu(v) : ad::tanh(v); };
    auto top = ad::matmul(x, ad::row_block(leaves[0], 0, d));
    auto bottom = ad::matmul(x, ad::row_block(leaves[0], d, d));
    auto h = act(ad::add_row(ad::pair_sum(top, bottom), leaves[1]));
    std::size_t k = 2;
    for (Index l = 1; l < layers; ++l, k += 2) h = act(ad::add_row(ad::matmul(h, leaves[k]), leaves[k + 1]));
    return ad::add_row(ad::matmul(h, leaves[k]), leaves[k + 1]);
  }

  /// A' on the tape: sigmoid of order-averaged scores, entries below delta
  /// and the diagonal set to zero.
  ad::Var<T> adjacency(std::span<const ad::Var<T>> leaves, const ad::Var<T>& x, T delta) const {
    auto scores = pair_scores(leaves, x);
    auto a = ad::sigmoid(ad::pair_average(scores, x.rows()));
    return ad::threshold(a, delta, /*zero_diagonal=*/true);
  }
};

/// Untaped A' for the given parameters.
template <class T>
Matrix<T> generate_adjacency(const AdjacencyGenerator<T>& gen, const Matrix<T>& features, T delta) {
  ad::Tape<T> tape;
  std::vector<ad::Var<T>> leaves;
  for (const auto& p : gen.params) leaves.push_back(tape.constant(p));
  return gen.adjacency(leaves, tape.constant(features), delta).value();
}

/// S = (A', X', Y') plus the generator that produced A' (houses N', δ).
template <class T>
struct CondensedGraph {
  Matrix<T> features;
  IndexList labels;
  AdjacencyGenerator<T> generator;
  T delta = T(0.01);
  Matrix<T> adjacency;  // thresholded, zero diagonal
  Index num_classes = 0;

  Index num_nodes() const noexcept { return labels.size(); }

  std::vector<Index> class_counts() const {
    std::vector<Index> counts(num_classes, 0);
    for (Index y : labels) ++counts[y];
    return counts;
  }
};

}  // namespace simgc
