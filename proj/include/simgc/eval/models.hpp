#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "simgc/autodiff/ops.hpp"
#include "simgc/graph/propagation.hpp"

namespace simgc::eval {

enum class Arch { gcn, sgc, mlp };

inline const char* to_string(Arch a) {
  switch (a) {
    case Arch::gcn: return "gcn";
    case Arch::sgc: return "sgc";
    case Arch::mlp: return "mlp";
  }
  return "?";
}

inline Arch parse_arch(const std::string& s) {
  if (s == "gcn") return Arch::gcn;
  if (s == "sgc") return Arch::sgc;
  if (s == "mlp") return Arch::mlp;
  throw ConfigError("unknown architecture '" + s + "' (expected gcn, sgc or mlp)");
}

/// Below this density node features are multiplied through a CSR copy.
inline constexpr double kSparseFeatureDensity = 0.1;

/// Precomputed operands of one graph: normalized adjacency, features (dense
/// or CSR) and Â^K X for the SGC evaluator.
template <class T>
struct Operands {
  Index num_nodes = 0;
  Index num_features = 0;
  std::shared_ptr<const CsrMatrix<T>> adj;
  std::shared_ptr<const CsrMatrix<T>> sparse_x;
  Matrix<T> dense_x;
  Matrix<T> propagated;  // Â^K X

  static Operands build(const SparseGraph<T>& graph, const Matrix<T>& features, Index sgc_depth) {
    Operands op;
    op.num_nodes = graph.num_nodes();
    op.num_features = static_cast<Index>(features.cols());
    auto norm = normalize(graph);
    op.propagated = propagate(norm, features, sgc_depth).last();
    op.adj = std::make_shared<const CsrMatrix<T>>(std::move(norm.adj));
    const double nnz = static_cast<double>((features.array() != T(0)).count());
    const double total = static_cast<double>(features.size());
    if (total > 0 && nnz / total < kSparseFeatureDensity)
      op.sparse_x = std::make_shared<const CsrMatrix<T>>(CsrMatrix<T>::from_dense(features));
    else
      op.dense_x = features;
    return op;
  }

  /// X W on the tape.
  ad::Var<T> features_times(const ad::Var<T>& w) const {
    if (sparse_x) return ad::spmm(sparse_x, w);
    return ad::matmul(w.tape().constant(dense_x), w);
  }
};

/// Downstream model. gcn/mlp: [W1 (d x h), b1, W2 (h x C), b2]; sgc: [W, b].
template <class T>
struct Model {
  Arch arch = Arch::gcn;
  double dropout = 0.5;
  std::vector<Matrix<T>> params;
};

template <class T, class Rng>
Matrix<T> glorot(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix<T> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = static_cast<T>(dist(rng));
  return m;
}

template <class T, class Rng>
Model<T> init_model(Arch arch, Index in_dim, Index hidden, Index num_classes, double dropout, Rng& rng) {
  Model<T> m;
  m.arch = arch;
  m.dropout = dropout;
  const auto d = static_cast<Eigen::Index>(in_dim);
  const auto h = static_cast<Eigen::Index>(hidden);
  const auto c = static_cast<Eigen::Index>(num_classes);
  if (arch == Arch::sgc) {
    m.params = {glorot<T>(d, c, rng), Matrix<T>::Zero(1, c)};
  } else {
    m.params = {glorot<T>(d, h, rng), Matrix<T>::Zero(1, h), glorot<T>(h, c, rng), Matrix<T>::Zero(1, c)};
  }
  return m;
}

/// Logits for every node of `op`. Dropout acts on the hidden layer only and
/// only when `rng` is given.
template <class T>
ad::Var<T> forward(const Model<T>& m, std::span<const ad::Var<T>> p, const Operands<T>& op,
                   std::mt19937_64* rng) {
  ad::Tape<T>& tape = p[0].tape();
  switch (m.arch) {
    case Arch::sgc:
      return ad::add_row(ad::matmul(tape.constant(op.propagated), p[0]), p[1]);
    case Arch::gcn: {
      auto h = ad::relu(ad::add_row(ad::spmm(op.adj, op.features_times(p[0])), p[1]));
      if (rng) h = ad::dropout(h, m.dropout, *rng);
      return ad::add_row(ad::spmm(op.adj, ad::matmul(h, p[2])), p[3]);
    }
    case Arch::mlp: {
      auto h = ad::relu(ad::add_row(op.features_times(p[0]), p[1]));
      if (rng) h = ad::dropout(h, m.dropout, *rng);
      return ad::add_row(ad::matmul(h, p[2]), p[3]);
    }
  }
  throw Error("forward: unknown architecture");
}

/// Inference logits for every node.
template <class T>
Matrix<T> logits(const Model<T>& m, const Operands<T>& op) {
  ad::Tape<T> tape;
  std::vector<ad::Var<T>> leaves;
  for (const auto& p : m.params) leaves.push_back(tape.constant(p));
  return forward<T>(m, leaves, op, nullptr).value();
}

}  // namespace simgc::eval
