#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "simgc/graph/sparse_graph.hpp"

namespace simgc {

/// D̃^{-1/2}(A+I)D̃^{-1/2} in CSR form (houses Â). Every node carries a
/// self-loop entry; the matrix is symmetric with weights in (0, 1].
template <class T>
struct NormalizedGraph {
  CsrMatrix<T> adj;

  Index num_nodes() const noexcept { return adj.rows; }
};

/// Symmetric normalization with self-loops. Weighted degrees include the
/// added self-loop, so an isolated node ends up with weight exactly 1.
template <class T>
NormalizedGraph<T> normalize(const SparseGraph<T>& graph) {
  const CsrMatrix<T>& a = graph.csr();
  const Index n = a.rows;

  std::vector<T> inv_sqrt_deg(n);
  for (Index r = 0; r < n; ++r) {
    // Accumulate in double so f32 and f64 graphs normalize the same way.
    double deg = 1.0;
    for (Index k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) deg += static_cast<double>(a.values[k]);
    inv_sqrt_deg[r] = static_cast<T>(1.0 / std::sqrt(deg));
  }

  NormalizedGraph<T> out;
  CsrMatrix<T>& m = out.adj;
  m.rows = m.cols = n;
  m.row_ptr.assign(n + 1, 0);
  m.col_idx.reserve(a.nnz() + n);
  m.values.reserve(a.nnz() + n);
  for (Index r = 0; r < n; ++r) {
    bool diag_done = false;
    auto emit_diag = [&] {
      m.col_idx.push_back(r);
      m.values.push_back(inv_sqrt_deg[r] * inv_sqrt_deg[r]);
      diag_done = true;
    };
    for (Index k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      const Index c = a.col_idx[k];
      if (!diag_done && c > r) emit_diag();
      m.col_idx.push_back(c);
      m.values.push_back(a.values[k] * (inv_sqrt_deg[std::min(r, c)] * inv_sqrt_deg[std::max(r, c)]));  // bitwise symmetric
    }
    if (!diag_done) emit_diag();
    m.row_ptr[r + 1] = m.nnz();
  }
  return out;
}

/// Dense variant used on condensed graphs: same rule, diagonal of `adj` is
/// ignored and replaced by the canonical self-loop.
template <class T>
Matrix<T> normalize_dense(const Matrix<T>& adj) {
  require(adj.rows() == adj.cols(), "normalize_dense: adjacency must be square");
  Matrix<T> m = adj;
  m.diagonal().setOnes();
  RowVector<T> inv_sqrt = m.rowwise().sum().transpose().array().rsqrt();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = inv_sqrt(i) * m(i, j) * inv_sqrt(j);
  return m;
}

/// Layers e_0..e_K with e_k = Â e_{k-1} (houses e_k; Z is their column concatenation).
template <class T>
struct PropagationStack {
  std::vector<Matrix<T>> layers;

  Index depth() const noexcept { return layers.empty() ? 0 : static_cast<Index>(layers.size() - 1); }
  Index num_nodes() const noexcept { return layers.empty() ? 0 : static_cast<Index>(layers.front().rows()); }
  Index width() const noexcept { return layers.empty() ? 0 : static_cast<Index>(layers.front().cols()); }

  const Matrix<T>& last() const { return layers.back(); }

  /// Rows of Z = [e_0, ..., e_K] for the given nodes.
  Matrix<T> concatenated_rows(std::span<const Index> nodes) const {
    const auto d = static_cast<Eigen::Index>(width());
    Matrix<T> z(static_cast<Eigen::Index>(nodes.size()), d * static_cast<Eigen::Index>(layers.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (std::size_t k = 0; k < layers.size(); ++k)
        z.row(static_cast<Eigen::Index>(i)).segment(static_cast<Eigen::Index>(k) * d, d) =
            layers[k].row(static_cast<Eigen::Index>(nodes[i]));
    return z;
  }
};

template <class T>
PropagationStack<T> propagate(const NormalizedGraph<T>& norm, const Matrix<T>& features, Index depth) {
  require(depth >= 1, "propagate: depth must be >= 1, got ", depth);
  require(static_cast<Index>(features.rows()) == norm.num_nodes(), "propagate: features have ",
          features.rows(), " rows, graph has ", norm.num_nodes(), " nodes");
  PropagationStack<T> stack;
  stack.layers.reserve(depth + 1);
  stack.layers.push_back(features);
  for (Index k = 1; k <= depth; ++k) stack.layers.push_back(spmm(norm.adj, stack.layers.back()));
  return stack;
}

}  // namespace simgc
