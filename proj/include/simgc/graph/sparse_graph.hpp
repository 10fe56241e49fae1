#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "simgc/core/dense.hpp"
#include "simgc/core/error.hpp"
#include "simgc/core/runtime.hpp"

namespace simgc {

/// Compressed sparse row matrix. Column indices are sorted within each row.
template <class T>
struct CsrMatrix {
  Index rows = 0;
  Index cols = 0;
  std::vector<Index> row_ptr{0};
  std::vector<Index> col_idx;
  std::vector<T> values;

  Index nnz() const noexcept { return static_cast<Index>(col_idx.size()); }

  std::span<const Index> row_cols(Index r) const {
    return {col_idx.data() + row_ptr[r], col_idx.data() + row_ptr[r + 1]};
  }
  std::span<const T> row_values(Index r) const {
    return {values.data() + row_ptr[r], values.data() + row_ptr[r + 1]};
  }

  /// Stored value at (r, c), zero when absent.
  T at(Index r, Index c) const {
    auto cols_r = row_cols(r);
    auto it = std::lower_bound(cols_r.begin(), cols_r.end(), c);
    if (it == cols_r.end() || *it != c) return T(0);
    return values[row_ptr[r] + static_cast<Index>(it - cols_r.begin())];
  }

  Matrix<T> to_dense() const {
    Matrix<T> out = Matrix<T>::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Index r = 0; r < rows; ++r)
      for (Index k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col_idx[k])) = values[k];
    return out;
  }

  /// Keeps entries with |v| > 0.
  static CsrMatrix from_dense(const Matrix<T>& m) {
    CsrMatrix out;
    out.rows = static_cast<Index>(m.rows());
    out.cols = static_cast<Index>(m.cols());
    out.row_ptr.assign(out.rows + 1, 0);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (m(r, c) != T(0)) {
          out.col_idx.push_back(static_cast<Index>(c));
          out.values.push_back(m(r, c));
        }
      }
      out.row_ptr[r + 1] = out.nnz();
    }
    return out;
  }

  template <class U>
  CsrMatrix<U> cast() const {
    CsrMatrix<U> out;
    out.rows = rows;
    out.cols = cols;
    out.row_ptr = row_ptr;
    out.col_idx = col_idx;
    out.values.assign(values.begin(), values.end());
    return out;
  }
};

/// out = A * B, rows of the output partitioned across workers.
template <class T>
Matrix<T> spmm(const CsrMatrix<T>& a, const Matrix<T>& b) {
  require(static_cast<Index>(b.rows()) == a.cols, "spmm: operand has ", b.rows(),
          " rows, sparse matrix has ", a.cols, " columns");
  Matrix<T> out = Matrix<T>::Zero(static_cast<Eigen::Index>(a.rows), b.cols());
  parallel_rows(a.rows, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      auto dst = out.row(static_cast<Eigen::Index>(r));
      for (Index k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k)
        dst.noalias() += a.values[k] * b.row(static_cast<Eigen::Index>(a.col_idx[k]));
    }
  });
  return out;
}

/// out = A^T * B, accumulated sequentially (scatter).
template <class T>
Matrix<T> spmm_transposed(const CsrMatrix<T>& a, const Matrix<T>& b) {
  require(static_cast<Index>(b.rows()) == a.rows, "spmm_transposed: operand has ", b.rows(),
          " rows, sparse matrix has ", a.rows, " rows");
  Matrix<T> out = Matrix<T>::Zero(static_cast<Eigen::Index>(a.cols), b.cols());
  for (Index r = 0; r < a.rows; ++r) {
    auto src = b.row(static_cast<Eigen::Index>(r));
    for (Index k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k)
      out.row(static_cast<Eigen::Index>(a.col_idx[k])).noalias() += a.values[k] * src;
  }
  return out;
}

struct Edge {
  Index src = 0;
  Index dst = 0;
  double weight = 1.0;
};

/// Adjacency of the original graph (houses A).
///
/// Built only through `from_edges`, which yields the canonical form: input
/// self-loops dropped, zero-weight edges dropped, both directions stored and
/// duplicate pairs merged by maximum weight.
template <class T>
class SparseGraph {
 public:
  SparseGraph() = default;

  static SparseGraph from_edges(Index num_nodes, std::span<const Edge> edges, bool symmetrize = true) {
    std::vector<Edge> directed;
    directed.reserve(edges.size() * (symmetrize ? 2 : 1));
    for (const Edge& e : edges) {
      require(e.src < num_nodes && e.dst < num_nodes, "edge (", e.src, ", ", e.dst,
              ") out of range for ", num_nodes, " nodes");
      require(std::isfinite(e.weight) && e.weight >= 0.0, "edge (", e.src, ", ", e.dst,
              ") has invalid weight ", e.weight);
      if (e.src == e.dst || e.weight == 0.0) continue;
      directed.push_back(e);
      if (symmetrize) directed.push_back({e.dst, e.src, e.weight});
    }
    std::sort(directed.begin(), directed.end(), [](const Edge& a, const Edge& b) {
      return a.src != b.src ? a.src < b.src : a.dst < b.dst;
    });

    SparseGraph g;
    g.adj_.rows = g.adj_.cols = num_nodes;
    g.adj_.row_ptr.assign(num_nodes + 1, 0);
    for (std::size_t i = 0; i < directed.size();) {
      std::size_t j = i;
      double w = directed[i].weight;
      while (j < directed.size() && directed[j].src == directed[i].src && directed[j].dst == directed[i].dst) {
        w = std::max(w, directed[j].weight);
        ++j;
      }
      g.adj_.col_idx.push_back(directed[i].dst);
      g.adj_.values.push_back(static_cast<T>(w));
      g.adj_.row_ptr[directed[i].src + 1] += 1;
      i = j;
    }
    for (Index r = 0; r < num_nodes; ++r) g.adj_.row_ptr[r + 1] += g.adj_.row_ptr[r];
    return g;
  }

  Index num_nodes() const noexcept { return adj_.rows; }
  /// Directed entry count: an undirected edge counts twice.
  Index num_edges() const noexcept { return adj_.nnz(); }
  const CsrMatrix<T>& csr() const noexcept { return adj_; }

  std::span<const Index> neighbors(Index v) const { return adj_.row_cols(v); }
  std::span<const T> weights(Index v) const { return adj_.row_values(v); }

  bool is_symmetric() const {
    for (Index r = 0; r < adj_.rows; ++r) {
      auto cols = adj_.row_cols(r);
      auto vals = adj_.row_values(r);
      for (std::size_t k = 0; k < cols.size(); ++k)
        if (adj_.at(cols[k], r) != vals[k]) return false;
    }
    return true;
  }

  /// Edges as (src, dst, weight) in storage order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(adj_.nnz());
    for (Index r = 0; r < adj_.rows; ++r)
      for (Index k = adj_.row_ptr[r]; k < adj_.row_ptr[r + 1]; ++k)
        out.push_back({r, adj_.col_idx[k], static_cast<double>(adj_.values[k])});
    return out;
  }

  /// Induced subgraph on `nodes`; node `nodes[i]` becomes node `i`.
  SparseGraph induced(std::span<const Index> nodes) const {
    std::vector<Index> remap(num_nodes(), kUnlabeled);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      require(nodes[i] < num_nodes(), "induced: node ", nodes[i], " out of range");
      remap[nodes[i]] = static_cast<Index>(i);
    }
    std::vector<Edge> kept;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      auto cols = neighbors(nodes[i]);
      auto vals = weights(nodes[i]);
      for (std::size_t k = 0; k < cols.size(); ++k)
        if (remap[cols[k]] != kUnlabeled)
          kept.push_back({static_cast<Index>(i), remap[cols[k]], static_cast<double>(vals[k])});
    }
    return from_edges(static_cast<Index>(nodes.size()), kept, /*symmetrize=*/false);
  }

 private:
  CsrMatrix<T> adj_;
};

}  // namespace simgc
