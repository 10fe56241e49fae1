#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "simgc/autodiff/tape.hpp"
#include "simgc/graph/sparse_graph.hpp"

namespace simgc::ad {

namespace detail {

template <class T>
void same_shape(const Var<T>& a, const Var<T>& b, const char* op) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), op, ": shape mismatch ", a.rows(), "x", a.cols(), " vs ",
          b.rows(), "x", b.cols());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Linear algebra

template <class T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  require(a.cols() == b.rows(), "matmul: shape mismatch ", a.rows(), "x", a.cols(), " * ", b.rows(), "x", b.cols());
  Matrix<T> out = a.value() * b.value();
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.upstream(self);
    if (a.requires_grad()) t.accumulate(a, g * b.value().transpose());
    if (b.requires_grad()) t.accumulate(b, a.value().transpose() * g);
  }, "matmul");
}

/// Constant sparse left operand times a node: out = S * b.
template <class T>
Var<T> spmm(std::shared_ptr<const CsrMatrix<T>> s, const Var<T>& b) {
  Matrix<T> out = simgc::spmm(*s, b.value());
  return b.tape().record(std::move(out), {b}, [s, b](Tape<T>& t, std::size_t self) {
    t.accumulate(b, spmm_transposed(*s, t.upstream(self)));
  }, "spmm");
}

template <class T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  detail::same_shape(a, b, "add");
  return a.tape().record(a.value() + b.value(), {a, b}, [a, b](Tape<T>& t, std::size_t self) {
    t.accumulate(a, t.upstream(self));
    t.accumulate(b, t.upstream(self));
  }, "add");
}

template <class T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  detail::same_shape(a, b, "sub");
  return a.tape().record(a.value() - b.value(), {a, b}, [a, b](Tape<T>& t, std::size_t self) {
    t.accumulate(a, t.upstream(self));
    t.accumulate(b, -t.upstream(self));
  }, "sub");
}

/// Elementwise product.
template <class T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  detail::same_shape(a, b, "mul");
  Matrix<T> out = a.value().cwiseProduct(b.value());
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.upstream(self);
    if (a.requires_grad()) t.accumulate(a, g.cwiseProduct(b.value()));
    if (b.requires_grad()) t.accumulate(b, g.cwiseProduct(a.value()));
  }, "mul");
}

template <class T>
Var<T> scale(const Var<T>& a, T s) {
  return a.tape().record(a.value() * s, {a}, [a, s](Tape<T>& t, std::size_t self) {
    t.accumulate(a, t.upstream(self) * s);
  }, "scale");
}

template <class T>
Var<T> add_scalar(const Var<T>& a, T s) {
  Matrix<T> out = a.value().array() + s;
  return a.tape().record(std::move(out), {a}, [a](Tape<T>& t, std::size_t self) {
    t.accumulate(a, t.upstream(self));
  }, "add_scalar");
}

/// 1 - a.
template <class T>
Var<T> one_minus(const Var<T>& a) {
  return add_scalar(scale(a, T(-1)), T(1));
}

/// a + bias broadcast over rows (bias is 1 x cols). The only broadcast supported.
template <class T>
Var<T> add_row(const Var<T>& a, const Var<T>& bias) {
  require(bias.rows() == 1 && bias.cols() == a.cols(), "add_row: bias must be 1x", a.cols(), ", got ", bias.rows(),
          "x", bias.cols());
  Matrix<T> out = a.value().rowwise() + bias.value().row(0);
  return a.tape().record(std::move(out), {a, bias}, [a, bias](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.upstream(self);
    t.accumulate(a, g);
    if (bias.requires_grad()) t.accumulate(bias, g.colwise().sum());
  }, "add_row");
}

template <class T>
Var<T> concat_cols(const std::vector<Var<T>>& parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    require(p.rows() == parts.front().rows(), "concat_cols: row mismatch ", p.rows(), " vs ", parts.front().rows());
    cols += p.cols();
  }
  Matrix<T> out(parts.front().rows(), cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return parts.front().tape().record(std::move(out), parts, [parts](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.upstream(self);
    Eigen::Index off = 0;
    for (const auto& p : parts) {
      t.accumulate(p, g.middleCols(off, p.cols()));
      off += p.cols();
    }
  }, "concat_cols");
}

/// Rows `idx` of a, in order.
template <class T>
Var<T> gather_rows(const Var<T>& a, std::vector<Index> idx) {
  Matrix<T> out(static_cast<Eigen::Index>(idx.size()), a.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    require(idx[i] < static_cast<Index>(a.rows()), "gather_rows: row ", idx[i], " out of range");
    out.row(static_cast<Eigen::Index>(i)) = a.value().row(static_cast<Eigen::Index>(idx[i]));
  }
  return a.tape().record(std::move(out), {a}, [a, idx = std::move(idx)](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.upstream(self);
    Matrix<T>* ga = t.grad_for_update(a);
    for (std::size_t i = 0; i < idx.size(); ++i)
      ga->row(static_cast<Eigen::Index>(idx[i])) += g.row(static_cast<Eigen::Index>(i));
  }, "gather_rows");
}

/// Contiguous row block [begin, begin + count).
template <class T>
Var<T> row_block(const Var<T>& a, Eigen::Index begin, Eigen::Index count) {
  require(begin >= 0 && count >= 0 && begin + count <= a.rows(), "row_block: [", begin, ", ", begin + count,
          ") outside ", a.rows(), " rows");
  Matrix<T> out = a.value().middleRows(begin, count);
  return a.tape().record(std::move(out), {a}, [a, begin, count](Tape<T>& t, std::size_t self) {
    t.grad_for_update(a)->middleRows(begin, count) += t.upstream(self);
  }, "row_block");
}

// ---------------------------------------------------------------------------
// Reductions

template <class T>
Var<T> sum(const Var<T>& a) {
  Matrix<T> out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape().record(std::move(out), {a}, [a](Tape<T>& t, std::size_t self) {
    const T g = t.upstream(self)(0, 0);
    t.accumulate(a, Matrix<T>::Constant(a.rows(), a.cols(), g));
  }, "sum");
}

/// Column means over rows: 1 x cols.
template <class T>
Var<T> mean_rows(const Var<T>& a) {
  require(a.rows() > 0, "mean_rows: empty input");
  Matrix<T> out = a.value().colwise().mean();
  return a.tape().record(std::move(out), {a}, [a](Tape<T>& t, std::size_t self) {
    const T inv = T(1) / static_cast<T>(a.rows());
    Matrix<T>* ga = t.grad_for_update(a);
    ga->rowwise() += t.upstream(self).row(0) * inv;
  }, "mean_rows");
}

/// Column standard deviations over rows: 1 x cols. Population convention
/// divides by n, sample by n - 1. Where a column's std is 0 its gradient is
/// taken as 0.
template <class T>
Var<T> std_rows(const Var<T>& a, bool population = true) {
  const Eigen::Index n = a.rows();
  require(n > 0, "std_rows: empty input");
  const T denom = population ? static_cast<T>(n) : static_cast<T>(n - 1);
  RowVector<T> mu = a.value().colwise().mean();
  Matrix<T> centered = a.value().rowwise() - mu;
  Matrix<T> out(1, a.cols());
  if (denom > T(0)) out.row(0) = (centered.array().square().colwise().sum() / denom).sqrt().matrix();
  else out.setZero();
  Matrix<T> sigma = out;
  return a.tape().record(std::move(out), {a}, [a, centered = std::move(centered), sigma, denom](Tape<T>& t, std::size_t self) {
    if (denom <= T(0)) return;
    const Matrix<T>& g = t.upstream(self);
    RowVector<T> coef(sigma.cols());
    for (Eigen::Index c = 0; c < sigma.cols(); ++c)
      coef(c) = sigma(0, c) > T(0) ? g(0, c) / (denom * sigma(0, c)) : T(0);
    Matrix<T>* ga = t.grad_for_update(a);
    *ga += (centered.array().rowwise() * coef.array()).matrix();
  }, "std_rows");
}

// ---------------------------------------------------------------------------
// Elementwise nonlinearities

template <class T>
Var<T> relu(const Var<T>& a) {
  Matrix<T> out = a.value().cwiseMax(T(0));
  return a.tape().record(std::move(out), {a}, [a](Tape<T>& t, std::size_t self) {
    t.accumulate(a, (a.value().array() > T(0)).select(t.upstream(self), T(0)));
  }, "relu");
}

template <class T>
Var<T> sigmoid(const Var<T>& a) {
  Matrix<T> out = (T(1) / (T(1) + (-a.value().array()).exp())).matrix();
  Matrix<T> s = out;
  return a.tape().record(std::move(out), {a}, [a, s = std::move(s)](Tape<T>& t, std::size_t self) {
    t.accumulate(a, (t.upstream(self).array() * s.array() * (T(1) - s.array())).matrix());
  }, "sigmoid");
}

template <class T>
Var<T> exp(const Var<T>& a) {
  Matrix<T> out = a.value().array().exp().matrix();
  Matrix<T> e = out;
  return a.tape().record(std::move(out), {a}, [a, e = std::move(e)](Tape<T>& t, std::size_t self) {
    t.accumulate(a, t.upstream(self).cwiseProduct(e));
  }, "exp");
}

template <class T>
Var<T> tanh(const Var<T>& a) {
  Matrix<T> out = a.value().array().tanh().matrix();
  Matrix<T> th = out;
  return a.tape().record(std::move(out), {a}, [a, th = std::move(th)](Tape<T>& t, std::size_t self) {
    t.accumulate(a, (t.upstream(self).array() * (T(1) - th.array().square())).matrix());
  }, "tanh");
}

/// Inverted dropout: kept entries scaled by 1/(1-p). The sampled mask is
/// recorded for the backward pass. p = 0 returns `a` itself.
template <class T, class Rng>
Var<T> dropout(const Var<T>& a, double p, Rng& rng) {
  require(p >= 0.0 && p < 1.0, "dropout: p must be in [0, 1), got ", p);
  if (p == 0.0) return a;
  std::bernoulli_distribution keep(1.0 - p);
  const T scale_kept = static_cast<T>(1.0 / (1.0 - p));
  Matrix<T> mask(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < mask.rows(); ++i)
    for (Eigen::Index j = 0; j < mask.cols(); ++j) mask(i, j) = keep(rng) ? scale_kept : T(0);
  Matrix<T> out = a.value().cwiseProduct(mask);
  return a.tape().record(std::move(out), {a}, [a, mask = std::move(mask)](Tape<T>& t, std::size_t self) {
    t.accumulate(a, t.upstream(self).cwiseProduct(mask));
  }, "dropout");
}

template <class T>
Matrix<T> softmax_rows(const Matrix<T>& z) {
  Matrix<T> out = z.colwise() - z.rowwise().maxCoeff();
  out = out.array().exp().matrix();
  out = out.array().colwise() / out.rowwise().sum().array();
  return out;
}

template <class T>
Var<T> row_softmax(const Var<T>& a) {
  Matrix<T> out = softmax_rows(a.value());
  Matrix<T> s = out;
  return a.tape().record(std::move(out), {a}, [a, s = std::move(s)](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.upstream(self);
    Eigen::Matrix<T, Eigen::Dynamic, 1> dot = g.cwiseProduct(s).rowwise().sum();
    t.accumulate(a, (s.array() * (g.colwise() - dot).array()).matrix());
  }, "row_softmax");
}

// ---------------------------------------------------------------------------
// Losses

enum class Reduction { sum, mean };

/// -Σ_i log softmax(logits)_{i, y_i}, optionally divided by the row count.
/// Row maxima are subtracted before exponentiating.
template <class T>
Var<T> softmax_cross_entropy(const Var<T>& logits, std::span<const Index> targets, Reduction reduction) {
  const Eigen::Index n = logits.rows();
  const Eigen::Index c = logits.cols();
  require(static_cast<Eigen::Index>(targets.size()) == n, "softmax_cross_entropy: ", targets.size(),
          " targets for ", n, " rows");
  std::vector<Index> y(targets.begin(), targets.end());
  for (Index v : y) require(v < static_cast<Index>(c), "softmax_cross_entropy: target ", v, " outside [0, ", c, ")");

  const Matrix<T>& z = logits.value();
  Matrix<T> probs(n, c);
  T total = T(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const T m = z.row(i).maxCoeff();
    T denom = T(0);
    for (Eigen::Index j = 0; j < c; ++j) {
      probs(i, j) = std::exp(z(i, j) - m);
      denom += probs(i, j);
    }
    probs.row(i) /= denom;
    total += std::log(denom) + m - z(i, static_cast<Eigen::Index>(y[i]));
  }
  const T norm = reduction == Reduction::mean && n > 0 ? T(1) / static_cast<T>(n) : T(1);
  Matrix<T> out(1, 1);
  out(0, 0) = total * norm;
  return logits.tape().record(std::move(out), {logits},
                              [logits, probs = std::move(probs), y = std::move(y), norm](Tape<T>& t, std::size_t self) {
                                Matrix<T> g = probs;
                                for (std::size_t i = 0; i < y.size(); ++i)
                                  g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(y[i])) -= T(1);
                                t.accumulate(logits, g * (t.upstream(self)(0, 0) * norm));
                              },
                              "softmax_cross_entropy");
}

/// Mean over all entries of (a - b)^2.
template <class T>
Var<T> mse(const Var<T>& a, const Var<T>& b) {
  detail::same_shape(a, b, "mse");
  Matrix<T> diff = a.value() - b.value();
  const T count = static_cast<T>(diff.size());
  Matrix<T> out(1, 1);
  out(0, 0) = diff.squaredNorm() / count;
  return a.tape().record(std::move(out), {a, b}, [a, b, diff = std::move(diff), count](Tape<T>& t, std::size_t self) {
    const T g = t.upstream(self)(0, 0) * T(2) / count;
    if (a.requires_grad()) t.accumulate(a, diff * g);
    if (b.requires_grad()) t.accumulate(b, diff * (-g));
  }, "mse");
}

// ---------------------------------------------------------------------------
// Pairwise ops used by the adjacency generator and the smoothness term

/// out has n*n rows; row i*n + j = p_i + q_j. With p = X W_top and
/// q = X W_bottom this equals [x_i ; x_j] W for the stacked W.
template <class T>
Var<T> pair_sum(const Var<T>& p, const Var<T>& q) {
  detail::same_shape(p, q, "pair_sum");
  const Eigen::Index n = p.rows();
  const Eigen::Index h = p.cols();
  Matrix<T> out(n * n, h);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out.row(i * n + j) = p.value().row(i) + q.value().row(j);
  return p.tape().record(std::move(out), {p, q}, [p, q, n, h](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.upstream(self);
    if (Matrix<T>* gp = t.grad_for_update(p))
      for (Eigen::Index i = 0; i < n; ++i) gp->row(i) += g.middleRows(i * n, n).colwise().sum();
    if (Matrix<T>* gq = t.grad_for_update(q)) {
      for (Eigen::Index i = 0; i < n; ++i) *gq += g.middleRows(i * n, n);
    }
    (void)h;
  }, "pair_sum");
}

/// Scores for ordered pairs (n*n x 1, row i*n + j) to the symmetric n x n
/// matrix ½(s_ij + s_ji).
template <class T>
Var<T> pair_average(const Var<T>& scores, Eigen::Index n) {
  require(scores.rows() == n * n && scores.cols() == 1, "pair_average: expected ", n * n, "x1 scores, got ",
          scores.rows(), "x", scores.cols());
  const Matrix<T>& s = scores.value();
  Matrix<T> out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = T(0.5) * (s(i * n + j, 0) + s(j * n + i, 0));
  return scores.tape().record(std::move(out), {scores}, [scores, n](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.upstream(self);
    Matrix<T>* gs = t.grad_for_update(scores);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) (*gs)(i * n + j, 0) += T(0.5) * (g(i, j) + g(j, i));
  }, "pair_average");
}

/// Keeps entries >= delta, zeroes the rest; the diagonal is zeroed when
/// `zero_diagonal`. Gradient flows only through kept entries.
template <class T>
Var<T> threshold(const Var<T>& a, T delta, bool zero_diagonal) {
  Matrix<T> keep = (a.value().array() >= delta).template cast<T>().matrix();
  if (zero_diagonal) {
    require(a.rows() == a.cols(), "threshold: zero_diagonal needs a square input");
    keep.diagonal().setZero();
  }
  Matrix<T> out = a.value().cwiseProduct(keep);
  return a.tape().record(std::move(out), {a}, [a, keep = std::move(keep)](Tape<T>& t, std::size_t self) {
    t.accumulate(a, t.upstream(self).cwiseProduct(keep));
  }, "threshold");
}

/// Dense D^{-1/2}(A + I)D^{-1/2} with row-sum degrees; the input diagonal
/// is ignored and replaced by 1.
template <class T>
Var<T> normalize_adjacency(const Var<T>& a) {
  require(a.rows() == a.cols(), "normalize_adjacency: adjacency must be square");
  const Eigen::Index n = a.rows();
  Matrix<T> m = a.value();
  m.diagonal().setOnes();
  Eigen::Matrix<T, Eigen::Dynamic, 1> deg = m.rowwise().sum();
  Eigen::Matrix<T, Eigen::Dynamic, 1> s = deg.array().rsqrt().matrix();
  Matrix<T> out = s.asDiagonal() * m * s.asDiagonal();
  return a.tape().record(std::move(out), {a}, [a, m = std::move(m), deg, s, n](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.upstream(self);
    // out_ij = s_i m_ij s_j with s_i = deg_i^{-1/2}, deg_i = Σ_j m_ij.
    Eigen::Matrix<T, Eigen::Dynamic, 1> ds(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      T acc = T(0);
      for (Eigen::Index j = 0; j < n; ++j) acc += g(i, j) * m(i, j) * s(j) + g(j, i) * m(j, i) * s(j);
      ds(i) = acc;
    }
    Matrix<T> gm = s.asDiagonal() * g * s.asDiagonal();
    for (Eigen::Index i = 0; i < n; ++i) {
      const T c = T(-0.5) * ds(i) * s(i) / deg(i);
      gm.row(i).array() += c;
    }
    gm.diagonal().setZero();
    t.accumulate(a, gm);
  }, "normalize_adjacency");
}

/// D_ij = ||x_i - x_j||^2 computed from explicit differences (exactly
/// symmetric, exactly zero on the diagonal).
template <class T>
Var<T> pairwise_sq_dist(const Var<T>& x) {
  const Eigen::Index n = x.rows();
  const Matrix<T>& v = x.value();
  Matrix<T> out = Matrix<T>::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const T d = (v.row(i) - v.row(j)).squaredNorm();
      out(i, j) = d;
      out(j, i) = d;
    }
  return x.tape().record(std::move(out), {x}, [x, n](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.upstream(self);
    const Matrix<T>& v = x.value();
    Matrix<T>* gx = t.grad_for_update(x);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const T w = T(2) * (g(i, j) + g(j, i));
        if (w != T(0)) gx->row(i) += w * (v.row(i) - v.row(j));
      }
  }, "pairwise_sq_dist");
}

}  // namespace simgc::ad
