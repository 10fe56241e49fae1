#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "simgc/graph/class_stats.hpp"
#include "simgc/sgc/model.hpp"

namespace simgc {

enum class SmoothnessSign {
  complement,      // Σ A'_ij (1 - k(x_i, x_j)): pulls connected nodes together
  paper_literal,   // Σ A'_ij k(x_i, x_j)
};

/// [X', Â'X', ..., Â'^K X'] on the tape.
template <class T>
std::vector<ad::Var<T>> propagate_dense(const ad::Var<T>& norm_adj, const ad::Var<T>& x, Index depth) {
  std::vector<ad::Var<T>> layers{x};
  for (Index k = 0; k < depth; ++k) layers.push_back(ad::matmul(norm_adj, layers.back()));
  return layers;
}

/// Σ_c λ_c (MSE(μ_c, μ'_c) + MSE(σ_c, σ'_c)) over the classes in `stats`.
template <class T>
ad::Var<T> loss_rep(const ClassStats<T>& stats, const ad::Var<T>& z, std::span<const Index> condensed_labels,
                    StdConvention conv = StdConvention::population) {
  require(static_cast<Index>(z.cols()) == stats.dim, "loss_rep: Z' has width ", z.cols(), ", statistics have ",
          stats.dim);
  ad::Tape<T>& tape = z.tape();
  ad::Var<T> total;
  for (const auto& cls : stats.classes) {
    std::vector<Index> rows;
    for (std::size_t i = 0; i < condensed_labels.size(); ++i)
      if (condensed_labels[i] == cls.label) rows.push_back(i);
    require(!rows.empty(), "loss_rep: class ", cls.label, " has no condensed node");
    auto zc = ad::gather_rows(z, rows);
    auto mu = ad::mean_rows(zc);
    auto sd = ad::std_rows(zc, conv == StdConvention::population);
    auto term = ad::add(ad::mse(tape.constant(cls.mean), mu), ad::mse(tape.constant(cls.std), sd));
    term = ad::scale(term, cls.weight);
    total = total.valid() ? ad::add(total, term) : term;
  }
  if (!total.valid()) total = tape.constant(Matrix<T>::Zero(1, 1));
  return total;
}

/// Σ_i -log softmax(head(Â'^K X'))_{i, Y'_i} with the frozen teacher head.
template <class T>
ad::Var<T> loss_logit(const SgcModel<T>& teacher, const ad::Var<T>& propagated, std::span<const Index> condensed_labels) {
  ad::Tape<T>& tape = propagated.tape();
  std::vector<ad::Var<T>> leaves;
  for (const auto& p : teacher.params) leaves.push_back(tape.constant(p));
  return ad::softmax_cross_entropy(head_forward<T>(teacher.head, leaves, propagated), condensed_labels,
                                   ad::Reduction::sum);
}

/// RBF-kernel smoothness of X' weighted by A'.
template <class T>
ad::Var<T> loss_smooth(const ad::Var<T>& adjacency, const ad::Var<T>& x, T bandwidth, SmoothnessSign sign) {
  require(bandwidth > T(0), "loss_smooth: bandwidth must be positive");
  auto sim = ad::exp(ad::scale(ad::pairwise_sq_dist(x), T(-1) / (T(2) * bandwidth * bandwidth)));
  if (sign == SmoothnessSign::complement) sim = ad::one_minus(sim);
  return ad::sum(ad::mul(adjacency, sim));
}

/// Median pairwise Euclidean distance between rows; 1 when undefined or zero.
template <class T>
T median_bandwidth(const Matrix<T>& x) {
  std::vector<double> d;
  const auto n = x.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      d.push_back(std::sqrt(static_cast<double>((x.row(i) - x.row(j)).squaredNorm())));
  if (d.empty()) return T(1);
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  double m = d[mid];
  if (d.size() % 2 == 0) {
    const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lower);
  }
  return m > 0.0 ? static_cast<T>(m) : T(1);
}

}  // namespace simgc
