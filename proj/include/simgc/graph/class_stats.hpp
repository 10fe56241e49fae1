#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "simgc/graph/propagation.hpp"

namespace simgc {

enum class StdConvention { population, sample };

template <class T>
struct ClassStat {
  Index label = 0;
  Index count = 0;
  T weight = 0;  // λ_c = count / largest count
  RowVector<T> mean;
  RowVector<T> std;
};

/// Per-class moments of Z over the masked nodes (houses μ_c, σ_c, λ_c).
template <class T>
struct ClassStats {
  Index dim = 0;
  std::vector<ClassStat<T>> classes;  // ascending label, only classes present in the mask
  std::vector<Index> excluded;        // classes in [0, num_classes) with no masked member

  const ClassStat<T>* find(Index label) const {
    for (const auto& c : classes)
      if (c.label == label) return &c;
    return nullptr;
  }
};

namespace detail {

/// Column-wise mean and std of `rows`, accumulated in double.
template <class T>
void moments(const Matrix<T>& rows, StdConvention conv, RowVector<T>& mean, RowVector<T>& std) {
  const auto n = rows.rows();
  const auto d = rows.cols();
  Eigen::Matrix<double, 1, Eigen::Dynamic> mu = Eigen::Matrix<double, 1, Eigen::Dynamic>::Zero(d);
  for (Eigen::Index r = 0; r < n; ++r) mu += rows.row(r).template cast<double>();
  mu /= static_cast<double>(n);
  Eigen::Matrix<double, 1, Eigen::Dynamic> var = Eigen::Matrix<double, 1, Eigen::Dynamic>::Zero(d);
  for (Eigen::Index r = 0; r < n; ++r) var += (rows.row(r).template cast<double>() - mu).array().square().matrix();
  const double denom = conv == StdConvention::population ? static_cast<double>(n) : static_cast<double>(n - 1);
  if (denom > 0) var /= denom;
  else var.setZero();
  mean = mu.cast<T>();
  std = var.array().sqrt().matrix().cast<T>();
}

}  // namespace detail

/// Statistics of Z = [e_0, ..., e_K] restricted to labeled nodes in `mask`.
template <class T>
ClassStats<T> class_statistics(const PropagationStack<T>& stack, std::span<const Index> labels,
                               std::span<const Index> mask, Index num_classes,
                               StdConvention conv = StdConvention::population) {
  std::vector<std::vector<Index>> members(num_classes);
  for (Index v : mask) {
    require(v < labels.size(), "class_statistics: node ", v, " out of range");
    const Index y = labels[v];
    require(y < num_classes, "class_statistics: masked node ", v, " has label ", y,
            " outside [0, ", num_classes, ")");
    members[y].push_back(v);
  }
  std::size_t largest = 0;
  for (const auto& m : members) largest = std::max(largest, m.size());

  ClassStats<T> out;
  out.dim = stack.width() * static_cast<Index>(stack.layers.size());
  for (Index c = 0; c < num_classes; ++c) {
    if (members[c].empty()) {
      out.excluded.push_back(c);
      continue;
    }
    ClassStat<T> s;
    s.label = c;
    s.count = members[c].size();
    s.weight = static_cast<T>(static_cast<double>(s.count) / static_cast<double>(largest));
    detail::moments(stack.concatenated_rows(members[c]), conv, s.mean, s.std);
    out.classes.push_back(std::move(s));
  }
  return out;
}

}  // namespace simgc
