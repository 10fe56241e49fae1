#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <span>
#include <vector>

#include "simgc/autodiff/tape.hpp"

namespace simgc::ad {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  Eigen::Index worst_row = 0;
  Eigen::Index worst_col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t entries_checked = 0;
  bool passed = false;
};

/// Compares reverse-mode gradients against central differences with step
/// h = 1e-5 * max(1, |x|). The per-entry error is |a - n| / max(|a|, |n|, floor);
/// below `floor` the comparison becomes absolute.
///
/// `loss` is called as loss(tape, params) and must return a 1x1 node built
/// from the given leaves. It is evaluated twice up front; differing results
/// abort the check with NumericError.
template <class F>
GradCheckReport gradient_check(F&& loss, std::vector<Matrix<double>> params, double tol = 1e-4,
                               double floor = 1e-4) {
  auto evaluate = [&](const std::vector<Matrix<double>>& ps, std::vector<Matrix<double>>* grads) {
    Tape<double> tape;
    std::vector<Var<double>> leaves;
    leaves.reserve(ps.size());
    for (const auto& p : ps) leaves.push_back(tape.variable(p));
    Var<double> out = loss(tape, std::span<const Var<double>>(leaves));
    const double value = out.scalar();
    if (grads) {
      tape.backward(out);
      grads->clear();
      for (const auto& l : leaves) grads->push_back(l.grad());
    }
    return value;
  };

  std::vector<Matrix<double>> analytic;
  const double first = evaluate(params, &analytic);
  const double second = evaluate(params, nullptr);
  if (first != second && !(std::isnan(first) && std::isnan(second)))
    throw NumericError("gradient_check: loss is not deterministic (" + std::to_string(first) + " vs " +
                       std::to_string(second) + ")");
  if (!std::isfinite(first)) throw NumericError("gradient_check: loss is not finite");

  GradCheckReport report;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (Eigen::Index i = 0; i < params[p].rows(); ++i) {
      for (Eigen::Index j = 0; j < params[p].cols(); ++j) {
        const double x = params[p](i, j);
        const double h = 1e-5 * std::max(1.0, std::abs(x));
        params[p](i, j) = x + h;
        const double up = evaluate(params, nullptr);
        params[p](i, j) = x - h;
        const double down = evaluate(params, nullptr);
        params[p](i, j) = x;
        const double numeric = (up - down) / (2.0 * h);
        const double a = analytic[p](i, j);
        const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
        ++report.entries_checked;
        if (err > report.max_rel_error || !std::isfinite(err)) {
          report.max_rel_error = std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
          report.worst_param = p;
          report.worst_row = i;
          report.worst_col = j;
          report.analytic = a;
          report.numeric = numeric;
        }
      }
    }
  }
  report.passed = report.max_rel_error < tol;
  return report;
}

}  // namespace simgc::ad
