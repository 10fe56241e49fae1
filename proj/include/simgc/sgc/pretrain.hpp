#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "simgc/autodiff/optim.hpp"
#include "simgc/core/log.hpp"
#include "simgc/graph/class_stats.hpp"
#include "simgc/graph/dataset.hpp"
#include "simgc/sgc/model.hpp"

namespace simgc {

struct PretrainConfig {
  Index depth = 2;
  HeadKind head = HeadKind::linear;
  Index hidden = 256;
  Index epochs = 600;
  Index patience = 100;  // non-improving validation checks before stopping
  double lr = 0.01;
  double weight_decay = 5e-4;
  bool select_best = true;  // keep best-validation weights instead of the last epoch
  StdConvention std_convention = StdConvention::population;
  std::uint64_t seed = 0;
};

/// Everything the condensation loop reads from the original graph.
template <class T>
struct TeacherCache {
  SgcModel<T> model;
  ClassStats<T> stats;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
};

namespace detail {

template <class T>
Matrix<T> take_rows(const Matrix<T>& m, std::span<const Index> rows) {
  Matrix<T> out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

inline IndexList iota(std::size_t n) {
  IndexList out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

inline IndexList take(std::span<const Index> labels, std::span<const Index> rows) {
  IndexList out;
  out.reserve(rows.size());
  for (Index r : rows) out.push_back(labels[r]);
  return out;
}

}  // namespace detail

/// Propagates once, fits the head on e_K of the training nodes with Adam and
/// softmax cross-entropy, and caches the per-class statistics of Z over the
/// training-labeled nodes. Validation labels are read only to pick weights.
template <class T>
TeacherCache<T> pretrain(const Dataset<T>& dataset, const PretrainConfig& cfg) {
  require(cfg.depth >= 1, "pretrain: depth must be >= 1");
  require(!dataset.splits.train.empty(), "pretrain: empty training split");
  CondensationView<T> view(dataset);

  const auto stack = propagate(normalize(view.graph()), view.features(), cfg.depth);
  const Matrix<T> train_x = detail::take_rows(stack.last(), view.train());
  const IndexList train_y = detail::take(view.labels(), view.train());

  // Validation always runs on the full graph.
  Matrix<T> val_x;
  if (dataset.mode == Mode::transductive) {
    val_x = detail::take_rows(stack.last(), dataset.splits.val);
  } else {
    const auto full = propagate(normalize(dataset.graph), dataset.features, cfg.depth);
    val_x = detail::take_rows(full.last(), dataset.splits.val);
  }
  const IndexList val_y = detail::take(dataset.labels, dataset.splits.val);
  const IndexList train_rows = detail::iota(train_y.size());
  const IndexList val_rows = detail::iota(val_y.size());

  std::mt19937_64 rng(cfg.seed);
  TeacherCache<T> cache;
  cache.model = SgcModel<T>::init(dataset.num_features(), dataset.num_classes, cfg.depth, cfg.head, cfg.hidden, rng);
  SgcModel<T>& model = cache.model;

  ad::Optimizer<T> opt(ad::OptimizerKind::adam, {.lr = cfg.lr, .weight_decay = cfg.weight_decay});
  std::vector<Matrix<T>> best = model.params;
  double best_val = -1.0;
  Index since_best = 0;

  for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
    ad::Tape<T> tape;
    std::vector<ad::Var<T>> leaves;
    for (const auto& p : model.params) leaves.push_back(tape.variable(p));
    auto logits = head_forward<T>(model.head, leaves, tape.constant(train_x));
    auto loss = ad::softmax_cross_entropy(logits, train_y, ad::Reduction::mean);
    if (!std::isfinite(static_cast<double>(loss.scalar())))
      throw NumericError("pretrain: loss diverged at epoch " + std::to_string(epoch));
    tape.backward(loss);
    std::vector<Matrix<T>*> ps;
    std::vector<Matrix<T>> gs;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      ps.push_back(&model.params[i]);
      gs.push_back(leaves[i].grad());
    }
    std::vector<const Matrix<T>*> gp;
    for (const auto& g : gs) gp.push_back(&g);
    opt.step(ps, gp);

    const double val = val_y.empty() ? 0.0 : accuracy(predict(model, val_x), val_y, val_rows);
    if (val > best_val) {
      best_val = val;
      best = model.params;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      log::info("pretrain: early stop at epoch ", epoch, ", best val ", best_val);
      break;
    }
  }
  if (cfg.select_best) model.params = std::move(best);

  cache.train_accuracy = accuracy(predict(model, train_x), train_y, train_rows);
  cache.val_accuracy = val_y.empty() ? 0.0 : accuracy(predict(model, val_x), val_y, val_rows);
  cache.stats = class_statistics(stack, view.labels(), view.train(), dataset.num_classes, cfg.std_convention);
  for (Index c : cache.stats.excluded) log::info("pretrain: class ", c, " has no training nodes; excluded");
  log::info("pretrain: train acc ", cache.train_accuracy, ", val acc ", cache.val_accuracy);
  return cache;
}

}  // namespace simgc
