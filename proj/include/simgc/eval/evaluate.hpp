#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "simgc/autodiff/optim.hpp"
#include "simgc/condense/condensed_io.hpp"
#include "simgc/core/log.hpp"
#include "simgc/eval/models.hpp"
#include "simgc/graph/dataset.hpp"
#include "simgc/sgc/model.hpp"

namespace simgc::eval {

struct EvalConfig {
  std::vector<Arch> archs{Arch::gcn, Arch::sgc, Arch::mlp};
  Index trials = 5;
  Index hidden = 256;
  double dropout = 0.5;
  double lr = 0.01;
  double weight_decay = 5e-4;
  Index epochs = 600;
  Index sgc_depth = 2;
  std::uint64_t seed = 0;  // trial t uses seed + t

  void validate() const {
    require(trials >= 1, "eval trials must be >= 1");
    require(!archs.empty(), "eval needs at least one architecture");
    require(hidden >= 1 && epochs >= 1 && sgc_depth >= 1, "eval hidden, epochs and sgc_depth must be >= 1");
    require(dropout >= 0.0 && dropout < 1.0, "eval dropout must be in [0, 1)");
  }
};

/// Training targets: an operand set plus labelled rows.
template <class T>
struct Supervision {
  const Operands<T>* operands;
  std::span<const Index> labels;  // indexed by node id of `operands`
  std::span<const Index> rows;
};

template <class T>
struct TrainedModel {
  Model<T> model;
  double val_accuracy = 0.0;
  Index best_epoch = 0;
};

/// Cross-entropy training with Adam. After every epoch the model is scored
/// on `val`; the best-scoring weights (first on ties) are returned.
template <class T>
TrainedModel<T> train_model(Arch arch, const Supervision<T>& train, const Supervision<T>& val, Index num_classes,
                            const EvalConfig& cfg, std::uint64_t seed) {
  require(!train.rows.empty(), "train_model: no training rows");
  std::mt19937_64 rng(seed);
  TrainedModel<T> out;
  Model<T> model = init_model<T>(arch, train.operands->num_features, cfg.hidden, num_classes, cfg.dropout, rng);
  out.model = model;
  out.val_accuracy = -1.0;

  const IndexList rows(train.rows.begin(), train.rows.end());
  IndexList targets;
  for (Index r : rows) targets.push_back(train.labels[r]);
  bool gather = rows.size() != train.operands->num_nodes;
  for (std::size_t i = 0; i < rows.size() && !gather; ++i) gather = rows[i] != i;

  ad::Optimizer<T> opt(ad::OptimizerKind::adam, {.lr = cfg.lr, .weight_decay = cfg.weight_decay});
  for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
    ad::Tape<T> tape;
    std::vector<ad::Var<T>> leaves;
    for (const auto& p : model.params) leaves.push_back(tape.variable(p));
    auto logits_all = forward<T>(model, leaves, *train.operands, &rng);
    auto picked = gather ? ad::gather_rows(logits_all, rows) : logits_all;
    auto loss = ad::softmax_cross_entropy(picked, targets, ad::Reduction::mean);
    if (!std::isfinite(static_cast<double>(loss.scalar())))
      throw NumericError("eval: " + std::string(to_string(arch)) + " training diverged at epoch " +
                         std::to_string(epoch));
    tape.backward(loss);
    std::vector<Matrix<T>> grads;
    std::vector<Matrix<T>*> ps;
    std::vector<const Matrix<T>*> gs;
    for (auto& l : leaves) grads.push_back(l.grad());
    for (std::size_t i = 0; i < grads.size(); ++i) {
      ps.push_back(&model.params[i]);
      gs.push_back(&grads[i]);
    }
    opt.step(ps, gs);

    const double acc = accuracy(logits(model, *val.operands), val.labels, val.rows);
    if (acc > out.val_accuracy) {
      out.val_accuracy = acc;
      out.model = model;
      out.best_epoch = epoch;
    }
  }
  return out;
}

/// Original graph operands shared by every trial.
template <class T>
struct EvalContext {
  const Dataset<T>* dataset;
  Operands<T> full;

  EvalContext(const Dataset<T>& ds, Index sgc_depth)
      : dataset(&ds), full(Operands<T>::build(ds.graph, ds.features, sgc_depth)) {}

  Supervision<T> val() const { return {&full, dataset->labels, dataset->splits.val}; }
};

/// Test accuracy of a trained model on the full original graph. The only
/// place the test split is read.
template <class T>
double evaluate(const Model<T>& model, const EvalContext<T>& ctx) {
  return accuracy(logits(model, ctx.full), ctx.dataset->labels, ctx.dataset->splits.test);
}

/// Trains on a condensed graph, selecting weights on the original validation
/// split.
template <class T>
TrainedModel<T> train_on_condensed(const Dataset<T>& condensed, Arch arch, const EvalContext<T>& ctx,
                                   const EvalConfig& cfg, std::uint64_t seed) {
  require(condensed.num_features() == ctx.dataset->num_features(), "condensed graph has ",
          condensed.num_features(), " features, original has ", ctx.dataset->num_features());
  const auto op = Operands<T>::build(condensed.graph, condensed.features, cfg.sgc_depth);
  return train_model<T>(arch, {&op, condensed.labels, condensed.splits.train}, ctx.val(),
                        ctx.dataset->num_classes, cfg, seed);
}

/// Trains directly on the original graph's training split.
template <class T>
TrainedModel<T> train_full(Arch arch, const EvalContext<T>& ctx, const EvalConfig& cfg, std::uint64_t seed) {
  return train_model<T>(arch, {&ctx.full, ctx.dataset->labels, ctx.dataset->splits.train}, ctx.val(),
                        ctx.dataset->num_classes, cfg, seed);
}

struct CondensedStats {
  Index nodes = 0;
  Index edges = 0;  // ordered off-diagonal nonzero pairs
  double sparsity = 0.0;
  Index storage_bytes = 0;
};

template <class T>
CondensedStats condensed_stats(const CondensedGraph<T>& cond) {
  CondensedStats s;
  s.nodes = cond.num_nodes();
  for (Eigen::Index i = 0; i < cond.adjacency.rows(); ++i)
    for (Eigen::Index j = 0; j < cond.adjacency.cols(); ++j)
      if (i != j && cond.adjacency(i, j) != T(0)) ++s.edges;
  if (s.nodes > 1) s.sparsity = static_cast<double>(s.edges) / static_cast<double>(s.nodes * (s.nodes - 1));
  const Dataset<T> ds = to_dataset(cond);
  s.storage_bytes = io::encode_meta({ds.num_nodes(), ds.num_features(), ds.num_classes, ds.mode}).size() +
                    io::encode_features(ds.features).size() + io::encode_edges(ds.graph.edges()).size() +
                    io::encode_labels(ds.labels).size() + io::encode_splits(ds.splits).size();
  return s;
}

struct ArchResult {
  Arch arch = Arch::gcn;
  std::vector<double> test;
  std::vector<double> val;
  std::vector<std::uint64_t> seeds;

  double mean() const {
    double s = 0;
    for (double v : test) s += v;
    return test.empty() ? 0.0 : s / static_cast<double>(test.size());
  }
  /// Population standard deviation; empty below two trials.
  std::optional<double> stddev() const {
    if (test.size() < 2) return std::nullopt;
    const double m = mean();
    double s = 0;
    for (double v : test) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(test.size()));
  }
};

struct EvalReport {
  EvalConfig config;
  std::vector<ArchResult> archs;
  std::optional<CondensedStats> stats;

  const ArchResult* find(Arch a) const {
    for (const auto& r : archs)
      if (r.arch == a) return &r;
    return nullptr;
  }
};

/// Every configured architecture x trials on the condensed graph.
template <class T>
EvalReport cross_architecture_report(const CondensedGraph<T>& cond, const Dataset<T>& dataset,
                                     const EvalConfig& cfg) {
  cfg.validate();
  EvalContext<T> ctx(dataset, cfg.sgc_depth);
  const Dataset<T> condensed = to_dataset(cond);
  EvalReport report;
  report.config = cfg;
  report.stats = condensed_stats(cond);
  for (Arch arch : cfg.archs) {
    ArchResult r;
    r.arch = arch;
    for (Index t = 0; t < cfg.trials; ++t) {
      const std::uint64_t seed = cfg.seed + t;
      const auto trained = train_on_condensed(condensed, arch, ctx, cfg, seed);
      r.seeds.push_back(seed);
      r.val.push_back(trained.val_accuracy);
      r.test.push_back(evaluate(trained.model, ctx));
      log::info("eval: ", to_string(arch), " trial ", t, " val ", r.val.back(), " test ", r.test.back());
    }
    report.archs.push_back(std::move(r));
  }
  return report;
}

inline nlohmann::json to_json(const CondensedStats& s) {
  return {{"nodes", s.nodes}, {"edges", s.edges}, {"sparsity", s.sparsity}, {"storage_bytes", s.storage_bytes}};
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json archs = nlohmann::json::object();
  for (const auto& a : r.archs) {
    const auto sd = a.stddev();
    archs[to_string(a.arch)] = {{"mean", a.mean()},
                                {"std", sd ? nlohmann::json(*sd) : nlohmann::json(nullptr)},
                                {"trials", a.test},
                                {"val", a.val},
                                {"seeds", a.seeds}};
  }
  nlohmann::json names = nlohmann::json::array();
  for (Arch a : r.config.archs) names.push_back(to_string(a));
  nlohmann::json j = {{"archs", archs},
                      {"eval_config",
                       {{"archs", names},
                        {"trials", r.config.trials},
                        {"hidden", r.config.hidden},
                        {"dropout", r.config.dropout},
                        {"lr", r.config.lr},
                        {"weight_decay", r.config.weight_decay},
                        {"epochs", r.config.epochs},
                        {"sgc_depth", r.config.sgc_depth},
                        {"seed", r.config.seed},
                        {"selection", "best validation accuracy, checked every epoch"},
                        {"std", "population"}}}};
  j["condensed_stats"] = r.stats ? to_json(*r.stats) : nlohmann::json(nullptr);
  return j;
}

}  // namespace simgc::eval
