#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <type_traits>
#include <vector>

#include "simgc/autodiff/optim.hpp"
#include "simgc/condense/condensed_graph.hpp"
#include "simgc/condense/losses.hpp"
#include "simgc/graph/dataset.hpp"
#include "simgc/sgc/pretrain.hpp"

namespace simgc {

struct CondenseConfig {
  double alpha = 1.0;  // representation alignment weight
  double beta = 1.0;   // logit alignment weight
  double gamma = 1.0;  // smoothness weight
  double lr_features = 0.005;
  double lr_generator = 0.001;
  Index tau_features = 10;   // consecutive X' updates per cycle
  Index tau_generator = 5;   // consecutive φ updates per cycle
  Index steps = 1000;
  Index depth = 2;
  double delta = 0.01;
  double rbf_bandwidth = 0.0;  // <= 0 selects the median heuristic at initialization
  SmoothnessSign smoothness = SmoothnessSign::complement;
  double reduction_rate = 0.026;
  ReductionBasis reduction_basis = ReductionBasis::nodes;
  Index generator_hidden = 128;
  Index generator_layers = 2;
  Activation generator_activation = Activation::relu;
  ad::OptimizerKind optimizer = ad::OptimizerKind::adam;
  StdConvention std_convention = StdConvention::population;
  std::uint64_t seed = 0;

  void validate() const {
    require(tau_features >= 1 && tau_generator >= 1, "tau_features and tau_generator must be >= 1");
    require(delta >= 0.0 && delta < 1.0, "delta must be in [0, 1), got ", delta);
    require(depth >= 1, "depth must be >= 1");
    require(reduction_rate > 0.0 && reduction_rate <= 1.0, "reduction_rate must be in (0, 1]");
    require(generator_hidden >= 1 && generator_layers >= 1, "generator needs a positive width and depth");
  }
};

struct TraceRow {
  Index step = 0;
  double total = 0;
  double rep = 0;  // weighted contributions; total = rep + lgt + smt
  double lgt = 0;
  double smt = 0;
};

/// Per-step view handed to an observer before the parameter update.
template <class T>
struct StepInfo {
  Index step;
  bool updates_features;
  const Matrix<T>& adjacency;
  const Matrix<T>& features;
  const std::vector<Matrix<T>>& generator_params;
  const IndexList& labels;
  const TraceRow& losses;
};

template <class T>
struct CondenseResult {
  CondensedGraph<T> graph;
  std::vector<TraceRow> trace;
  double rbf_bandwidth = 0;
  double seconds = 0;
};

/// Thrown when the loss or a gradient stops being finite. Carries the
/// parameters from before the failing step.
template <class T>
class CondenseAborted : public NumericError {
 public:
  CondenseAborted(const std::string& what, CondensedGraph<T> last_good, std::vector<TraceRow> trace)
      : NumericError(what), last_good_(std::move(last_good)), trace_(std::move(trace)) {}
  const CondensedGraph<T>& last_good() const noexcept { return last_good_; }
  const std::vector<TraceRow>& trace() const noexcept { return trace_; }

 private:
  CondensedGraph<T> last_good_;
  std::vector<TraceRow> trace_;
};

/// Initial condensed graph: sampled labels, copied features, fresh generator.
template <class T>
CondensedGraph<T> initialize_condensed(const CondensationView<T>& view, const CondenseConfig& cfg) {
  CondensedGraph<T> g;
  g.num_classes = view.num_classes();
  g.delta = static_cast<T>(cfg.delta);
  g.labels = sample_labels(view.labels(), view.train(), view.num_classes(), cfg.reduction_rate, cfg.reduction_basis,
                           view.original_nodes());
  g.features = init_features(view.features(), view.labels(), view.train(), g.labels, cfg.seed);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  g.generator = AdjacencyGenerator<T>::init(view.num_features(), cfg.generator_hidden, cfg.generator_layers,
                                            cfg.generator_activation, rng);
  g.adjacency = generate_adjacency(g.generator, g.features, g.delta);
  return g;
}

/// Total condensation loss on a tape, with the individual weighted terms.
/// Terms whose weight is zero are not built at all.
template <class T>
struct LossTerms {
  ad::Var<T> total;
  ad::Var<T> adjacency;
  double rep = 0, lgt = 0, smt = 0;
};

template <class T>
LossTerms<T> condensation_loss(ad::Tape<T>& tape, const ad::Var<T>& x, std::span<const ad::Var<T>> gen_leaves,
                               const AdjacencyGenerator<T>& gen, const TeacherCache<T>& teacher,
                               std::span<const Index> labels, const CondenseConfig& cfg, T bandwidth) {
  LossTerms<T> out;
  out.adjacency = gen.adjacency(gen_leaves, x, static_cast<T>(cfg.delta));
  std::vector<ad::Var<T>> parts;
  if (cfg.alpha != 0.0 || cfg.beta != 0.0) {
    auto norm = ad::normalize_adjacency(out.adjacency);
    auto layers = propagate_dense(norm, x, cfg.depth);
    if (cfg.alpha != 0.0) {
      auto term = ad::scale(loss_rep(teacher.stats, ad::concat_cols(layers), labels, cfg.std_convention),
                            static_cast<T>(cfg.alpha));
      out.rep = static_cast<double>(term.scalar());
      parts.push_back(term);
    }
    if (cfg.beta != 0.0) {
      auto term = ad::scale(loss_logit(teacher.model, layers.back(), labels), static_cast<T>(cfg.beta));
      out.lgt = static_cast<double>(term.scalar());
      parts.push_back(term);
    }
  }
  if (cfg.gamma != 0.0) {
    auto term = ad::scale(loss_smooth(out.adjacency, x, bandwidth, cfg.smoothness), static_cast<T>(cfg.gamma));
    out.smt = static_cast<double>(term.scalar());
    parts.push_back(term);
  }
  if (parts.empty()) {
    out.total = tape.constant(Matrix<T>::Zero(1, 1));
  } else {
    out.total = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) out.total = ad::add(out.total, parts[i]);
  }
  return out;
}

/// Alternating optimization of X' and φ against the frozen teacher: step t
/// updates X' when t mod (τ1 + τ2) < τ1, φ otherwise. A' is materialized
/// once more after the last step.
template <class T>
CondenseResult<T> run_condensation(const Dataset<T>& dataset, const TeacherCache<T>& teacher, const CondenseConfig& cfg,
                                   const std::function<void(const StepInfo<std::type_identity_t<T>>&)>& observer = {}) {
  cfg.validate();
  require(teacher.model.depth == cfg.depth, "run_condensation: teacher depth ", teacher.model.depth,
          " != configured depth ", cfg.depth);
  const auto started = std::chrono::steady_clock::now();
  CondensationView<T> view(dataset);

  CondenseResult<T> result;
  CondensedGraph<T>& g = result.graph;
  g = initialize_condensed(view, cfg);
  const T bandwidth = cfg.rbf_bandwidth > 0.0 ? static_cast<T>(cfg.rbf_bandwidth) : median_bandwidth(g.features);
  result.rbf_bandwidth = static_cast<double>(bandwidth);
  log::info("condense: ", g.num_nodes(), " condensed nodes, rbf bandwidth ", result.rbf_bandwidth);

  ad::Optimizer<T> feat_opt(cfg.optimizer, {.lr = cfg.lr_features});
  ad::Optimizer<T> gen_opt(cfg.optimizer, {.lr = cfg.lr_generator});
  const Index cycle = cfg.tau_features + cfg.tau_generator;

  for (Index step = 0; step < cfg.steps; ++step) {
    const bool update_features = step % cycle < cfg.tau_features;
    ad::Tape<T> tape;
    auto x = update_features ? tape.variable(g.features) : tape.constant(g.features);
    std::vector<ad::Var<T>> gen_leaves;
    for (const auto& p : g.generator.params)
      gen_leaves.push_back(update_features ? tape.constant(p) : tape.variable(p));

    auto terms = condensation_loss<T>(tape, x, gen_leaves, g.generator, teacher, g.labels, cfg, bandwidth);
    TraceRow row{step, static_cast<double>(terms.total.scalar()), terms.rep, terms.lgt, terms.smt};
    if (!std::isfinite(row.total)) {
      g.adjacency = generate_adjacency(g.generator, g.features, g.delta);
      throw CondenseAborted<T>("condense: loss is not finite at step " + std::to_string(step), g, result.trace);
    }
    result.trace.push_back(row);
    if (observer)
      observer(StepInfo<T>{step, update_features, terms.adjacency.value(), g.features, g.generator.params, g.labels,
                           result.trace.back()});

    tape.backward(terms.total);
    if (update_features) {
      const Matrix<T> grad = x.grad();
      if (!grad.allFinite())
        throw CondenseAborted<T>("condense: non-finite feature gradient at step " + std::to_string(step), g,
                                 result.trace);
      Matrix<T>* p[] = {&g.features};
      const Matrix<T>* gp[] = {&grad};
      feat_opt.step(p, gp);
    } else {
      std::vector<Matrix<T>> grads;
      std::vector<Matrix<T>*> ps;
      std::vector<const Matrix<T>*> gp;
      for (std::size_t i = 0; i < gen_leaves.size(); ++i) {
        grads.push_back(gen_leaves[i].grad());
        if (!grads.back().allFinite())
          throw CondenseAborted<T>("condense: non-finite generator gradient at step " + std::to_string(step), g,
                                   result.trace);
      }
      for (std::size_t i = 0; i < grads.size(); ++i) {
        ps.push_back(&g.generator.params[i]);
        gp.push_back(&grads[i]);
      }
      gen_opt.step(ps, gp);
    }
    if (step % 100 == 0 || step + 1 == cfg.steps)
      log::info("condense: step ", step, " loss ", row.total, " (rep ", row.rep, ", lgt ", row.lgt, ", smt ", row.smt,
                ")");
  }

  g.adjacency = generate_adjacency(g.generator, g.features, g.delta);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace simgc
