#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "simgc/graph/sparse_graph.hpp"

namespace simgc {

enum class Mode { transductive, inductive };

inline const char* to_string(Mode m) { return m == Mode::transductive ? "transductive" : "inductive"; }

struct Splits {
  IndexList train;
  IndexList val;
  IndexList test;
};

/// Original graph T = (A, X, Y) with its public splits (houses N, d, C).
template <class T>
struct Dataset {
  SparseGraph<T> graph;
  Matrix<T> features;
  IndexList labels;  // kUnlabeled for nodes without a class
  Splits splits;
  Mode mode = Mode::transductive;
  Index num_classes = 0;

  Index num_nodes() const noexcept { return graph.num_nodes(); }
  Index num_features() const noexcept { return static_cast<Index>(features.cols()); }

  /// Throws ValidationError on the first broken invariant.
  void validate() const {
    const Index n = num_nodes();
    require(static_cast<Index>(features.rows()) == n, "features have ", features.rows(), " rows, graph has ",
            n, " nodes");
    require(labels.size() == n, "labels have ", labels.size(), " entries, graph has ", n, " nodes");
    for (Index v = 0; v < n; ++v)
      require(labels[v] == kUnlabeled || labels[v] < num_classes, "node ", v, " has label ", labels[v],
              " outside [0, ", num_classes, ")");
    std::vector<std::uint8_t> seen(n, 0);
    auto check = [&](const IndexList& split, const char* name) {
      for (Index v : split) {
        require(v < n, name, " split index ", v, " out of range [0, ", n, ")");
        require(seen[v] == 0, name, " split index ", v, " also appears in another split");
        seen[v] = 1;
      }
    };
    check(splits.train, "train");
    check(splits.val, "val");
    check(splits.test, "test");
    for (Index v : splits.train)
      require(labels[v] != kUnlabeled, "training node ", v, " is unlabeled");
  }
};

/// The part of a dataset the condensation stage may look at. Transductive:
/// the whole graph with training labels. Inductive: the subgraph induced by
/// the training nodes.
template <class T>
class CondensationView {
 public:
  explicit CondensationView(const Dataset<T>& ds) : ds_(&ds) {
    if (ds.mode == Mode::inductive) {
      owned_ = std::make_shared<Owned>();
      owned_->graph = ds.graph.induced(ds.splits.train);
      owned_->features.resize(static_cast<Eigen::Index>(ds.splits.train.size()), ds.features.cols());
      owned_->labels.resize(ds.splits.train.size());
      owned_->train.resize(ds.splits.train.size());
      for (std::size_t i = 0; i < ds.splits.train.size(); ++i) {
        owned_->features.row(static_cast<Eigen::Index>(i)) =
            ds.features.row(static_cast<Eigen::Index>(ds.splits.train[i]));
        owned_->labels[i] = ds.labels[ds.splits.train[i]];
        owned_->train[i] = i;
      }
    }
  }

  const SparseGraph<T>& graph() const { return owned_ ? owned_->graph : ds_->graph; }
  const Matrix<T>& features() const { return owned_ ? owned_->features : ds_->features; }
  std::span<const Index> labels() const { return owned_ ? owned_->labels : ds_->labels; }
  std::span<const Index> train() const { return owned_ ? owned_->train : ds_->splits.train; }
  Index num_classes() const { return ds_->num_classes; }
  Index num_features() const { return ds_->num_features(); }
  /// Node count of the graph the reduction rate refers to (the original graph).
  Index original_nodes() const { return ds_->num_nodes(); }
  const Dataset<T>& dataset() const { return *ds_; }

 private:
  struct Owned {
    SparseGraph<T> graph;
    Matrix<T> features;
    IndexList labels;
    IndexList train;
  };
  const Dataset<T>* ds_;
  std::shared_ptr<Owned> owned_;
};

}  // namespace simgc
