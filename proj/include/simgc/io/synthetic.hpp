#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "simgc/graph/dataset.hpp"

namespace simgc::io {

/// Parameters of a planted-partition citation-style graph: homophilous edges
/// and sparse binary bag-of-words features with per-class topic words.
struct SyntheticSpec {
  Index nodes = 2708;
  Index classes = 7;
  Index features = 1433;
  double avg_degree = 3.9;
  double homophily = 0.64;      // probability an edge stays inside its class
  Index words_per_node = 18;
  double topic_share = 0.34;    // fraction of a node's words drawn from its class topic
  double label_noise = 0.0;     // fraction of nodes whose features follow a random class
  Index train_per_class = 20;
  Index val = 500;
  Index test = 1000;
  Mode mode = Mode::transductive;
  std::uint64_t seed = 0;
};

template <class T>
Dataset<T> make_synthetic(const SyntheticSpec& s) {
  require(s.classes >= 1 && s.nodes >= s.classes, "synthetic: need at least one node per class");
  require(s.features >= s.classes, "synthetic: need at least one feature per class");
  std::mt19937_64 rng(s.seed);
  Dataset<T> ds;
  ds.num_classes = s.classes;
  ds.mode = s.mode;

  ds.labels.resize(s.nodes);
  for (Index v = 0; v < s.nodes; ++v) ds.labels[v] = v % s.classes;
  std::shuffle(ds.labels.begin(), ds.labels.end(), rng);
  std::vector<IndexList> members(s.classes);
  for (Index v = 0; v < s.nodes; ++v) members[ds.labels[v]].push_back(v);

  const Index topic = s.features / s.classes;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<Index> any_word(0, s.features - 1);
  std::uniform_int_distribution<Index> topic_word(0, topic - 1);
  std::uniform_int_distribution<Index> any_class(0, s.classes - 1);
  ds.features = Matrix<T>::Zero(static_cast<Eigen::Index>(s.nodes), static_cast<Eigen::Index>(s.features));
  for (Index v = 0; v < s.nodes; ++v) {
    const Index c = unit(rng) < s.label_noise ? any_class(rng) : ds.labels[v];
    for (Index w = 0; w < s.words_per_node; ++w) {
      const Index word = unit(rng) < s.topic_share ? c * topic + topic_word(rng) : any_word(rng);
      ds.features(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(word)) = T(1);
    }
  }

  std::vector<Edge> edges;
  const auto target = static_cast<Index>(static_cast<double>(s.nodes) * s.avg_degree / 2.0);
  std::uniform_int_distribution<Index> any_node(0, s.nodes - 1);
  while (edges.size() < target) {
    const Index u = any_node(rng);
    const Index cu = ds.labels[u];
    Index cv = cu;
    if (s.classes > 1 && unit(rng) >= s.homophily) {
      cv = any_class(rng);
      while (cv == cu) cv = any_class(rng);
    }
    const auto& pool = members[cv];
    const Index v = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    if (u != v) edges.push_back({u, v, 1.0});
  }
  ds.graph = SparseGraph<T>::from_edges(s.nodes, edges);

  // Planetoid-style split: a fixed number of training nodes per class, then
  // validation and test drawn from the rest.
  IndexList order(s.nodes);
  for (Index v = 0; v < s.nodes; ++v) order[v] = v;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Index> taken(s.classes, 0);
  IndexList rest;
  for (Index v : order) {
    if (taken[ds.labels[v]] < s.train_per_class) {
      ds.splits.train.push_back(v);
      ++taken[ds.labels[v]];
    } else {
      rest.push_back(v);
    }
  }
  const Index nval = std::min<Index>(s.val, rest.size());
  const Index ntest = std::min<Index>(s.test, rest.size() - nval);
  ds.splits.val.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(nval));
  ds.splits.test.assign(rest.begin() + static_cast<std::ptrdiff_t>(nval),
                        rest.begin() + static_cast<std::ptrdiff_t>(nval + ntest));
  std::sort(ds.splits.train.begin(), ds.splits.train.end());
  std::sort(ds.splits.val.begin(), ds.splits.val.end());
  std::sort(ds.splits.test.begin(), ds.splits.test.end());
  ds.validate();
  return ds;
}

}  // namespace simgc::io
