#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace simgc {
namespace {

using testing::dense_normalized;
using testing::random_edges;
using testing::random_matrix;

TEST(SparseGraph, SymmetrizesAndSortsRows) {
  std::vector<Edge> edges{{2, 0, 1.0}, {0, 1, 0.5}};
  auto g = SparseGraph<double>::from_edges(3, edges);
  EXPECT_EQ(g.num_edges(), 4u);
  EXPECT_TRUE(g.is_symmetric());
  auto n0 = g.neighbors(0);
  ASSERT_EQ(n0.size(), 2u);
  EXPECT_EQ(n0[0], 1u);
  EXPECT_EQ(n0[1], 2u);
  EXPECT_DOUBLE_EQ(g.csr().at(1, 0), 0.5);
}

TEST(SparseGraph, DuplicatePairMergesToSingleEdge) {
  std::vector<Edge> edges{{3, 7, 1.0}, {3, 7, 1.0}};
  auto g = SparseGraph<float>::from_edges(8, edges);
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_FLOAT_EQ(g.csr().at(3, 7), 1.0f);
}

TEST(SparseGraph, DuplicatesKeepMaximumWeight) {
  std::vector<Edge> edges{{0, 1, 0.25}, {1, 0, 0.75}, {0, 1, 0.5}};
  auto g = SparseGraph<double>::from_edges(2, edges);
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_DOUBLE_EQ(g.csr().at(0, 1), 0.75);
  EXPECT_DOUBLE_EQ(g.csr().at(1, 0), 0.75);
}

TEST(SparseGraph, DropsSelfLoopsAndZeroWeights) {
  std::vector<Edge> edges{{1, 1, 3.0}, {0, 2, 0.0}, {0, 1, 1.0}};
  auto g = SparseGraph<double>::from_edges(3, edges);
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_DOUBLE_EQ(g.csr().at(1, 1), 0.0);
}

TEST(SparseGraph, RejectsBadEdges) {
  std::vector<Edge> out_of_range{{0, 3, 1.0}};
  EXPECT_THROW(SparseGraph<double>::from_edges(3, out_of_range), ValidationError);
  std::vector<Edge> negative{{0, 1, -1.0}};
  EXPECT_THROW(SparseGraph<double>::from_edges(3, negative), ValidationError);
}

TEST(SparseGraph, RowPtrInvariants) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 5 + trial * 4;
    auto g = SparseGraph<double>::from_edges(n, random_edges(n, 0.2, rng));
    const auto& a = g.csr();
    ASSERT_EQ(a.row_ptr.size(), n + 1);
    EXPECT_TRUE(std::is_sorted(a.row_ptr.begin(), a.row_ptr.end()));
    for (Index c : a.col_idx) EXPECT_LT(c, n);
    for (Index r = 0; r < n; ++r) {
      auto cols = a.row_cols(r);
      EXPECT_TRUE(std::adjacent_find(cols.begin(), cols.end(), std::greater_equal<>()) == cols.end());
    }
    EXPECT_TRUE(g.is_symmetric());
  }
}

TEST(SparseGraph, InducedSubgraphRemapsNodes) {
  std::vector<Edge> edges{{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 3, 2.0}};
  auto g = SparseGraph<double>::from_edges(4, edges);
  std::vector<Index> keep{3, 0};
  auto sub = g.induced(keep);
  EXPECT_EQ(sub.num_nodes(), 2u);
  EXPECT_EQ(sub.num_edges(), 2u);
  EXPECT_DOUBLE_EQ(sub.csr().at(0, 1), 2.0);
}

TEST(Normalize, TwoNodeGraphIsAllHalves) {
  std::vector<Edge> edges{{0, 1, 1.0}};
  auto norm = normalize(SparseGraph<double>::from_edges(2, edges));
  const Matrix<double> dense = norm.adj.to_dense();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(dense(i, j), 0.5);
}

TEST(Normalize, EdgelessGraphIsIdentity) {
  auto norm = normalize(SparseGraph<double>::from_edges(3, {}));
  EXPECT_EQ(norm.adj.nnz(), 3u);
  EXPECT_TRUE(norm.adj.to_dense().isApprox(Matrix<double>::Identity(3, 3)));
}

TEST(Normalize, IsolatedNodeKeepsUnitSelfLoop) {
  std::vector<Edge> edges{{0, 1, 1.0}};
  auto norm = normalize(SparseGraph<double>::from_edges(3, edges));
  EXPECT_DOUBLE_EQ(norm.adj.at(2, 2), 1.0);
}

TEST(Normalize, MatchesDenseOracleOnRandomGraphs) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 10;
    auto edges = random_edges(n, 0.3, rng);
    auto norm = normalize(SparseGraph<double>::from_edges(n, edges));
    const Matrix<double> expected = dense_normalized(n, edges);
    EXPECT_LE((norm.adj.to_dense() - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Normalize, StructureAndWeightInvariants) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 15;
    auto g = SparseGraph<double>::from_edges(n, random_edges(n, 0.25, rng));
    auto norm = normalize(g);
    EXPECT_EQ(norm.adj.nnz(), g.num_edges() + n);
    const Matrix<double> d = norm.adj.to_dense();
    EXPECT_EQ(d, d.transpose());
    for (Index r = 0; r < n; ++r) {
      EXPECT_GT(norm.adj.at(r, r), 0.0);
      for (double w : norm.adj.row_values(r)) {
        EXPECT_GT(w, 0.0);
        EXPECT_LE(w, 1.0);
      }
    }
  }
}

TEST(Propagate, EdgelessGraphLeavesFeaturesUnchanged) {
  std::mt19937_64 rng(1);
  const Matrix<double> x = random_matrix<double>(4, 3, rng);
  auto stack = propagate(normalize(SparseGraph<double>::from_edges(4, {})), x, 3);
  ASSERT_EQ(stack.layers.size(), 4u);
  for (const auto& layer : stack.layers) EXPECT_EQ(layer, x);
}

TEST(Propagate, TwoNodeExample) {
  std::vector<Edge> edges{{0, 1, 1.0}};
  const Matrix<double> x = Matrix<double>::Identity(2, 2);
  auto stack = propagate(normalize(SparseGraph<double>::from_edges(2, edges)), x, 1);
  EXPECT_TRUE(stack.layers[1].isApprox(Matrix<double>::Constant(2, 2, 0.5)));
}

TEST(Propagate, MatchesDenseOracle) {
  std::mt19937_64 rng(21);
  const Index n = 20;
  auto edges = random_edges(n, 0.2, rng);
  const Matrix<double> x = random_matrix<double>(20, 6, rng);
  auto stack = propagate(normalize(SparseGraph<double>::from_edges(n, edges)), x, 2);
  const Matrix<double> a = dense_normalized(n, edges);
  EXPECT_EQ(stack.layers[0], x);
  EXPECT_LE((stack.layers[2] - a * (a * x)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Propagate, PrefixConsistentAcrossDepths) {
  std::mt19937_64 rng(22);
  auto norm = normalize(SparseGraph<double>::from_edges(12, random_edges(12, 0.3, rng)));
  const Matrix<double> x = random_matrix<double>(12, 4, rng);
  auto deep = propagate(norm, x, 3);
  auto shallow = propagate(norm, x, 2);
  for (std::size_t k = 0; k < shallow.layers.size(); ++k) EXPECT_EQ(deep.layers[k], shallow.layers[k]);
  for (const auto& l : deep.layers) {
    EXPECT_EQ(l.rows(), 12);
    EXPECT_EQ(l.cols(), 4);
  }
}

TEST(Propagate, RejectsBadArguments) {
  auto norm = normalize(SparseGraph<double>::from_edges(3, {}));
  EXPECT_THROW(propagate(norm, Matrix<double>(Matrix<double>::Zero(4, 2)), 1), ValidationError);
  EXPECT_THROW(propagate(norm, Matrix<double>(Matrix<double>::Zero(3, 2)), 0), ValidationError);
}

TEST(Propagate, ParallelMatchesSequential) {
  std::mt19937_64 rng(23);
  const Index n = 3000;
  auto norm = normalize(SparseGraph<double>::from_edges(n, random_edges(n, 0.002, rng)));
  const Matrix<double> x = random_matrix<double>(n, 8, rng);
  Runtime::set_deterministic(true);
  auto seq = propagate(norm, x, 2);
  Runtime::set_deterministic(false);
  Runtime::set_num_threads(4);
  auto par = propagate(norm, x, 2);
  Runtime::set_num_threads(0);
  EXPECT_EQ(seq.layers[2], par.layers[2]);
}

PropagationStack<double> stack_of(const Matrix<double>& x) {
  return propagate(normalize(SparseGraph<double>::from_edges(static_cast<Index>(x.rows()), {})), x, 1);
}

TEST(ClassStatistics, SingletonClassHasZeroStd) {
  Matrix<double> x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  std::vector<Index> labels{0, 1, 1};
  std::vector<Index> mask{0, 1, 2};
  auto stats = class_statistics(stack_of(x), labels, mask, 2);
  const auto* c0 = stats.find(0);
  ASSERT_NE(c0, nullptr);
  EXPECT_TRUE(c0->std.isZero());
  EXPECT_EQ(c0->mean.size(), 4);
  EXPECT_DOUBLE_EQ(c0->mean(0), 1.0);
  EXPECT_DOUBLE_EQ(c0->mean(3), 2.0);
  // population std of {3, 5} is 1
  EXPECT_DOUBLE_EQ(stats.find(1)->std(0), 1.0);
}

TEST(ClassStatistics, IdenticalRowsGiveZeroStd) {
  Matrix<double> x(2, 3);
  x << 1, 2, 3, 1, 2, 3;
  std::vector<Index> labels{0, 0};
  std::vector<Index> mask{0, 1};
  auto stats = class_statistics(stack_of(x), labels, mask, 1);
  EXPECT_TRUE(stats.classes[0].std.isZero());
  EXPECT_DOUBLE_EQ(stats.classes[0].mean(2), 3.0);
}

TEST(ClassStatistics, WeightIsRatioToLargestClass) {
  const Index n = 25;
  std::vector<Index> labels(n, 0);
  for (Index v = 20; v < n; ++v) labels[v] = 1;
  std::vector<Index> mask(n);
  std::iota(mask.begin(), mask.end(), Index{0});
  auto stats = class_statistics(stack_of(Matrix<double>::Ones(n, 2)), labels, mask, 2);
  EXPECT_DOUBLE_EQ(stats.find(0)->weight, 1.0);
  EXPECT_DOUBLE_EQ(stats.find(1)->weight, 0.25);
}

TEST(ClassStatistics, ClassOutsideMaskIsExcluded) {
  std::vector<Index> labels{0, 1, 2};
  std::vector<Index> mask{0, 1};
  auto stats = class_statistics(stack_of(Matrix<double>::Ones(3, 2)), labels, mask, 3);
  ASSERT_EQ(stats.excluded.size(), 1u);
  EXPECT_EQ(stats.excluded[0], 2u);
  EXPECT_EQ(stats.find(2), nullptr);
}

TEST(ClassStatistics, SampleConventionDividesByNMinusOne) {
  Matrix<double> x(2, 1);
  x << 0, 2;
  std::vector<Index> labels{0, 0};
  std::vector<Index> mask{0, 1};
  auto pop = class_statistics(stack_of(x), labels, mask, 1, StdConvention::population);
  auto smp = class_statistics(stack_of(x), labels, mask, 1, StdConvention::sample);
  EXPECT_DOUBLE_EQ(pop.classes[0].std(0), 1.0);
  EXPECT_DOUBLE_EQ(smp.classes[0].std(0), std::sqrt(2.0));
}

TEST(ClassStatistics, PermutationInvariant) {
  std::mt19937_64 rng(31);
  const Index n = 30;
  auto edges = random_edges(n, 0.2, rng);
  const Matrix<double> x = random_matrix<double>(n, 4, rng);
  std::vector<Index> labels(n);
  for (Index v = 0; v < n; ++v) labels[v] = v % 3;
  std::vector<Index> mask;
  for (Index v = 0; v < n; v += 2) mask.push_back(v);
  auto base = class_statistics(propagate(normalize(SparseGraph<double>::from_edges(n, edges)), x, 2), labels, mask, 3);

  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);  // old node v becomes perm[v]
  std::vector<Edge> pe;
  for (const auto& e : edges) pe.push_back({perm[e.src], perm[e.dst], e.weight});
  Matrix<double> px(n, 4);
  std::vector<Index> pl(n), pm;
  for (Index v = 0; v < n; ++v) {
    px.row(static_cast<Eigen::Index>(perm[v])) = x.row(static_cast<Eigen::Index>(v));
    pl[perm[v]] = labels[v];
  }
  for (Index v : mask) pm.push_back(perm[v]);
  auto moved = class_statistics(propagate(normalize(SparseGraph<double>::from_edges(n, pe)), px, 2), pl, pm, 3);
  ASSERT_EQ(base.classes.size(), moved.classes.size());
  for (std::size_t c = 0; c < base.classes.size(); ++c) {
    EXPECT_DOUBLE_EQ(base.classes[c].weight, moved.classes[c].weight);
    EXPECT_LE((base.classes[c].mean - moved.classes[c].mean).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((base.classes[c].std - moved.classes[c].std).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(CondensationView, InductiveUsesTrainingSubgraph) {
  auto ds = testing::toy_dataset<double>(3, 8, 4, 5, Mode::inductive);
  CondensationView<double> view(ds);
  EXPECT_EQ(view.graph().num_nodes(), ds.splits.train.size());
  EXPECT_EQ(view.train().size(), ds.splits.train.size());
  for (std::size_t i = 0; i < view.train().size(); ++i) {
    EXPECT_EQ(view.train()[i], i);
    EXPECT_EQ(view.labels()[i], ds.labels[ds.splits.train[i]]);
  }
  EXPECT_EQ(view.original_nodes(), ds.num_nodes());
}

TEST(CondensationView, TransductiveSeesWholeGraph) {
  auto ds = testing::toy_dataset<double>(3, 8, 4, 5);
  CondensationView<double> view(ds);
  EXPECT_EQ(&view.graph(), &ds.graph);
  EXPECT_EQ(view.train().size(), ds.splits.train.size());
}

}  // namespace
}  // namespace simgc
