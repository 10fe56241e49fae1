#pragma once

#include <filesystem>
#include <vector>

#include "simgc/condense/condensed_graph.hpp"
#include "simgc/io/dataset_io.hpp"

namespace simgc {

/// The condensed graph as an ordinary dataset: weighted edges from A', every
/// node in the training split.
template <class T>
Dataset<T> to_dataset(const CondensedGraph<T>& cond) {
  const Index n = cond.num_nodes();
  require(static_cast<Index>(cond.adjacency.rows()) == n && static_cast<Index>(cond.adjacency.cols()) == n,
          "condensed adjacency is ", cond.adjacency.rows(), "x", cond.adjacency.cols(), " for ", n, " nodes");
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const T w = cond.adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (w != T(0)) edges.push_back({i, j, static_cast<double>(w)});
    }
  Dataset<T> ds;
  ds.graph = SparseGraph<T>::from_edges(n, edges);
  ds.features = cond.features;
  ds.labels = cond.labels;
  ds.num_classes = cond.num_classes;
  ds.mode = Mode::transductive;
  ds.splits.train.resize(n);
  for (Index i = 0; i < n; ++i) ds.splits.train[i] = i;
  return ds;
}

namespace io {

inline constexpr std::string_view kGeneratorMagic = "SGCG";

// generator.bin layout (little-endian):
//   "SGCG" u32 version=1
//   u64 in_dim, u64 hidden, u64 layers, u32 activation (0 relu, 1 tanh), f32 delta
//   u64 tensor_count, then per tensor: u64 rows, u64 cols, rows*cols f32

template <class T>
std::vector<std::uint8_t> encode_generator(const AdjacencyGenerator<T>& gen, T delta) {
  ByteWriter w;
  w.magic(kGeneratorMagic);
  w.u32(kFormatVersion);
  w.u64(gen.in_dim);
  w.u64(gen.hidden);
  w.u64(gen.layers);
  w.u32(gen.activation == Activation::relu ? 0 : 1);
  w.f32(static_cast<float>(delta));
  w.u64(gen.params.size());
  for (const auto& p : gen.params) {
    w.u64(static_cast<Index>(p.rows()));
    w.u64(static_cast<Index>(p.cols()));
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j) w.f32(static_cast<float>(p(i, j)));
  }
  return w.take();
}

template <class T>
AdjacencyGenerator<T> decode_generator(const fs::path& path, T& delta) {
  ByteReader r(path.string(), read_file(path));
  r.expect_magic(kGeneratorMagic);
  r.expect_version(kFormatVersion);
  AdjacencyGenerator<T> gen;
  gen.in_dim = r.u64();
  gen.hidden = r.u64();
  gen.layers = r.u64();
  const std::uint32_t act = r.u32();
  if (act > 1) r.fail("unknown generator activation");
  gen.activation = act == 0 ? Activation::relu : Activation::tanh;
  delta = static_cast<T>(r.f32());
  const Index tensors = r.u64();
  if (gen.layers == 0 || tensors != 2 * (gen.layers + 1)) r.fail("generator tensor count disagrees with layer count");
  for (Index k = 0; k < tensors; ++k) {
    const Index rows = r.u64();
    const Index cols = r.u64();
    r.need_records(rows * cols, 4, "generator tensor");
    Matrix<T> p(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j)
        p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<T>(r.f32());
    gen.params.push_back(std::move(p));
  }
  r.expect_end();
  if (gen.params.front().rows() != static_cast<Eigen::Index>(2 * gen.in_dim) ||
      gen.params.front().cols() != static_cast<Eigen::Index>(gen.hidden))
    throw FormatError(path.string(), 0, "generator input layer shape disagrees with header");
  return gen;
}

/// Dataset files for (A', X', Y') plus generator.bin.
template <class T>
void save_condensed(const fs::path& dir, const CondensedGraph<T>& cond) {
  save_dataset(dir, to_dataset(cond));
  write_file(dir / "generator.bin", encode_generator(cond.generator, cond.delta));
}

/// Inverse of save_condensed. Values pass through float32, so saving the
/// result again reproduces the same bytes.
template <class T>
CondensedGraph<T> load_condensed(const fs::path& dir) {
  const Dataset<T> ds = load_dataset<T>(dir);
  CondensedGraph<T> cond;
  cond.features = ds.features;
  cond.labels = ds.labels;
  cond.num_classes = ds.num_classes;
  cond.adjacency = ds.graph.csr().to_dense();
  for (Index y : cond.labels)
    if (y == kUnlabeled) throw ValidationError((dir / "labels.bin").string() + ": condensed node without a label");
  const fs::path gen_path = dir / "generator.bin";
  if (fs::exists(gen_path)) {
    cond.generator = decode_generator<T>(gen_path, cond.delta);
    if (cond.generator.in_dim != ds.num_features())
      throw FormatError(gen_path.string(), 0, "generator input width disagrees with features.bin");
  }
  return cond;
}

}  // namespace io
}  // namespace simgc
