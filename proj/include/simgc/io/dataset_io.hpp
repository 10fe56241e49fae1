#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "simgc/graph/dataset.hpp"
#include "simgc/io/binary.hpp"

namespace simgc::io {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::string_view kFeaturesMagic = "SGCF";
inline constexpr std::string_view kEdgesMagic = "SGCE";
inline constexpr std::string_view kLabelsMagic = "SGCL";

struct DatasetMeta {
  Index num_nodes = 0;
  Index num_features = 0;
  Index num_classes = 0;
  Mode mode = Mode::transductive;
};

inline json parse_json_file(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string(), e.byte == 0 ? 0 : e.byte - 1, e.what());
  }
}

inline DatasetMeta read_meta(const fs::path& path) {
  const json j = parse_json_file(path);
  auto field = [&](const char* key) -> const json& {
    if (!j.is_object() || !j.contains(key)) throw FormatError(path.string(), 0, std::string("missing key \"") + key + "\"");
    return j.at(key);
  };
  auto count = [&](const char* key) -> Index {
    const json& v = field(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw FormatError(path.string(), 0, std::string("\"") + key + "\" must be a non-negative integer");
    return v.get<Index>();
  };
  DatasetMeta meta;
  meta.num_nodes = count("num_nodes");
  meta.num_features = count("num_features");
  meta.num_classes = count("num_classes");
  if (count("format_version") != kFormatVersion)
    throw FormatError(path.string(), 0, "unsupported format_version");
  const json& mode = field("mode");
  if (mode == "transductive") meta.mode = Mode::transductive;
  else if (mode == "inductive") meta.mode = Mode::inductive;
  else throw FormatError(path.string(), 0, "mode must be \"transductive\" or \"inductive\"");
  return meta;
}

template <class T>
Matrix<T> read_features(const fs::path& path, Index rows, Index cols) {
  ByteReader r(path.string(), read_file(path));
  r.expect_magic(kFeaturesMagic);
  r.expect_version(kFormatVersion);
  const auto at = r.offset();
  const Index file_rows = r.u64();
  const Index file_cols = r.u64();
  if (file_rows != rows || file_cols != cols)
    throw FormatError(path.string(), at,
                      "shape " + std::to_string(file_rows) + "x" + std::to_string(file_cols) +
                          " does not match meta " + std::to_string(rows) + "x" + std::to_string(cols));
  r.need_records(rows * cols, 4, "feature matrix");
  Matrix<T> x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      const float v = r.f32();
      if (!std::isfinite(v)) r.fail("non-finite feature value");
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<T>(v);
    }
  r.expect_end();
  return x;
}

inline std::vector<Edge> read_edges(const fs::path& path, Index num_nodes) {
  ByteReader r(path.string(), read_file(path));
  r.expect_magic(kEdgesMagic);
  r.expect_version(kFormatVersion);
  const Index count = r.u64();
  r.need_records(count, 20, "edge list");
  std::vector<Edge> edges;
  edges.reserve(count);
  for (Index i = 0; i < count; ++i) {
    const auto at = r.offset();
    Edge e;
    e.src = r.u64();
    e.dst = r.u64();
    const float w = r.f32();
    if (e.src >= num_nodes || e.dst >= num_nodes)
      throw ValidationError(path.string() + " @ byte " + std::to_string(at) + ": edge (" + std::to_string(e.src) +
                            ", " + std::to_string(e.dst) + ") out of range for " + std::to_string(num_nodes) +
                            " nodes");
    if (!std::isfinite(w) || w < 0.0f) r.fail("edge weight must be finite and non-negative");
    e.weight = static_cast<double>(w);
    edges.push_back(e);
  }
  r.expect_end();
  return edges;
}

inline IndexList read_labels(const fs::path& path, Index num_nodes, Index num_classes) {
  ByteReader r(path.string(), read_file(path));
  r.expect_magic(kLabelsMagic);
  r.expect_version(kFormatVersion);
  const auto at = r.offset();
  const Index count = r.u64();
  if (count != num_nodes)
    throw FormatError(path.string(), at, "label count " + std::to_string(count) + " != num_nodes " +
                                             std::to_string(num_nodes));
  r.need_records(count, 8, "label list");
  IndexList labels(count);
  for (Index i = 0; i < count; ++i) {
    const auto pos = r.offset();
    labels[i] = r.u64();
    if (labels[i] != kUnlabeled && labels[i] >= num_classes)
      throw ValidationError(path.string() + " @ byte " + std::to_string(pos) + ": label " +
                            std::to_string(labels[i]) + " outside [0, " + std::to_string(num_classes) + ")");
  }
  r.expect_end();
  return labels;
}

inline Splits read_splits(const fs::path& path) {
  const json j = parse_json_file(path);
  Splits s;
  auto list = [&](const char* key, IndexList& out) {
    if (!j.is_object() || !j.contains(key) || !j.at(key).is_array())
      throw FormatError(path.string(), 0, std::string("\"") + key + "\" must be an array");
    for (const auto& v : j.at(key)) {
      if (!v.is_number_unsigned()) throw FormatError(path.string(), 0, std::string("\"") + key + "\" holds a non-index value");
      out.push_back(v.get<Index>());
    }
  };
  list("train", s.train);
  list("val", s.val);
  list("test", s.test);
  return s;
}

/// Loads a dataset directory. The edge list is symmetrized and deduplicated.
template <class T>
Dataset<T> load_dataset(const fs::path& dir) {
  const DatasetMeta meta = read_meta(dir / "meta.json");
  Dataset<T> ds;
  ds.mode = meta.mode;
  ds.num_classes = meta.num_classes;
  ds.features = read_features<T>(dir / "features.bin", meta.num_nodes, meta.num_features);
  const auto edges = read_edges(dir / "edges.bin", meta.num_nodes);
  ds.graph = SparseGraph<T>::from_edges(meta.num_nodes, edges);
  ds.labels = read_labels(dir / "labels.bin", meta.num_nodes, meta.num_classes);
  ds.splits = read_splits(dir / "splits.json");
  try {
    ds.validate();
  } catch (const ValidationError& e) {
    throw ValidationError((dir / "splits.json").string() + ": " + e.what());
  }
  return ds;
}

inline std::vector<std::uint8_t> encode_meta(const DatasetMeta& meta) {
  json j = {{"num_nodes", meta.num_nodes},
            {"num_features", meta.num_features},
            {"num_classes", meta.num_classes},
            {"mode", to_string(meta.mode)},
            {"format_version", kFormatVersion}};
  const std::string s = j.dump(2) + "\n";
  return {s.begin(), s.end()};
}

template <class T>
std::vector<std::uint8_t> encode_features(const Matrix<T>& x) {
  ByteWriter w;
  w.magic(kFeaturesMagic);
  w.u32(kFormatVersion);
  w.u64(static_cast<Index>(x.rows()));
  w.u64(static_cast<Index>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) w.f32(static_cast<float>(x(i, j)));
  return w.take();
}

inline std::vector<std::uint8_t> encode_edges(std::span<const Edge> edges) {
  ByteWriter w;
  w.magic(kEdgesMagic);
  w.u32(kFormatVersion);
  w.u64(edges.size());
  for (const Edge& e : edges) {
    w.u64(e.src);
    w.u64(e.dst);
    w.f32(static_cast<float>(e.weight));
  }
  return w.take();
}

inline std::vector<std::uint8_t> encode_labels(std::span<const Index> labels) {
  ByteWriter w;
  w.magic(kLabelsMagic);
  w.u32(kFormatVersion);
  w.u64(labels.size());
  for (Index y : labels) w.u64(y);
  return w.take();
}

inline std::vector<std::uint8_t> encode_splits(const Splits& s) {
  json j = {{"train", s.train}, {"val", s.val}, {"test", s.test}};
  const std::string text = j.dump() + "\n";
  return {text.begin(), text.end()};
}

/// Writes the five dataset files. Both edge directions are written.
template <class T>
void save_dataset(const fs::path& dir, const Dataset<T>& ds) {
  fs::create_directories(dir);
  write_file(dir / "meta.json", encode_meta({ds.num_nodes(), ds.num_features(), ds.num_classes, ds.mode}));
  write_file(dir / "features.bin", encode_features(ds.features));
  write_file(dir / "edges.bin", encode_edges(ds.graph.edges()));
  write_file(dir / "labels.bin", encode_labels(ds.labels));
  write_file(dir / "splits.json", encode_splits(ds.splits));
}

}  // namespace simgc::io
