#include <cstring>
#include <fstream>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace simgc {
namespace {

using testing::read_bytes;
using testing::TempDir;
namespace fs = std::filesystem;

const fs::path kGolden = fs::path(SIMGC_TEST_DATA_DIR) / "golden5";

Dataset<float> golden_dataset() {
  Dataset<float> ds;
  ds.num_classes = 2;
  ds.features.resize(5, 2);
  ds.features << 0.0f, 1.0f, 1.0f, 0.0f, 0.5f, 0.5f, 1.0f, 1.0f, 0.0f, 0.0f;
  std::vector<Edge> edges{{0, 1, 1.0}, {1, 2, 1.0}, {3, 4, 0.5}};
  ds.graph = SparseGraph<float>::from_edges(5, edges);
  ds.labels = {0, 1, 0, 1, kUnlabeled};
  ds.splits = {{0, 1}, {2}, {3}};
  return ds;
}

void write_raw(const fs::path& p, const std::vector<std::uint8_t>& bytes) { io::write_file(p, bytes); }

std::vector<std::uint8_t> raw(const fs::path& p) { return io::read_file(p); }

TEST(DatasetIo, GoldenFilesAreByteIdentical) {
  TempDir dir("golden");
  io::save_dataset(dir.path(), golden_dataset());
  for (const char* f : {"meta.json", "features.bin", "edges.bin", "labels.bin", "splits.json"})
    EXPECT_EQ(read_bytes(dir / f), read_bytes(kGolden / f)) << f;
}

TEST(DatasetIo, LoadsGoldenDataset) {
  auto ds = io::load_dataset<double>(kGolden);
  EXPECT_EQ(ds.num_nodes(), 5u);
  EXPECT_EQ(ds.num_features(), 2u);
  EXPECT_EQ(ds.num_classes, 2u);
  EXPECT_EQ(ds.graph.num_edges(), 6u);
  EXPECT_DOUBLE_EQ(ds.graph.csr().at(4, 3), 0.5);
  EXPECT_EQ(ds.labels[4], kUnlabeled);
  EXPECT_EQ(ds.splits.train, (IndexList{0, 1}));
  EXPECT_DOUBLE_EQ(ds.features(2, 1), 0.5);
}

TEST(DatasetIo, RoundTripIsBitExact) {
  auto ds = testing::toy_dataset<float>(3, 10, 5, 9, Mode::inductive);
  TempDir a("rt_a"), b("rt_b");
  io::save_dataset(a.path(), ds);
  auto loaded = io::load_dataset<float>(a.path());
  EXPECT_EQ(loaded.features, ds.features);
  EXPECT_EQ(loaded.labels, ds.labels);
  EXPECT_EQ(loaded.mode, Mode::inductive);
  io::save_dataset(b.path(), loaded);
  for (const char* f : {"meta.json", "features.bin", "edges.bin", "labels.bin", "splits.json"})
    EXPECT_EQ(read_bytes(a / f), read_bytes(b / f)) << f;
}

TEST(DatasetIo, EdgelessGraphLoads) {
  auto ds = golden_dataset();
  ds.graph = SparseGraph<float>::from_edges(5, {});
  TempDir dir("edgeless");
  io::save_dataset(dir.path(), ds);
  auto loaded = io::load_dataset<float>(dir.path());
  EXPECT_EQ(loaded.graph.num_edges(), 0u);
  EXPECT_EQ(normalize(loaded.graph).adj.nnz(), 5u);
}

TEST(DatasetIo, DuplicateEdgesAreMerged) {
  TempDir dir("dup");
  fs::copy(kGolden, dir.path(), fs::copy_options::recursive);
  std::vector<Edge> edges{{3, 4, 1.0}, {3, 4, 1.0}};
  write_raw(dir / "edges.bin", io::encode_edges(edges));
  auto ds = io::load_dataset<float>(dir.path());
  EXPECT_EQ(ds.graph.num_edges(), 2u);
  EXPECT_FLOAT_EQ(ds.graph.csr().at(3, 4), 1.0f);
}

TEST(DatasetIo, MissingFileIsFormatError) {
  TempDir dir("missing");
  fs::copy(kGolden, dir.path(), fs::copy_options::recursive);
  fs::remove(dir / "labels.bin");
  try {
    io::load_dataset<float>(dir.path());
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(e.file().find("labels.bin"), std::string::npos);
  }
}

TEST(DatasetIo, BadMagicReportsFileAndOffset) {
  TempDir dir("magic");
  fs::copy(kGolden, dir.path(), fs::copy_options::recursive);
  auto bytes = raw(dir / "features.bin");
  bytes[0] = 'X';
  write_raw(dir / "features.bin", bytes);
  try {
    io::load_dataset<float>(dir.path());
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(e.file().find("features.bin"), std::string::npos);
    EXPECT_EQ(e.offset(), 0u);
  }
}

TEST(DatasetIo, WrongVersionReportsOffsetFour) {
  TempDir dir("version");
  fs::copy(kGolden, dir.path(), fs::copy_options::recursive);
  auto bytes = raw(dir / "edges.bin");
  bytes[4] = 2;
  write_raw(dir / "edges.bin", bytes);
  try {
    io::load_dataset<float>(dir.path());
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
}

TEST(DatasetIo, TruncatedFileIsFormatError) {
  TempDir dir("trunc");
  fs::copy(kGolden, dir.path(), fs::copy_options::recursive);
  auto bytes = raw(dir / "edges.bin");
  bytes.resize(bytes.size() - 3);
  write_raw(dir / "edges.bin", bytes);
  try {
    io::load_dataset<float>(dir.path());
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(e.file().find("edges.bin"), std::string::npos);
    EXPECT_EQ(e.offset(), 16u);  // right after the header
  }
}

TEST(DatasetIo, TrailingBytesAreFormatError) {
  TempDir dir("trail");
  fs::copy(kGolden, dir.path(), fs::copy_options::recursive);
  auto bytes = raw(dir / "labels.bin");
  bytes.push_back(0);
  write_raw(dir / "labels.bin", bytes);
  EXPECT_THROW(io::load_dataset<float>(dir.path()), FormatError);
}

TEST(DatasetIo, FeatureShapeMismatchIsFormatError) {
  TempDir dir("shape");
  fs::copy(kGolden, dir.path(), fs::copy_options::recursive);
  write_raw(dir / "features.bin", io::encode_features(Matrix<float>(Matrix<float>::Zero(4, 2))));
  EXPECT_THROW(io::load_dataset<float>(dir.path()), FormatError);
}

TEST(DatasetIo, EdgeIndexOutOfRangeIsValidationError) {
  TempDir dir("range");
  fs::copy(kGolden, dir.path(), fs::copy_options::recursive);
  std::vector<Edge> edges{{0, 1, 1.0}, {2, 5, 1.0}};
  write_raw(dir / "edges.bin", io::encode_edges(edges));
  try {
    io::load_dataset<float>(dir.path());
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("edges.bin"), std::string::npos);
    EXPECT_NE(what.find("byte 36"), std::string::npos);  // second record
  }
}

TEST(DatasetIo, LabelOutOfRangeIsValidationError) {
  TempDir dir("label");
  fs::copy(kGolden, dir.path(), fs::copy_options::recursive);
  std::vector<Index> labels{0, 1, 2, 1, 0};
  write_raw(dir / "labels.bin", io::encode_labels(labels));
  EXPECT_THROW(io::load_dataset<float>(dir.path()), ValidationError);
}

TEST(DatasetIo, OverlappingSplitsAreValidationError) {
  TempDir dir("overlap");
  fs::copy(kGolden, dir.path(), fs::copy_options::recursive);
  io::write_text(dir / "splits.json", R"({"train":[0,1],"val":[1],"test":[3]})");
  EXPECT_THROW(io::load_dataset<float>(dir.path()), ValidationError);
}

TEST(DatasetIo, UnlabeledTrainingNodeIsValidationError) {
  TempDir dir("unlabeled");
  fs::copy(kGolden, dir.path(), fs::copy_options::recursive);
  io::write_text(dir / "splits.json", R"({"train":[0,4],"val":[2],"test":[3]})");
  EXPECT_THROW(io::load_dataset<float>(dir.path()), ValidationError);
}

TEST(DatasetIo, MalformedMetaIsFormatError) {
  TempDir dir("meta");
  fs::copy(kGolden, dir.path(), fs::copy_options::recursive);
  io::write_text(dir / "meta.json", R"({"num_nodes": 5, "num_features": 2)");
  EXPECT_THROW(io::load_dataset<float>(dir.path()), FormatError);
  io::write_text(dir / "meta.json",
                 R"({"num_nodes": 5, "num_features": 2, "num_classes": 2, "mode": "semi", "format_version": 1})");
  EXPECT_THROW(io::load_dataset<float>(dir.path()), FormatError);
  io::write_text(dir / "meta.json",
                 R"({"num_nodes": 5, "num_features": 2, "num_classes": 2, "mode": "inductive", "format_version": 2})");
  EXPECT_THROW(io::load_dataset<float>(dir.path()), FormatError);
}

TEST(DatasetIo, NonFiniteFeatureIsFormatError) {
  TempDir dir("nan");
  fs::copy(kGolden, dir.path(), fs::copy_options::recursive);
  Matrix<float> x = Matrix<float>::Zero(5, 2);
  x(1, 1) = std::numeric_limits<float>::quiet_NaN();
  write_raw(dir / "features.bin", io::encode_features(x));
  EXPECT_THROW(io::load_dataset<float>(dir.path()), FormatError);
}

TEST(Synthetic, ProducesValidPlanetoidStyleSplit) {
  io::SyntheticSpec s;
  s.nodes = 300;
  s.classes = 3;
  s.features = 60;
  s.val = 50;
  s.test = 100;
  s.seed = 4;
  auto ds = io::make_synthetic<float>(s);
  EXPECT_EQ(ds.num_nodes(), 300u);
  EXPECT_EQ(ds.splits.train.size(), 60u);
  EXPECT_EQ(ds.splits.val.size(), 50u);
  EXPECT_EQ(ds.splits.test.size(), 100u);
  EXPECT_TRUE(ds.graph.is_symmetric());
  auto again = io::make_synthetic<float>(s);
  EXPECT_EQ(ds.features, again.features);
  EXPECT_EQ(ds.graph.edges().size(), again.graph.edges().size());
}

}  // namespace
}  // namespace simgc
