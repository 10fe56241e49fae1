#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace simgc::cli {
namespace {

using simgc::testing::read_bytes;
using simgc::testing::TempDir;

const fs::path kGolden = fs::path(SIMGC_TEST_DATA_DIR) / "golden5";

// ---------------------------------------------------------------------------
// Configuration

TEST(Config, DefaultsSerializeFlat) {
  const json j = to_json(RunConfig{});
  EXPECT_EQ(j["steps"], 1000);
  EXPECT_EQ(j["tau_features"], 10);
  EXPECT_EQ(j["tau_generator"], 5);
  EXPECT_EQ(j["reduction_rate"], 0.026);
  EXPECT_EQ(j["smoothness_sign"], "complement");
  EXPECT_EQ(j["reduction_basis"], "nodes");
  EXPECT_EQ(j["eval_archs"], json({"gcn", "sgc", "mlp"}));
  EXPECT_EQ(j["eval_hidden"], 256);
  EXPECT_TRUE(j["lr_features"].is_null() || j["lr_features"] == "auto");
  for (const auto& [key, value] : j.items()) EXPECT_FALSE(value.is_object()) << key;
}

TEST(Config, JsonRoundTrip) {
  RunConfig a;
  apply_override(a, "steps=17");
  apply_override(a, "smoothness_sign=paper-literal");
  apply_override(a, "eval_archs=[\"mlp\",\"gcn\"]");
  apply_override(a, "lr_features=0.02");
  apply_override(a, "dataset=some/dir");
  RunConfig b;
  apply_json(b, to_json(a));
  EXPECT_EQ(to_json(a), to_json(b));
  EXPECT_EQ(b.condense.steps, 17u);
  EXPECT_EQ(b.condense.smoothness, SmoothnessSign::paper_literal);
  EXPECT_EQ(b.eval.archs, (std::vector<eval::Arch>{eval::Arch::mlp, eval::Arch::gcn}));
  EXPECT_EQ(b.lr_features, 0.02);
  EXPECT_EQ(b.dataset, "some/dir");
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  RunConfig c;
  EXPECT_THROW(apply_override(c, "stepz=3"), ConfigError);
  EXPECT_THROW(apply_override(c, "steps=-3"), ConfigError);
  EXPECT_THROW(apply_override(c, "steps=abc"), ConfigError);
  EXPECT_THROW(apply_override(c, "alpha=\"x\""), ConfigError);
  EXPECT_THROW(apply_override(c, "smoothness_sign=sideways"), ConfigError);
  EXPECT_THROW(apply_override(c, "eval_archs=[\"gat\"]"), ConfigError);
  EXPECT_THROW(apply_override(c, "no_equals_sign"), ConfigError);
  EXPECT_THROW(apply_json(c, json::array()), ConfigError);
}

TEST(Config, LoadConfigErrors) {
  TempDir dir("cfg");
  EXPECT_THROW(load_config(dir / "missing.json"), ConfigError);
  io::write_text(dir / "bad.json", "{ not json");
  EXPECT_THROW(load_config(dir / "bad.json"), ConfigError);
  io::write_text(dir / "ok.json", R"({"dataset": "d", "gamma": 0.5, "eval_trials": 3})");
  const auto c = load_config(dir / "ok.json");
  EXPECT_EQ(c.condense.gamma, 0.5);
  EXPECT_EQ(c.eval.trials, 3u);
}

TEST(Config, ResolveChoosesLearningRatesBySize) {
  RunConfig small;
  resolve(small, 2708);
  EXPECT_EQ(small.condense.lr_features, 0.005);
  EXPECT_EQ(small.condense.lr_generator, 0.001);
  RunConfig large;
  resolve(large, kLargeGraphNodes);
  EXPECT_EQ(large.condense.lr_features, 0.05);
  EXPECT_EQ(large.condense.lr_generator, 0.01);
  RunConfig pinned;
  apply_override(pinned, "lr_generator=0.3");
  apply_override(pinned, "seed=9");
  apply_override(pinned, "depth=3");
  resolve(pinned, 100000);
  EXPECT_EQ(pinned.condense.lr_generator, 0.3);
  EXPECT_EQ(pinned.teacher.depth, 3u);
  EXPECT_EQ(pinned.teacher.seed, 9u);
  EXPECT_EQ(pinned.eval.seed, 9u);
}

TEST(Config, ValidateMapsToConfigError) {
  RunConfig c;
  EXPECT_THROW(validate(c), ConfigError);  // no dataset
  c.dataset = "x";
  validate(c);
  c.condense.delta = 1.5;
  EXPECT_THROW(validate(c), ConfigError);
  c.condense.delta = 0.01;
  c.eval.trials = 0;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Output, TraceCsvFormat) {
  std::vector<TraceRow> rows{{0, 3.5, 1, 2, 0.5}, {1, 0.1, 0.1, 0, 0}};
  EXPECT_EQ(trace_csv(rows), "step,loss_total,loss_rep,loss_lgt,loss_smt\n0,3.5,1,2,0.5\n1,0.1,0.1,0,0\n");
}

// ---------------------------------------------------------------------------
// The executable

struct Run {
  int code;
  std::string out;
};

Run run_cli(const std::string& args) {
  TempDir capture("cli_out");
  const std::string cmd = std::string(SIMGC_CLI_PATH) + " " + args + " >" + (capture / "o").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_bytes(capture / "o")};
}

std::string quick_flags(const fs::path& data, const fs::path& out) {
  return "-q --dataset " + data.string() + " --out " + out.string() +
         " --set teacher_epochs=30 --set steps=12 --set generator_hidden=16 --set reduction_rate=0.2"
         " --set eval_trials=2 --set eval_epochs=15 --set eval_hidden=16 --set tau_features=3 --set tau_generator=2";
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    io::save_dataset(data.path(), simgc::testing::toy_dataset<float>(3, 20, 8, 31));
  }
  TempDir data{"cli_data"};
  TempDir work{"cli_work"};
};

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("frobnicate").code, 2);
  EXPECT_EQ(run_cli("--precision f16 pretrain").code, 2);
  EXPECT_EQ(run_cli("--set stepz=1 " + quick_flags(data.path(), work.path()) + " pretrain").code, 2);
  EXPECT_EQ(run_cli("-q pretrain").code, 2);  // no dataset
  EXPECT_EQ(run_cli("--config " + (work / "nope.json").string() + " pretrain").code, 2);
}

TEST_F(Cli, HelpExitsZero) {
  const auto r = run_cli("--help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("pipeline"), std::string::npos);
}

TEST_F(Cli, BadDatasetExitsThree) {
  EXPECT_EQ(run_cli(quick_flags(work / "absent", work.path()) + " pretrain").code, 3);
  TempDir broken("cli_broken");
  fs::copy(kGolden, broken.path(), fs::copy_options::recursive);
  auto bytes = io::read_file(broken / "edges.bin");
  bytes.resize(bytes.size() - 1);
  io::write_file(broken / "edges.bin", bytes);
  const auto r = run_cli("validate-dataset " + broken.path().string());
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("edges.bin"), std::string::npos);
}

TEST_F(Cli, CondenseWithoutTeacherExitsTwo) {
  EXPECT_EQ(run_cli(quick_flags(data.path(), work.path()) + " condense").code, 2);
}

TEST_F(Cli, NonFiniteTeacherExitsFourAndKeepsLastGoodState) {
  ASSERT_EQ(run_cli(quick_flags(data.path(), work.path()) + " pretrain").code, 0);
  auto teacher = io::load_teacher<float>(work / "teacher.bin");
  teacher.model.params[0](0, 0) = std::numeric_limits<float>::infinity();
  io::save_teacher(work / "teacher.bin", teacher);
  EXPECT_EQ(run_cli(quick_flags(data.path(), work.path()) + " condense").code, 4);
  const json meta = json::parse(io::read_text(work / "condensed" / "condense_meta.json"));
  EXPECT_EQ(meta["status"], "aborted");
  EXPECT_EQ(meta["steps_completed"], 0);
}

TEST_F(Cli, ValidateDatasetPrintsCounts) {
  const auto r = run_cli("validate-dataset " + kGolden.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "nodes 5\nedges 6\nfeatures 2\nclasses 2\nmode transductive\ntrain 2\nval 1\ntest 1\n");
}

TEST_F(Cli, PipelineWritesEveryArtifact) {
  ASSERT_EQ(run_cli(quick_flags(data.path(), work.path()) + " --seed 3 pipeline").code, 0);
  for (const char* f : {"config.resolved.json", "teacher.bin", "trace.csv", "report.json", "timing.json",
                        "condensed/meta.json", "condensed/features.bin", "condensed/edges.bin", "condensed/labels.bin",
                        "condensed/splits.json", "condensed/generator.bin", "condensed/condense_meta.json"})
    EXPECT_TRUE(fs::exists(work / f)) << f;

  const json resolved = json::parse(io::read_text(work / "config.resolved.json"));
  EXPECT_EQ(resolved["seed"], 3);
  EXPECT_EQ(resolved["lr_features"], 0.005);
  EXPECT_EQ(resolved["steps"], 12);

  std::istringstream trace(io::read_text(work / "trace.csv"));
  std::string line;
  std::getline(trace, line);
  EXPECT_EQ(line, "step,loss_total,loss_rep,loss_lgt,loss_smt");
  int rows = 0;
  while (std::getline(trace, line)) ++rows;
  EXPECT_EQ(rows, 12);

  const json report = json::parse(io::read_text(work / "report.json"));
  for (const char* a : {"gcn", "sgc", "mlp"}) {
    EXPECT_EQ(report["archs"][a]["trials"].size(), 2u) << a;
    EXPECT_TRUE(report["archs"][a]["std"].is_number()) << a;
    EXPECT_EQ(report["archs"][a]["seeds"], json({3, 4})) << a;
  }
  EXPECT_EQ(report["condensed_stats"]["nodes"], 12);

  const json meta = json::parse(io::read_text(work / "condensed" / "condense_meta.json"));
  EXPECT_EQ(meta["status"], "complete");
  EXPECT_EQ(meta["steps_completed"], 12);
  EXPECT_EQ(meta["class_counts"], json({4, 4, 4}));

  const auto stats = run_cli("stats " + (work / "condensed").string() + " --original " + data.path().string());
  EXPECT_EQ(stats.code, 0);
  EXPECT_NE(stats.out.find("condensed"), std::string::npos);
  EXPECT_NE(stats.out.find("original"), std::string::npos);
}

TEST_F(Cli, StagesCanRunSeparately) {
  TempDir other("cli_other");
  const std::string flags = quick_flags(data.path(), work.path()) + " --deterministic";
  ASSERT_EQ(run_cli(flags + " pretrain").code, 0);
  ASSERT_EQ(run_cli(flags + " condense").code, 0);
  ASSERT_EQ(run_cli(flags + " eval").code, 0);
  ASSERT_EQ(run_cli(quick_flags(data.path(), other.path()) + " --deterministic pipeline").code, 0);
  for (const char* f : {"teacher.bin", "trace.csv", "report.json", "condensed/edges.bin", "condensed/features.bin",
                        "condensed/condense_meta.json"})
    EXPECT_EQ(read_bytes(work / f), read_bytes(other / f)) << f;
}

TEST_F(Cli, DoublePrecisionRuns) {
  EXPECT_EQ(run_cli(quick_flags(data.path(), work.path()) + " --precision f64 pipeline").code, 0);
  const json resolved = json::parse(io::read_text(work / "config.resolved.json"));
  EXPECT_EQ(resolved["precision"], "f64");
}

}  // namespace
}  // namespace simgc::cli
