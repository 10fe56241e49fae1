#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "simgc/cli/commands.hpp"
#include "simgc/core/log.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kFormat = 3, kNumeric = 4 };

struct Globals {
  std::string config;
  std::string dataset;
  std::string out;
  std::vector<std::string> overrides;
  std::string precision;
  unsigned long long seed = 0;
  bool seed_set = false;
  bool deterministic = false;
  bool quiet = false;
};

simgc::cli::RunConfig build_config(const Globals& g) {
  simgc::cli::RunConfig cfg;
  if (!g.config.empty()) cfg = simgc::cli::load_config(g.config);
  for (const auto& o : g.overrides) simgc::cli::apply_override(cfg, o);
  if (!g.dataset.empty()) cfg.dataset = g.dataset;
  if (!g.out.empty()) cfg.out = g.out;
  if (g.seed_set) cfg.seed = g.seed;
  if (g.deterministic) cfg.deterministic = true;
  if (!g.precision.empty()) simgc::cli::apply_override(cfg, "precision=" + g.precision);
  simgc::cli::prepare(cfg);
  return cfg;
}

template <class Fn>
void dispatch(const simgc::cli::RunConfig& cfg, Fn&& fn) {
  if (cfg.precision == simgc::Precision::f64)
    fn(double{});
  else
    fn(float{});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SimGC graph condensation: pretrain, condense, evaluate"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "flat JSON run configuration");
  app.add_option("--dataset", g.dataset, "dataset directory (overrides the config)");
  app.add_option("--out", g.out, "output directory");
  auto* seed = app.add_option("--seed", g.seed, "seed for every stage");
  app.add_flag("--deterministic", g.deterministic, "single worker, bitwise reproducible");
  app.add_option("--precision", g.precision, "f32 or f64")->check(CLI::IsMember({"f32", "f64"}));
  app.add_option("--set", g.overrides, "override a config key: key=value (repeatable)");
  app.add_flag("-q,--quiet", g.quiet, "no progress output");

  auto* pretrain = app.add_subcommand("pretrain", "fit the SGC teacher and cache class statistics");
  auto* condense = app.add_subcommand("condense", "run the alternating condensation loop");
  auto* eval = app.add_subcommand("eval", "train gcn/sgc/mlp on the condensed graph and report test accuracy");
  auto* pipeline = app.add_subcommand("pipeline", "pretrain, condense and eval in sequence");
  auto* stats = app.add_subcommand("stats", "size summary of a condensed directory");
  std::string stats_dir, stats_original;
  stats->add_option("dir", stats_dir, "condensed directory")->required();
  stats->add_option("--original", stats_original, "original dataset directory for comparison");
  auto* validate = app.add_subcommand("validate-dataset", "load a dataset directory and print its counts");
  std::string validate_dir;
  validate->add_option("dir", validate_dir, "dataset directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  g.seed_set = seed->count() > 0;
  simgc::log::enabled() = !g.quiet;

  try {
    if (*stats) {
      simgc::cli::cmd_stats(stats_dir, stats_original, std::cout);
    } else if (*validate) {
      simgc::cli::cmd_validate_dataset(validate_dir, std::cout);
    } else {
      const auto cfg = build_config(g);
      dispatch(cfg, [&](auto tag) {
        using T = decltype(tag);
        if (*pretrain) simgc::cli::cmd_pretrain<T>(cfg);
        if (*condense) simgc::cli::cmd_condense<T>(cfg);
        if (*eval) simgc::cli::cmd_eval<T>(cfg);
        if (*pipeline) simgc::cli::cmd_pipeline<T>(cfg);
      });
    }
  } catch (const simgc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const simgc::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kFormat;
  } catch (const simgc::ValidationError& e) {
    std::cerr << "dataset error: " << e.what() << '\n';
    return kFormat;
  } catch (const simgc::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
