#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "simgc/cli/config.hpp"
#include "simgc/condense/condensed_io.hpp"
#include "simgc/condense/run.hpp"
#include "simgc/core/runtime.hpp"
#include "simgc/eval/evaluate.hpp"
#include "simgc/io/dataset_io.hpp"
#include "simgc/sgc/teacher_io.hpp"

namespace simgc::cli {

/// Shortest round-trip decimal form.
inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

inline std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::string out = "step,loss_total,loss_rep,loss_lgt,loss_smt\n";
  for (const auto& r : trace) {
    out += std::to_string(r.step);
    for (double v : {r.total, r.rep, r.lgt, r.smt}) {
      out += ',';
      out += format_number(v);
    }
    out += '\n';
  }
  return out;
}

inline void write_json(const fs::path& path, const json& j) {
  io::write_text(path, j.dump(2) + "\n");
}

/// Wall-clock goes to <out>/timing.json so artifact directories stay
/// reproducible byte for byte.
inline void record_timing(const RunConfig& cfg, const std::string& stage, double seconds) {
  const fs::path path = fs::path(cfg.out) / "timing.json";
  json j = json::object();
  if (fs::exists(path)) {
    j = json::parse(io::read_text(path), nullptr, false);
    if (!j.is_object()) j = json::object();
  }
  j[stage + "_seconds"] = seconds;
  write_json(path, j);
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Applies runtime settings, fills size-dependent defaults and writes
/// <out>/config.resolved.json.
inline void prepare(RunConfig& cfg) {
  validate(cfg);
  Runtime::set_deterministic(cfg.deterministic);
  Runtime::set_num_threads(cfg.threads);
  const auto meta = io::read_meta(fs::path(cfg.dataset) / "meta.json");
  resolve(cfg, meta.num_nodes);
  fs::create_directories(cfg.out);
  write_json(fs::path(cfg.out) / "config.resolved.json", to_json(cfg));
}

template <class T>
void cmd_pretrain(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dataset = io::load_dataset<T>(cfg.dataset);
  const auto teacher = pretrain(dataset, cfg.teacher);
  fs::create_directories(cfg.teacher_file().parent_path().empty() ? "." : cfg.teacher_file().parent_path());
  io::save_teacher(cfg.teacher_file(), teacher);
  record_timing(cfg, "pretrain", seconds_since(t0));
}

template <class T>
void write_condensed(const RunConfig& cfg, const CondensedGraph<T>& graph, const std::vector<TraceRow>& trace,
                     double bandwidth, const char* status) {
  const fs::path dir = cfg.condensed_dir();
  io::save_condensed(dir, graph);
  io::write_text(fs::path(cfg.out) / "trace.csv", trace_csv(trace));
  json last = nullptr;
  if (!trace.empty())
    last = {{"step", trace.back().step},
            {"loss_total", trace.back().total},
            {"loss_rep", trace.back().rep},
            {"loss_lgt", trace.back().lgt},
            {"loss_smt", trace.back().smt}};
  // Output locations are left out so identical runs into different
  // directories produce identical metadata.
  json config = to_json(cfg);
  for (const char* key : {"out", "teacher_path", "condensed_path"}) config.erase(key);
  write_json(dir / "condense_meta.json", {{"status", status},
                                          {"config", config},
                                          {"seed", cfg.seed},
                                          {"steps_completed", trace.size()},
                                          {"rbf_bandwidth", bandwidth},
                                          {"class_counts", graph.class_counts()},
                                          {"final_losses", last}});
}

template <class T>
void cmd_condense(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dataset = io::load_dataset<T>(cfg.dataset);
  if (!fs::exists(cfg.teacher_file()))
    throw ConfigError("teacher file " + cfg.teacher_file().string() + " not found; run pretrain first");
  const auto teacher = io::load_teacher<T>(cfg.teacher_file());
  try {
    const auto result = run_condensation(dataset, teacher, cfg.condense);
    write_condensed(cfg, result.graph, result.trace, result.rbf_bandwidth, "complete");
  } catch (const CondenseAborted<T>& e) {
    write_condensed(cfg, e.last_good(), e.trace(), 0.0, "aborted");
    throw;
  }
  record_timing(cfg, "condense", seconds_since(t0));
}

template <class T>
eval::EvalReport cmd_eval(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dataset = io::load_dataset<T>(cfg.dataset);
  const auto cond = io::load_condensed<T>(cfg.condensed_dir());
  require(cond.num_classes == dataset.num_classes, "condensed graph has ", cond.num_classes,
          " classes, dataset has ", dataset.num_classes);
  auto report = eval::cross_architecture_report(cond, dataset, cfg.eval);
  write_json(fs::path(cfg.out) / "report.json", eval::to_json(report));
  record_timing(cfg, "eval", seconds_since(t0));
  return report;
}

template <class T>
eval::EvalReport cmd_pipeline(const RunConfig& cfg) {
  cmd_pretrain<T>(cfg);
  cmd_condense<T>(cfg);
  return cmd_eval<T>(cfg);
}

/// Size summary of a condensed directory, optionally next to the original.
inline void cmd_stats(const fs::path& dir, const std::string& original, std::ostream& os) {
  const auto cond = io::load_condensed<float>(dir);
  const auto s = eval::condensed_stats(cond);
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %8s %10s %10s %14s\n", "graph", "nodes", "edges", "sparsity", "storage_bytes");
  os << line;
  if (!original.empty()) {
    const auto ds = io::load_dataset<float>(original);
    const double n = static_cast<double>(ds.num_nodes());
    Index bytes = 0;
    for (const char* f : {"meta.json", "features.bin", "edges.bin", "labels.bin", "splits.json"})
      bytes += fs::file_size(fs::path(original) / f);
    std::snprintf(line, sizeof line, "%-10s %8llu %10llu %10.4f %14llu\n", "original",
                  static_cast<unsigned long long>(ds.num_nodes()), static_cast<unsigned long long>(ds.graph.num_edges()),
                  n > 1 ? static_cast<double>(ds.graph.num_edges()) / (n * (n - 1)) : 0.0,
                  static_cast<unsigned long long>(bytes));
    os << line;
  }
  std::snprintf(line, sizeof line, "%-10s %8llu %10llu %10.4f %14llu\n", "condensed",
                static_cast<unsigned long long>(s.nodes), static_cast<unsigned long long>(s.edges), s.sparsity,
                static_cast<unsigned long long>(s.storage_bytes));
  os << line;
}

inline void cmd_validate_dataset(const fs::path& dir, std::ostream& os) {
  const auto ds = io::load_dataset<float>(dir);
  os << "nodes " << ds.num_nodes() << "\n"
     << "edges " << ds.graph.num_edges() << "\n"
     << "features " << ds.num_features() << "\n"
     << "classes " << ds.num_classes << "\n"
     << "mode " << to_string(ds.mode) << "\n"
     << "train " << ds.splits.train.size() << "\n"
     << "val " << ds.splits.val.size() << "\n"
     << "test " << ds.splits.test.size() << "\n";
}

}  // namespace simgc::cli
