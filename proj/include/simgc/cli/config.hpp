#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "simgc/condense/run.hpp"
#include "simgc/core/error.hpp"
#include "simgc/eval/evaluate.hpp"
#include "simgc/sgc/pretrain.hpp"

namespace simgc::cli {

using nlohmann::json;
namespace fs = std::filesystem;

/// Datasets at least this large get the larger default learning rates.
inline constexpr Index kLargeGraphNodes = 10000;

/// Everything one invocation needs. Serialized as a flat JSON object.
struct RunConfig {
  std::string dataset;
  std::string out = "out";
  std::string teacher_path;    // empty: <out>/teacher.bin
  std::string condensed_path;  // empty: <out>/condensed
  std::uint64_t seed = 0;
  bool deterministic = false;
  Precision precision = Precision::f32;
  Index threads = 0;  // 0: hardware concurrency
  PretrainConfig teacher;
  CondenseConfig condense;
  std::optional<double> lr_features;   // empty: chosen from the dataset size
  std::optional<double> lr_generator;
  eval::EvalConfig eval;

  fs::path teacher_file() const { return teacher_path.empty() ? fs::path(out) / "teacher.bin" : fs::path(teacher_path); }
  fs::path condensed_dir() const { return condensed_path.empty() ? fs::path(out) / "condensed" : fs::path(condensed_path); }
};

namespace detail {

template <class E>
using Names = std::vector<std::pair<const char*, E>>;

inline const Names<SmoothnessSign> kSmoothness{{"complement", SmoothnessSign::complement},
                                               {"paper-literal", SmoothnessSign::paper_literal}};
inline const Names<ReductionBasis> kBasis{{"nodes", ReductionBasis::nodes}, {"train", ReductionBasis::train}};
inline const Names<Activation> kActivation{{"relu", Activation::relu}, {"tanh", Activation::tanh}};
inline const Names<StdConvention> kStd{{"population", StdConvention::population}, {"sample", StdConvention::sample}};
inline const Names<HeadKind> kHead{{"linear", HeadKind::linear}, {"mlp", HeadKind::mlp}};
inline const Names<Precision> kPrecision{{"f32", Precision::f32}, {"f64", Precision::f64}};
inline const Names<ad::OptimizerKind> kOptimizer{{"adam", ad::OptimizerKind::adam}, {"sgd", ad::OptimizerKind::sgd}};

struct Field {
  std::string key;
  std::function<void(const json&)> set;
  std::function<json()> get;
};

[[noreturn]] inline void bad(const std::string& key, const json& v, const char* expected) {
  throw ConfigError("config key '" + key + "': expected " + expected + ", got " + v.dump());
}

class Fields {
 public:
  std::vector<Field> list;

  void number(const std::string& key, double& f) {
    list.push_back({key, [key, &f](const json& v) {
                      if (!v.is_number()) bad(key, v, "a number");
                      f = v.get<double>();
                    },
                    [&f] { return json(f); }});
  }
  void count(const std::string& key, Index& f) {
    list.push_back({key, [key, &f](const json& v) {
                      if (!v.is_number_unsigned()) bad(key, v, "a non-negative integer");
                      f = v.get<Index>();
                    },
                    [&f] { return json(f); }});
  }
  void flag(const std::string& key, bool& f) {
    list.push_back({key, [key, &f](const json& v) {
                      if (!v.is_boolean()) bad(key, v, "true or false");
                      f = v.get<bool>();
                    },
                    [&f] { return json(f); }});
  }
  void text(const std::string& key, std::string& f) {
    list.push_back({key, [key, &f](const json& v) {
                      if (!v.is_string()) bad(key, v, "a string");
                      f = v.get<std::string>();
                    },
                    [&f] { return json(f); }});
  }
  void optional_number(const std::string& key, std::optional<double>& f) {
    list.push_back({key, [key, &f](const json& v) {
                      if (v.is_null() || v == "auto") f.reset();
                      else if (v.is_number()) f = v.get<double>();
                      else bad(key, v, "a number or \"auto\"");
                    },
                    [&f] { return f ? json(*f) : json("auto"); }});
  }
  template <class E>
  void choice(const std::string& key, E& f, const Names<E>& names) {
    list.push_back({key, [key, &f, &names](const json& v) {
                      if (v.is_string())
                        for (const auto& [name, value] : names)
                          if (v == name) {
                            f = value;
                            return;
                          }
                      std::string expected = "one of";
                      for (const auto& n : names) expected += std::string(" \"") + n.first + "\"";
                      bad(key, v, expected.c_str());
                    },
                    [&f, &names]() -> json {
                      for (const auto& [name, value] : names)
                        if (value == f) return name;
                      return nullptr;
                    }});
  }
  void archs(const std::string& key, std::vector<eval::Arch>& f) {
    list.push_back({key, [key, &f](const json& v) {
                      if (!v.is_array()) bad(key, v, "an array of architecture names");
                      f.clear();
                      for (const auto& a : v) {
                        if (!a.is_string()) bad(key, v, "an array of architecture names");
                        f.push_back(eval::parse_arch(a.get<std::string>()));
                      }
                    },
                    [&f] {
                      json out = json::array();
                      for (auto a : f) out.push_back(eval::to_string(a));
                      return out;
                    }});
  }
};

inline Fields fields(RunConfig& c) {
  Fields f;
  f.text("dataset", c.dataset);
  f.text("out", c.out);
  f.text("teacher_path", c.teacher_path);
  f.text("condensed_path", c.condensed_path);
  f.list.push_back({"seed", [&c](const json& v) {
                      if (!v.is_number_unsigned()) bad("seed", v, "a non-negative integer");
                      c.seed = v.get<std::uint64_t>();
                    },
                    [&c] { return json(c.seed); }});
  f.flag("deterministic", c.deterministic);
  f.choice("precision", c.precision, kPrecision);
  f.count("threads", c.threads);

  f.choice("teacher_head", c.teacher.head, kHead);
  f.count("teacher_hidden", c.teacher.hidden);
  f.count("teacher_epochs", c.teacher.epochs);
  f.count("teacher_patience", c.teacher.patience);
  f.number("teacher_lr", c.teacher.lr);
  f.number("teacher_weight_decay", c.teacher.weight_decay);
  f.flag("teacher_select_best", c.teacher.select_best);

  f.count("depth", c.condense.depth);
  f.number("alpha", c.condense.alpha);
  f.number("beta", c.condense.beta);
  f.number("gamma", c.condense.gamma);
  f.optional_number("lr_features", c.lr_features);
  f.optional_number("lr_generator", c.lr_generator);
  f.count("tau_features", c.condense.tau_features);
  f.count("tau_generator", c.condense.tau_generator);
  f.count("steps", c.condense.steps);
  f.number("delta", c.condense.delta);
  f.number("rbf_bandwidth", c.condense.rbf_bandwidth);
  f.choice("smoothness_sign", c.condense.smoothness, kSmoothness);
  f.number("reduction_rate", c.condense.reduction_rate);
  f.choice("reduction_basis", c.condense.reduction_basis, kBasis);
  f.count("generator_hidden", c.condense.generator_hidden);
  f.count("generator_layers", c.condense.generator_layers);
  f.choice("generator_activation", c.condense.generator_activation, kActivation);
  f.choice("optimizer", c.condense.optimizer, kOptimizer);
  f.choice("std_convention", c.condense.std_convention, kStd);

  f.archs("eval_archs", c.eval.archs);
  f.count("eval_trials", c.eval.trials);
  f.count("eval_hidden", c.eval.hidden);
  f.number("eval_dropout", c.eval.dropout);
  f.number("eval_lr", c.eval.lr);
  f.number("eval_weight_decay", c.eval.weight_decay);
  f.count("eval_epochs", c.eval.epochs);
  f.count("eval_sgc_depth", c.eval.sgc_depth);
  return f;
}

}  // namespace detail

/// Applies the keys of a flat JSON object; unknown keys are rejected.
inline void apply_json(RunConfig& cfg, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  auto f = detail::fields(cfg);
  for (const auto& [key, value] : j.items()) {
    auto it = std::find_if(f.list.begin(), f.list.end(), [&](const detail::Field& x) { return x.key == key; });
    if (it == f.list.end()) throw ConfigError("unknown config key '" + key + "'");
    it->set(value);
  }
}

/// `key=value`; the value is read as JSON when it parses, as a string otherwise.
inline void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json j = json::object();
  j[key] = std::move(value);
  apply_json(cfg, j);
}

inline RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError(path.string() + ": not valid JSON");
  RunConfig cfg;
  apply_json(cfg, j);
  return cfg;
}

/// Fills size-dependent defaults and copies the shared seed and depth into
/// each stage.
inline void resolve(RunConfig& cfg, Index dataset_nodes) {
  const bool large = dataset_nodes >= kLargeGraphNodes;
  if (!cfg.lr_features) cfg.lr_features = large ? 0.05 : 0.005;
  if (!cfg.lr_generator) cfg.lr_generator = large ? 0.01 : 0.001;
  cfg.condense.lr_features = *cfg.lr_features;
  cfg.condense.lr_generator = *cfg.lr_generator;
  cfg.teacher.depth = cfg.condense.depth;
  cfg.teacher.std_convention = cfg.condense.std_convention;
  cfg.teacher.seed = cfg.seed;
  cfg.condense.seed = cfg.seed;
  cfg.eval.seed = cfg.seed;
}

inline json to_json(const RunConfig& cfg) {
  RunConfig copy = cfg;
  auto f = detail::fields(copy);
  json j = json::object();
  for (const auto& field : f.list) j[field.key] = field.get();
  return j;
}

inline void validate(const RunConfig& cfg) {
  if (cfg.dataset.empty()) throw ConfigError("config key 'dataset' is required");
  try {
    cfg.condense.validate();
    cfg.eval.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  if (cfg.teacher.epochs == 0) throw ConfigError("teacher_epochs must be >= 1");
}

}  // namespace simgc::cli
