// Copyright 2026 The ctrlmut Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ctrlmut/errors.hpp"
#include "ctrlmut/experiment.hpp"

namespace ctrlmut {
namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string_view::npos) end = s.size();
    auto item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = end + 1;
  }
  return out;
}

std::vector<std::string> split_words(std::string_view s) {
  std::istringstream in{std::string(s)};
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": not a non-negative integer: '" + v + "'");
  }
  return out;
}

class Section {
 public:
  Section(const pt::ptree& root, std::string name) : name_(std::move(name)) {
    if (auto child = root.get_child_optional(name_)) tree_ = *child;
  }

  std::optional<std::string> get(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return std::nullopt;
    auto t = trim(*v);
    if (t.empty()) return std::nullopt;
    return t;
  }

  std::string label(const std::string& key) const { return name_ + "." + key; }

  void read(const std::string& key, std::string& out) const {
    if (auto v = get(key)) out = *v;
  }
  void read(const std::string& key, double& out) const {
    if (auto v = get(key)) out = to_double(label(key), *v);
  }
  void read(const std::string& key, std::uint64_t& out) const {
    if (auto v = get(key)) out = to_u64(label(key), *v);
  }
  void read(const std::string& key, int& out) const {
    if (auto v = get(key)) out = static_cast<int>(to_u64(label(key), *v));
  }
  void read_path(const std::string& key, fs::path& out, const fs::path& base) const {
    if (auto v = get(key)) {
      fs::path p(*v);
      out = (p.is_relative() && !base.empty()) ? base / p : p;
    }
  }

  void check_keys(std::initializer_list<std::string_view> known) const {
    for (const auto& [key, _] : tree_) {
      bool ok = false;
      for (auto k : known) ok = ok || key == k;
      if (!ok) throw ConfigError("unknown key '" + label(key) + "'");
    }
  }

 private:
  std::string name_;
  pt::ptree tree_;
};

}  // namespace

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::live: return "live";
    case BackendKind::mock: return "mock";
    case BackendKind::sloppy: return "sloppy";
    case BackendKind::replay: return "replay";
  }
  return "?";
}

BackendKind backend_from_string(std::string_view s) {
  if (s == "live") return BackendKind::live;
  if (s == "mock") return BackendKind::mock;
  if (s == "sloppy") return BackendKind::sloppy;
  if (s == "replay") return BackendKind::replay;
  throw ConfigError("unknown backend '" + std::string(s) + "'");
}

std::string_view to_string(ExperimentKind kind) {
  return kind == ExperimentKind::adherence ? "adherence" : "dynamic";
}

ExperimentKind experiment_kind_from_string(std::string_view s) {
  if (s == "adherence") return ExperimentKind::adherence;
  if (s == "dynamic") return ExperimentKind::dynamic;
  throw ConfigError("unknown experiment kind '" + std::string(s) + "'");
}

ExperimentPlan default_plan(ExperimentKind kind) {
  ExperimentPlan plan;
  plan.kind = kind;
  for (int i = 1; i <= 11; ++i) plan.prompts.push_back("prompt" + std::to_string(i));
  plan.generation_budget = 100;
  plan.beta = 1.5;
  plan.repeats = kind == ExperimentKind::adherence ? 3 : 5;
  return plan;
}

ConfigFile parse_config(std::string_view text, const fs::path& base_dir) {
  pt::ptree root;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  for (const auto& [name, _] : root) {
    if (name != "experiment" && name != "model" && name != "evaluation" && name != "evolution") {
      throw ConfigError("unknown section [" + name + "]");
    }
  }

  const Section ex(root, "experiment");
  ex.check_keys({"kind", "prompts", "rates", "beta", "repeats", "generation_budget", "output_dir", "master_seed",
                 "workers", "prompt_file"});
  const auto kind = experiment_kind_from_string(ex.get("kind").value_or("adherence"));

  ConfigFile cfg;
  cfg.plan = default_plan(kind);
  auto& plan = cfg.plan;
  if (auto v = ex.get("prompts")) plan.prompts = split_list(*v);
  if (auto v = ex.get("rates")) {
    plan.rates.clear();
    for (const auto& r : split_list(*v)) plan.rates.push_back(to_double(ex.label("rates"), r));
  }
  ex.read("beta", plan.beta);
  ex.read("repeats", plan.repeats);
  ex.read("generation_budget", plan.generation_budget);
  ex.read_path("output_dir", plan.output_dir, base_dir);
  ex.read("master_seed", plan.master_seed);
  ex.read("workers", plan.run_workers);
  if (ex.get("prompt_file")) {
    fs::path p;
    ex.read_path("prompt_file", p, base_dir);
    cfg.prompt_file = p;
  }

  const Section model(root, "model");
  model.check_keys({"backend", "name", "endpoint", "temperature", "max_retries", "timeout_s", "api_key_env",
                    "initial_backoff_s", "replay_dir"});
  if (auto v = model.get("backend")) plan.backend = backend_from_string(*v);
  model.read("name", plan.model.model_name);
  model.read("endpoint", plan.model.endpoint_url);
  model.read("temperature", plan.model.temperature);
  model.read("max_retries", plan.model.max_retries);
  model.read("timeout_s", plan.model.timeout_s);
  model.read("api_key_env", plan.model.api_key_env);
  model.read("initial_backoff_s", plan.model.initial_backoff_s);
  model.read_path("replay_dir", plan.replay_dir, base_dir);

  const Section ev(root, "evaluation");
  ev.check_keys({"functions", "dim", "instances", "repeats", "eval_budget", "aocc_lower", "aocc_upper",
                 "candidate_timeout_s", "candidate_command", "workers"});
  auto& eval = plan.evaluation;
  if (auto v = ev.get("functions")) {
    eval.functions.clear();
    try {
      for (const auto& f : split_list(*v)) eval.functions.push_back(function_from_string(f));
    } catch (const Error& e) {
      throw ConfigError(std::string("evaluation.functions: ") + e.what());
    }
  }
  ev.read("dim", eval.dim);
  if (auto v = ev.get("instances")) {
    eval.instances.clear();
    for (const auto& i : split_list(*v)) eval.instances.push_back(to_u64(ev.label("instances"), i));
  }
  ev.read("repeats", eval.repeats);
  ev.read("eval_budget", eval.eval_budget);
  ev.read("aocc_lower", eval.bounds.lower);
  ev.read("aocc_upper", eval.bounds.upper);
  ev.read("candidate_timeout_s", eval.candidate_timeout_s);
  if (auto v = ev.get("candidate_command")) eval.candidate_command = split_words(*v);
  ev.read("workers", eval.workers);

  const Section evo(root, "evolution");
  evo.check_keys({"run_id", "prompt", "rate_policy"});
  evo.read("run_id", cfg.single.run_id);
  evo.read("prompt", cfg.single.prompt_id);
  if (auto v = evo.get("rate_policy")) {
    try {
      cfg.single.rate_policy = RatePolicy::parse(*v);
    } catch (const Error& e) {
      throw ConfigError(std::string("evolution.rate_policy: ") + e.what());
    }
  }

  if (plan.prompts.empty()) throw ConfigError("experiment.prompts is empty");
  if (plan.repeats == 0) throw ConfigError("experiment.repeats must be positive");
  if (plan.generation_budget == 0) throw ConfigError("experiment.generation_budget must be positive");
  if (plan.run_workers == 0) throw ConfigError("experiment.workers must be positive");
  if (!(plan.beta > 0.0)) throw ConfigError("experiment.beta must be positive");
  for (double r : plan.rates) {
    if (!(r > 0.0 && r < 100.0)) throw ConfigError("experiment.rates must lie in (0, 100)");
  }
  validate(plan.model, plan.backend == BackendKind::live);
  return cfg;
}

ConfigFile load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

}  // namespace ctrlmut
