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

// Experiment plans and their orchestration: the fixed-rate adherence grid and
// the dynamic-rate convergence study.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ctrlmut/evolution.hpp"
#include "ctrlmut/llmclient.hpp"
#include "ctrlmut/promptbank.hpp"
#include "ctrlmut/report.hpp"

namespace ctrlmut {

enum class BackendKind { live, mock, sloppy, replay };

std::string_view to_string(BackendKind kind);
BackendKind backend_from_string(std::string_view s);

enum class ExperimentKind { adherence, dynamic };

std::string_view to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(std::string_view s);

struct ExperimentPlan {
  ExperimentKind kind = ExperimentKind::adherence;
  std::vector<std::string> prompts;
  std::vector<double> rates{2, 5, 10, 20, 40};  // adherence only
  double beta = 1.5;  // dynamic sampling; also the TDW weighting exponent
  std::size_t repeats = 3;
  std::size_t generation_budget = 100;
  BackendKind backend = BackendKind::mock;
  ModelConfig model;
  /// Output directory of a recorded experiment, for the replay backend.
  std::filesystem::path replay_dir;
  EvaluationConfig evaluation;
  std::filesystem::path output_dir = "out";
  std::uint64_t master_seed = 0;
  std::size_t run_workers = 1;
};

/// Defaults: adherence uses rates {2,5,10,20,40} and 3 repeats, dynamic uses
/// beta 1.5 and 5 repeats; both generate 100 instances per run.
ExperimentPlan default_plan(ExperimentKind kind);

/// Settings for a single `evolve` run.
struct SingleRunSettings {
  std::string run_id = "single";
  std::string prompt_id = "prompt5";
  RatePolicy rate_policy = RatePolicy::dynamic(1.5);
};

/// Parsed configuration file.
struct ConfigFile {
  ExperimentPlan plan;
  SingleRunSettings single;
  std::optional<std::filesystem::path> prompt_file;
};

/// INI file with [experiment], [model], [evaluation] and [evolution] sections.
/// Relative paths resolve against the file's directory. Throws ConfigError.
ConfigFile load_config(const std::filesystem::path& path);
ConfigFile parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

/// Per-run seed from (master seed, prompt, rate label, repeat).
std::uint64_t run_seed(std::uint64_t master_seed, std::string_view prompt_id, std::string_view rate_label,
                       std::size_t repeat);

std::string adherence_run_id(std::string_view prompt_id, double rate, std::size_t repeat);
std::string dynamic_run_id(std::string_view prompt_id, std::size_t repeat);

std::unique_ptr<ChatBackend> make_backend(const ExperimentPlan& plan, std::string_view run_id, std::uint64_t seed);

struct ExperimentOutcome {
  ReportBundle bundle;
  std::size_t runs_completed = 0;
  std::vector<std::string> aborted;  // "<run_id>: <reason>"
};

/// One fixed-rate evolve run per (prompt, rate, repeat); the report is rebuilt
/// from the run logs and written to plan.output_dir.
ExperimentOutcome run_adherence(const ExperimentPlan& plan, const PromptBank& bank);

/// One dynamic-rate evolve run per (prompt, repeat).
ExperimentOutcome run_dynamic(const ExperimentPlan& plan, const PromptBank& bank);

/// A single evolve run under plan's model/evaluation settings, written to
/// plan.output_dir/runs/<run_id>.
EvolutionResult run_single(const ExperimentPlan& plan, const SingleRunSettings& single, const PromptBank& bank,
                           const GenerationCallback& on_generation = {});

}  // namespace ctrlmut
