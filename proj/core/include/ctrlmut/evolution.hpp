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

// (1+1) elitist evolution of optimizer source code with a rate-controlled
// mutation prompt.
//
// A run directory holds:
//   meta.json          run configuration and metric conventions
//   records.jsonl      one RunRecord per generation
//   transcript.jsonl   every model exchange
//   code/<gen>.txt     extracted source of each generated instance

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "ctrlmut/benchsuite.hpp"
#include "ctrlmut/codediff.hpp"
#include "ctrlmut/llmclient.hpp"
#include "ctrlmut/metrics.hpp"
#include "ctrlmut/promptbank.hpp"

namespace ctrlmut {

enum class InstanceStatus { ok, extract_failed, run_failed, timeout };

std::string_view to_string(InstanceStatus s);
InstanceStatus instance_status_from_string(std::string_view s);

struct CodeInstance {
  int instance_id = 0;  // 1-based generation index
  std::optional<int> parent_id;
  SourceText source;
  std::optional<double> requested_rate;
  std::optional<double> delivered_diff;
  std::optional<double> score;
  InstanceStatus status = InstanceStatus::ok;
  std::string error_text;
};

class RatePolicy {
 public:
  enum class Kind { fixed, dynamic };

  static RatePolicy fixed(double rate_percent);
  static RatePolicy dynamic(double beta);
  /// Inverse of to_string(): "fixed:10" or "dynamic:1.5".
  static RatePolicy parse(std::string_view text);

  Kind kind() const { return kind_; }
  /// The fixed rate in percent, or beta for the dynamic policy.
  double value() const { return value_; }
  std::string to_string() const;

 private:
  RatePolicy(Kind kind, double value) : kind_(kind), value_(value) {}
  Kind kind_;
  double value_;
};

struct EvaluationConfig {
  std::vector<FunctionId> functions{all_functions().begin(), all_functions().end()};
  std::size_t dim = 5;
  std::vector<std::uint64_t> instances{1, 2, 3};
  std::size_t repeats = 3;
  std::size_t eval_budget = 1000;
  AoccBounds bounds;
  double candidate_timeout_s = 60.0;
  /// argv of the candidate runner; "{source}" is replaced by the code file path
  /// (appended as the last argument when absent).
  std::vector<std::string> candidate_command;
  std::size_t workers = 1;
};

struct EvolutionConfig {
  std::string run_id = "run";
  RatePolicy rate_policy = RatePolicy::dynamic(1.5);
  std::string prompt_id = "prompt5";
  std::size_t generation_budget = 100;
  EvaluationConfig evaluation;
  std::uint64_t seed = 0;
  std::filesystem::path run_dir;
  /// Extra key/values copied into meta.json (experiment kind, backend, ...).
  nlohmann::json meta_extra = nlohmann::json::object();
};

/// Throws ConfigError.
void validate(const EvolutionConfig& config, const PromptBank& bank);

struct RunRecord {
  std::string run_id;
  int gen = 0;
  std::optional<int> parent_id;
  std::string prompt_id;
  std::optional<double> requested_rate;
  std::optional<double> delivered_diff;
  double score = 0.0;
  bool accepted = false;
  InstanceStatus status = InstanceStatus::ok;
  std::string error_text;
  std::string rate_policy;
  std::uint64_t seed = 0;
  std::size_t out_of_bounds = 0;

  bool operator==(const RunRecord&) const = default;
};

nlohmann::json to_json(const RunRecord& record);
RunRecord run_record_from_json(const nlohmann::json& j);
/// One compact JSON object per line.
std::string to_jsonl_line(const RunRecord& record);
std::vector<RunRecord> read_run_records(const std::filesystem::path& records_file);

struct EvaluationOutcome {
  double score = 0.0;
  InstanceStatus status = InstanceStatus::ok;
  std::string error_text;
  std::size_t out_of_bounds = 0;
};

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual EvaluationOutcome evaluate(const std::filesystem::path& source_file, const SourceText& source,
                                     std::uint64_t seed) = 0;
};

/// Mean AOCC of a candidate program over every (function, instance, repeat)
/// run, each in its own process. Any failed run fails the instance with score 0.
class CandidateEvaluator final : public Evaluator {
 public:
  explicit CandidateEvaluator(EvaluationConfig config);

  EvaluationOutcome evaluate(const std::filesystem::path& source_file, const SourceText& source,
                             std::uint64_t seed) override;

 private:
  EvaluationConfig config_;
};

/// Strict improvement: the child wins only with a higher score. Throws
/// DomainError when either side is unscored.
const CodeInstance& select(const CodeInstance& parent, const CodeInstance& child);

/// [system: task prompt, user: parent source + mutation prompt (+ last error)].
std::vector<ChatMessage> build_mutation_messages(const CodeInstance& parent, const RenderedPrompt& rendered,
                                                 const std::optional<std::string>& last_error);

struct EvolutionResult {
  CodeInstance best;
  std::vector<RunRecord> log;
  std::vector<CodeInstance> instances;
};

using GenerationCallback = std::function<void(const RunRecord&)>;

/// Runs the loop for exactly generation_budget instances and writes the run
/// directory. Throws GenerationAborted if the first instance cannot be
/// produced in three attempts; later failures only score 0.
EvolutionResult evolve(const EvolutionConfig& config, ChatBackend& backend, Evaluator& evaluator,
                       const PromptBank& bank, const GenerationCallback& on_generation = {});

}  // namespace ctrlmut
