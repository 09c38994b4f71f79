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

#include "ctrlmut/experiment.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <atomic>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include "ctrlmut/errors.hpp"
#include "ctrlmut/seeding.hpp"

namespace ctrlmut {
namespace fs = std::filesystem;

namespace {

struct RunJob {
  std::string run_id;
  std::string prompt_id;
  RatePolicy policy;
  std::uint64_t seed;
  nlohmann::json meta;
};

void check_plan(const ExperimentPlan& plan, const PromptBank& bank, ExperimentKind expected) {
  if (plan.kind != expected) {
    throw ConfigError(fmt::format("plan kind is {}, expected {}", to_string(plan.kind), to_string(expected)));
  }
  if (plan.prompts.empty()) throw ConfigError("plan has no prompts");
  if (plan.repeats == 0) throw ConfigError("plan has zero repeats");
  for (const auto& p : plan.prompts) bank.get(p);
  if (expected == ExperimentKind::adherence && plan.rates.empty()) throw ConfigError("plan has no rates");
  if (plan.backend == BackendKind::replay && plan.replay_dir.empty()) {
    throw ConfigError("replay backend needs model.replay_dir");
  }
}

EvolutionConfig evolution_config(const ExperimentPlan& plan, const RunJob& job) {
  EvolutionConfig cfg;
  cfg.run_id = job.run_id;
  cfg.rate_policy = job.policy;
  cfg.prompt_id = job.prompt_id;
  cfg.generation_budget = plan.generation_budget;
  cfg.evaluation = plan.evaluation;
  cfg.seed = job.seed;
  cfg.run_dir = plan.output_dir / "runs" / job.run_id;
  cfg.meta_extra = job.meta;
  cfg.meta_extra["backend"] = std::string(to_string(plan.backend));
  cfg.meta_extra["tdw_beta"] = plan.beta;
  return cfg;
}

ExperimentOutcome execute(const ExperimentPlan& plan, const PromptBank& bank, const std::vector<RunJob>& jobs) {
  ExperimentOutcome outcome;
  std::mutex mu;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const RunJob& job = jobs[i];
      try {
        auto backend = make_backend(plan, job.run_id, job.seed);
        CandidateEvaluator evaluator(plan.evaluation);
        evolve(evolution_config(plan, job), *backend, evaluator, bank);
        std::lock_guard lock(mu);
        ++outcome.runs_completed;
      } catch (const Error& e) {
        // Keep partial logs out of the report: a run without a completed
        // records file is not a sample.
        std::error_code ec;
        fs::remove(plan.output_dir / "runs" / job.run_id / "records.jsonl", ec);
        std::lock_guard lock(mu);
        outcome.aborted.push_back(job.run_id + ": " + e.what());
      }
    }
  };

  const std::size_t n_threads = std::clamp<std::size_t>(plan.run_workers, 1, std::max<std::size_t>(jobs.size(), 1));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  std::sort(outcome.aborted.begin(), outcome.aborted.end());
  if (!outcome.aborted.empty()) {
    std::cerr << fmt::format("warning: {} of {} runs aborted and were excluded\n", outcome.aborted.size(),
                             jobs.size());
    for (const auto& a : outcome.aborted) std::cerr << "  " << a << '\n';
  }
  outcome.bundle = build_report(plan.output_dir / "runs");
  emit_reports(outcome.bundle, plan.output_dir);
  return outcome;
}

}  // namespace

std::uint64_t run_seed(std::uint64_t master_seed, std::string_view prompt_id, std::string_view rate_label,
                       std::size_t repeat) {
  return derive_seed(master_seed, {prompt_id, rate_label, std::to_string(repeat)});
}

std::string adherence_run_id(std::string_view prompt_id, double rate, std::size_t repeat) {
  return fmt::format("{}_fixed{}_rep{}", prompt_id, format_rate(rate), repeat);
}

std::string dynamic_run_id(std::string_view prompt_id, std::size_t repeat) {
  return fmt::format("{}_dynamic_rep{}", prompt_id, repeat);
}

std::unique_ptr<ChatBackend> make_backend(const ExperimentPlan& plan, std::string_view run_id, std::uint64_t seed) {
  const std::uint64_t backend_seed = derive_seed(seed, {"backend"});
  switch (plan.backend) {
    case BackendKind::mock:
      return std::make_unique<MockBackend>(MockBackend::Mode::exact, backend_seed);
    case BackendKind::sloppy:
      return std::make_unique<MockBackend>(MockBackend::Mode::sloppy, backend_seed);
    case BackendKind::live:
      return std::make_unique<LiveBackend>(plan.model);
    case BackendKind::replay: {
      const fs::path transcript = plan.replay_dir / "runs" / std::string(run_id) / "transcript.jsonl";
      return std::make_unique<ReplayBackend>(ReplayBackend::from_file(transcript));
    }
  }
  throw ConfigError("unknown backend");
}

ExperimentOutcome run_adherence(const ExperimentPlan& plan, const PromptBank& bank) {
  check_plan(plan, bank, ExperimentKind::adherence);
  std::vector<RunJob> jobs;
  for (std::size_t p = 0; p < plan.prompts.size(); ++p) {
    for (std::size_t r = 0; r < plan.rates.size(); ++r) {
      const double rate = plan.rates[r];
      const auto policy = RatePolicy::fixed(rate);
      for (std::size_t k = 0; k < plan.repeats; ++k) {
        const auto& prompt = plan.prompts[p];
        jobs.push_back({adherence_run_id(prompt, rate, k), prompt, policy,
                        run_seed(plan.master_seed, prompt, format_rate(rate), k),
                        {{"experiment", "adherence"}, {"repeat", k}}});
      }
    }
  }
  return execute(plan, bank, jobs);
}

ExperimentOutcome run_dynamic(const ExperimentPlan& plan, const PromptBank& bank) {
  check_plan(plan, bank, ExperimentKind::dynamic);
  const auto policy = RatePolicy::dynamic(plan.beta);
  std::vector<RunJob> jobs;
  for (const auto& prompt : plan.prompts) {
    for (std::size_t k = 0; k < plan.repeats; ++k) {
      jobs.push_back({dynamic_run_id(prompt, k), prompt, policy, run_seed(plan.master_seed, prompt, "dynamic", k),
                      {{"experiment", "dynamic"}, {"repeat", k}}});
    }
  }
  return execute(plan, bank, jobs);
}

EvolutionResult run_single(const ExperimentPlan& plan, const SingleRunSettings& single, const PromptBank& bank,
                           const GenerationCallback& on_generation) {
  RunJob job{single.run_id, single.prompt_id, single.rate_policy,
             run_seed(plan.master_seed, single.prompt_id, single.rate_policy.to_string(), 0),
             {{"experiment", "single"}, {"repeat", 0}}};
  auto backend = make_backend(plan, job.run_id, job.seed);
  CandidateEvaluator evaluator(plan.evaluation);
  return evolve(evolution_config(plan, job), *backend, evaluator, bank, on_generation);
}

}  // namespace ctrlmut
