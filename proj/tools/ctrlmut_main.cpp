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

// ctrlmut command-line tool. Exit codes: 0 success, 1 usage, 2 runtime failure.

#include <fmt/core.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "ctrlmut/candidate.hpp"
#include "ctrlmut/codediff.hpp"
#include "ctrlmut/errors.hpp"
#include "ctrlmut/experiment.hpp"
#include "ctrlmut/llmclient.hpp"
#include "ctrlmut/powerlaw.hpp"
#include "ctrlmut/promptbank.hpp"
#include "ctrlmut/report.hpp"

namespace fs = std::filesystem;
using namespace ctrlmut;

namespace {

constexpr int kUsage = 1;
constexpr int kFailure = 2;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct PlanOverrides {
  std::string config;
  std::optional<std::string> backend;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> budget;
  std::optional<std::string> replay_dir;
  std::optional<std::size_t> workers;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "INI configuration file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--backend", backend, "live, mock, sloppy or replay")
        ->check(CLI::IsMember({"live", "mock", "sloppy", "replay"}));
    cmd->add_option("--out", out, "output directory");
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--budget", budget, "code instances per run")->check(CLI::PositiveNumber);
    cmd->add_option("--replay-dir", replay_dir, "output directory of a recorded experiment");
    cmd->add_option("--workers", workers, "parallel runs")->check(CLI::PositiveNumber);
  }

  ConfigFile load() const {
    ConfigFile cfg = load_config(config);
    auto& plan = cfg.plan;
    if (backend) plan.backend = backend_from_string(*backend);
    if (out) plan.output_dir = *out;
    if (seed) plan.master_seed = *seed;
    if (budget) plan.generation_budget = *budget;
    if (replay_dir) plan.replay_dir = *replay_dir;
    if (workers) plan.run_workers = *workers;
    if (plan.backend == BackendKind::replay && plan.replay_dir.empty()) plan.replay_dir = plan.output_dir;
    // Offline backends produce the parametric seed program, which this binary
    // can execute itself.
    if (plan.evaluation.candidate_command.empty()) {
      if (plan.backend == BackendKind::live) {
        throw ConfigError("evaluation.candidate_command is required with the live backend");
      }
      plan.evaluation.candidate_command = {fs::read_symlink("/proc/self/exe").string(), "candidate-param",
                                           "{source}"};
    }
    validate(plan.model, plan.backend == BackendKind::live);
    return cfg;
  }
};

PromptBank bank_for(const ConfigFile& cfg) {
  return cfg.prompt_file ? PromptBank::load(*cfg.prompt_file) : builtin_bank();
}

int report_outcome(const ExperimentOutcome& outcome, const fs::path& out_dir) {
  std::cout << fmt::format("{} runs completed, {} aborted; reports in {}\n", outcome.runs_completed,
                           outcome.aborted.size(), out_dir.string());
  return outcome.runs_completed == 0 ? kFailure : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rate-controlled LLM mutation for evolving optimizers"};
  app.require_subcommand(1);

  double beta = 1.5;
  int n = 0;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  auto* sample = app.add_subcommand("sample", "Draw mutation rates (percent) from the power law");
  sample->add_option("--beta", beta)->required();
  sample->add_option("--n", n, "parent line count")->required();
  sample->add_option("--count", count)->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed);

  std::string file_a, file_b;
  auto* diff = app.add_subcommand("diff", "Code difference between two files, in percent");
  diff->add_option("file_a", file_a)->required()->check(CLI::ExistingFile);
  diff->add_option("file_b", file_b)->required()->check(CLI::ExistingFile);

  std::string runs_dir, out_dir;
  auto* score = app.add_subcommand("score", "MSE grid with TDW column from run logs");
  score->add_option("--runs", runs_dir, "runs/ directory")->required();
  score->add_option("--out", out_dir, "also write the report CSVs here");

  PlanOverrides evolve_opts;
  std::optional<std::string> run_id, prompt_id, rate_policy;
  auto* evolve = app.add_subcommand("evolve", "One evolution run");
  evolve_opts.attach(evolve);
  evolve->add_option("--run-id", run_id);
  evolve->add_option("--prompt", prompt_id);
  evolve->add_option("--rate-policy", rate_policy, "fixed:X or dynamic:B");

  PlanOverrides adherence_opts;
  auto* adherence = app.add_subcommand("adherence", "Fixed-rate adherence grid");
  adherence_opts.attach(adherence);

  PlanOverrides dynamic_opts;
  auto* dynamic = app.add_subcommand("dynamic", "Dynamic-rate convergence study");
  dynamic_opts.attach(dynamic);

  std::string report_runs, report_out;
  auto* report = app.add_subcommand("report", "Rebuild every report from run logs");
  report->add_option("--runs", report_runs)->required();
  report->add_option("--out", report_out)->required();

  std::string model_name;
  std::string gen_config;
  bool gen_request = false;
  std::string bank_out;
  auto* gen = app.add_subcommand("gen-prompts", "Render the meta-prompt for a model");
  auto* model_opt = gen->add_option("--model", model_name);
  gen->add_option("--write-bank", bank_out, "write the built-in prompt bank to this file")->excludes(model_opt);
  gen->add_option("--config", gen_config, "config with a live [model] section")->check(CLI::ExistingFile);
  gen->add_flag("--request", gen_request, "send the meta-prompt to the live backend");

  app.add_subcommand("candidate-echo", "Reference random-search candidate on stdin/stdout");

  std::string param_source;
  auto* param = app.add_subcommand("candidate-param", "Run the (1+1)-ES parametrized by a seed program");
  param->add_option("source", param_source)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*sample) {
      const PowerLawSampler sampler(PowerLawConfig(beta, n));
      Rng rng(seed);
      for (std::size_t i = 0; i < count; ++i) std::cout << fmt::format("{}\n", sampler.sample_rate_percent(rng));
      return 0;
    }
    if (*diff) {
      const auto a = SourceText::normalize(read_file(file_a));
      const auto b = SourceText::normalize(read_file(file_b));
      std::cout << fmt::format("{}\n", diff_percent(a, b));
      return 0;
    }
    if (*score) {
      const auto bundle = build_report(runs_dir);
      if (!bundle.has_adherence()) throw Error("no fixed-rate runs under " + runs_dir);
      std::cout << mse_grid_csv(bundle, true);
      if (!out_dir.empty()) emit_reports(bundle, out_dir);
      return 0;
    }
    if (*evolve) {
      const ConfigFile cfg = evolve_opts.load();
      SingleRunSettings single = cfg.single;
      if (run_id) single.run_id = *run_id;
      if (prompt_id) single.prompt_id = *prompt_id;
      if (rate_policy) single.rate_policy = RatePolicy::parse(*rate_policy);
      const auto result = run_single(cfg.plan, single, bank_for(cfg), [](const RunRecord& r) {
        std::cerr << fmt::format("gen {:>4}  rate {:>8}  diff {:>8}  score {:.6f}  {}{}\n", r.gen,
                                 r.requested_rate ? fmt::format("{:.3f}", *r.requested_rate) : "-",
                                 r.delivered_diff ? fmt::format("{:.3f}", *r.delivered_diff) : "-", r.score,
                                 to_string(r.status), r.accepted ? "  *" : "");
      });
      std::cout << fmt::format("best instance {} score {}\n", result.best.instance_id,
                               result.best.score.value_or(0.0));
      return 0;
    }
    if (*adherence) {
      ConfigFile cfg = adherence_opts.load();
      cfg.plan.kind = ExperimentKind::adherence;
      return report_outcome(run_adherence(cfg.plan, bank_for(cfg)), cfg.plan.output_dir);
    }
    if (*dynamic) {
      ConfigFile cfg = dynamic_opts.load();
      cfg.plan.kind = ExperimentKind::dynamic;
      return report_outcome(run_dynamic(cfg.plan, bank_for(cfg)), cfg.plan.output_dir);
    }
    if (*report) {
      for (const auto& p : emit_reports(build_report(report_runs), report_out)) std::cout << p.string() << '\n';
      return 0;
    }
    if (*gen) {
      if (!bank_out.empty()) {
        builtin_bank().save(bank_out);
        return 0;
      }
      if (model_name.empty()) {
        std::cerr << "gen-prompts needs --model or --write-bank\n";
        return kUsage;
      }
      const auto rendered = render(builtin_bank().get("meta"), 0.0, SourceText{}, model_name);
      if (!gen_request) {
        std::cout << rendered.text << '\n';
        return 0;
      }
      if (gen_config.empty()) throw ConfigError("--request needs --config with a live model section");
      ExperimentPlan plan = load_config(gen_config).plan;
      if (plan.backend != BackendKind::live) throw ConfigError("--request needs the live backend");
      LiveBackend backend(plan.model);
      const auto ex = backend.complete(ChatRequest{{{"user", rendered.text}}, std::nullopt});
      std::cout << ex.response_text << '\n';
      return 0;
    }
    if (app.got_subcommand("candidate-echo")) return run_random_search(std::cin, std::cout);
    if (*param) return run_parametric_candidate(parse_candidate_params(read_file(param_source)), std::cin, std::cout);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
