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

#include "ctrlmut/evolution.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "ctrlmut/errors.hpp"
#include "ctrlmut/seeding.hpp"

namespace ctrlmut {
namespace {

constexpr int kInitialAttempts = 3;
constexpr std::string_view kInitialRequest = "Generate the initial algorithm.";

std::string one_line(std::string_view text, std::size_t max_len = 240) {
  std::string out;
  for (char c : text) {
    if (out.size() >= max_len) break;
    out.push_back(c == '\n' || c == '\r' || c == '\t' ? ' ' : c);
  }
  return out;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
}

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }
nlohmann::json optional_json(const std::optional<int>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

template <typename T>
std::optional<T> optional_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

std::vector<std::string> command_for(const std::vector<std::string>& tmpl, const std::filesystem::path& source) {
  std::vector<std::string> argv;
  bool substituted = false;
  for (const auto& arg : tmpl) {
    const auto pos = arg.find("{source}");
    if (pos == std::string::npos) {
      argv.push_back(arg);
    } else {
      argv.push_back(arg.substr(0, pos) + source.string() + arg.substr(pos + 8));
      substituted = true;
    }
  }
  if (!substituted) argv.push_back(source.string());
  return argv;
}

nlohmann::json run_meta(const EvolutionConfig& cfg) {
  const auto& ev = cfg.evaluation;
  nlohmann::json functions = nlohmann::json::array();
  for (auto f : ev.functions) functions.push_back(to_string(f));
  nlohmann::json meta = {
      {"run_id", cfg.run_id},
      {"rate_policy", cfg.rate_policy.to_string()},
      {"prompt_id", cfg.prompt_id},
      {"generation_budget", cfg.generation_budget},
      {"seed", cfg.seed},
      {"selection", "(1+1) strict improvement"},
      {"error_feedback", "previous failed child, one line"},
      {"diff_method", kDiffMethod},
      {"mse_log_base", kMseLogBase},
      {"zero_diff_floor", kZeroDiffFloor},
      {"evaluation",
       {{"functions", functions},
        {"dim", ev.dim},
        {"instances", ev.instances},
        {"repeats", ev.repeats},
        {"eval_budget", ev.eval_budget},
        {"aocc_lower", ev.bounds.lower},
        {"aocc_upper", ev.bounds.upper},
        {"candidate_timeout_s", ev.candidate_timeout_s}}},
  };
  for (const auto& [k, v] : cfg.meta_extra.items()) meta[k] = v;
  return meta;
}

}  // namespace

std::string_view to_string(InstanceStatus s) {
  switch (s) {
    case InstanceStatus::ok: return "ok";
    case InstanceStatus::extract_failed: return "extract_failed";
    case InstanceStatus::run_failed: return "run_failed";
    case InstanceStatus::timeout: return "timeout";
  }
  return "ok";
}

InstanceStatus instance_status_from_string(std::string_view s) {
  if (s == "ok") return InstanceStatus::ok;
  if (s == "extract_failed") return InstanceStatus::extract_failed;
  if (s == "run_failed") return InstanceStatus::run_failed;
  if (s == "timeout") return InstanceStatus::timeout;
  throw ConfigError("unknown instance status '" + std::string(s) + "'");
}

RatePolicy RatePolicy::fixed(double rate_percent) {
  if (!(rate_percent > 0.0 && rate_percent < 100.0)) {
    throw ConfigError(fmt::format("fixed mutation rate must lie in (0, 100), got {}", rate_percent));
  }
  return {Kind::fixed, rate_percent};
}

RatePolicy RatePolicy::dynamic(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError(fmt::format("beta must be positive, got {}", beta));
  return {Kind::dynamic, beta};
}

RatePolicy RatePolicy::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ConfigError("rate policy must look like fixed:X or dynamic:B");
  const std::string kind(text.substr(0, colon));
  double v = 0.0;
  try {
    v = std::stod(std::string(text.substr(colon + 1)));
  } catch (const std::exception&) {
    throw ConfigError("bad rate policy value in '" + std::string(text) + "'");
  }
  if (kind == "fixed") return fixed(v);
  if (kind == "dynamic") return dynamic(v);
  throw ConfigError("unknown rate policy '" + kind + "'");
}

std::string RatePolicy::to_string() const {
  return fmt::format("{}:{}", kind_ == Kind::fixed ? "fixed" : "dynamic", value_);
}

void validate(const EvolutionConfig& config, const PromptBank& bank) {
  if (config.generation_budget < 2) throw ConfigError("generation budget must be >= 2");
  if (config.run_id.empty()) throw ConfigError("run id must not be empty");
  if (config.run_dir.empty()) throw ConfigError("run directory must be set");
  const auto& tmpl = bank.get(config.prompt_id);
  if (tmpl.kind != PromptKind::mutation) throw ConfigError("prompt '" + config.prompt_id + "' is not a mutation prompt");
  const auto& ev = config.evaluation;
  if (ev.functions.empty() || ev.instances.empty() || ev.repeats == 0) {
    throw ConfigError("evaluation needs at least one function, instance and repeat");
  }
  if (ev.dim == 0 || ev.eval_budget == 0) throw ConfigError("dimension and evaluation budget must be >= 1");
  if (!(ev.bounds.lower > 0.0 && ev.bounds.lower < ev.bounds.upper)) {
    throw ConfigError("AOCC bounds must satisfy 0 < lower < upper");
  }
}

nlohmann::json to_json(const RunRecord& r) {
  return {
      {"run_id", r.run_id},
      {"gen", r.gen},
      {"parent_id", optional_json(r.parent_id)},
      {"prompt_id", r.prompt_id},
      {"requested_rate", optional_json(r.requested_rate)},
      {"delivered_diff", optional_json(r.delivered_diff)},
      {"score", r.score},
      {"accepted", r.accepted},
      {"status", to_string(r.status)},
      {"error_text", r.error_text},
      {"rate_policy", r.rate_policy},
      {"seed", r.seed},
      {"out_of_bounds", r.out_of_bounds},
  };
}

RunRecord run_record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.run_id = j.at("run_id").get<std::string>();
  r.gen = j.at("gen").get<int>();
  r.parent_id = optional_from<int>(j, "parent_id");
  r.prompt_id = j.at("prompt_id").get<std::string>();
  r.requested_rate = optional_from<double>(j, "requested_rate");
  r.delivered_diff = optional_from<double>(j, "delivered_diff");
  r.score = j.at("score").get<double>();
  r.accepted = j.at("accepted").get<bool>();
  r.status = instance_status_from_string(j.at("status").get<std::string>());
  r.error_text = j.value("error_text", std::string());
  r.rate_policy = j.at("rate_policy").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.out_of_bounds = j.value("out_of_bounds", std::size_t{0});
  return r;
}

std::string to_jsonl_line(const RunRecord& record) {
  return to_json(record).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::vector<RunRecord> read_run_records(const std::filesystem::path& records_file) {
  std::ifstream in(records_file);
  if (!in) throw IoError("cannot read " + records_file.string());
  std::vector<RunRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(run_record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(records_file.string() + ": malformed record: " + e.what());
    }
  }
  return out;
}

CandidateEvaluator::CandidateEvaluator(EvaluationConfig config) : config_(std::move(config)) {
  if (config_.candidate_command.empty()) throw ConfigError("no candidate command configured");
}

EvaluationOutcome CandidateEvaluator::evaluate(const std::filesystem::path& source_file, const SourceText& /*source*/,
                                               std::uint64_t seed) {
  struct Job {
    FunctionId fn;
    std::uint64_t instance;
    std::size_t repeat;
  };
  std::vector<Job> jobs;
  for (auto fn : config_.functions) {
    for (auto inst : config_.instances) {
      for (std::size_t r = 0; r < config_.repeats; ++r) jobs.push_back({fn, inst, r});
    }
  }
  const auto argv = command_for(config_.candidate_command, source_file);
  std::vector<std::optional<CandidateRun>> runs(jobs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      const Problem problem = make_problem(job.fn, config_.dim, job.instance);
      CandidateLimits limits;
      limits.timeout_s = config_.candidate_timeout_s;
      limits.seed = derive_seed(seed, {to_string(job.fn), std::to_string(job.instance), std::to_string(job.repeat)});
      runs[i] = run_candidate(argv, problem, config_.eval_budget, limits, config_.bounds);
    }
  };
  const std::size_t nworkers = std::clamp<std::size_t>(config_.workers, 1, jobs.size());
  if (nworkers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < nworkers; ++w) pool.emplace_back(worker);
  }

  EvaluationOutcome out;
  std::vector<EvalTrace> traces;
  traces.reserve(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const CandidateRun& run = *runs[i];
    out.out_of_bounds += run.run.out_of_bounds();
    if (run.failed() && out.status == InstanceStatus::ok) {
      out.status = run.status == RunStatus::timeout ? InstanceStatus::timeout : InstanceStatus::run_failed;
      out.error_text = fmt::format("{} on {} instance {}: {}", to_string(run.status), to_string(jobs[i].fn),
                                   jobs[i].instance, run.error_text);
    }
    traces.push_back(run.run.trace());
  }
  out.score = out.status == InstanceStatus::ok ? mean_aocc(traces) : 0.0;
  return out;
}

const CodeInstance& select(const CodeInstance& parent, const CodeInstance& child) {
  if (!parent.score || !child.score) throw DomainError("select needs two scored instances");
  return *child.score > *parent.score ? child : parent;
}

std::vector<ChatMessage> build_mutation_messages(const CodeInstance& parent, const RenderedPrompt& rendered,
                                                 const std::optional<std::string>& last_error) {
  std::string user = "The current algorithm:\n```python\n" + parent.source.raw();
  if (!user.empty() && user.back() != '\n') user.push_back('\n');
  user += "```\n\n" + rendered.text;
  if (last_error) user += "\n\nThe previous attempt failed: " + one_line(*last_error);
  return {{"system", generation_template().body}, {"user", std::move(user)}};
}

EvolutionResult evolve(const EvolutionConfig& config, ChatBackend& backend, Evaluator& evaluator,
                       const PromptBank& bank, const GenerationCallback& on_generation) {
  validate(config, bank);
  const PromptTemplate& tmpl = bank.get(config.prompt_id);

  namespace fs = std::filesystem;
  const fs::path code_dir = config.run_dir / "code";
  fs::create_directories(code_dir);
  write_file(config.run_dir / "meta.json", run_meta(config).dump(2) + "\n");
  fs::remove(config.run_dir / "transcript.jsonl");
  TranscriptWriter transcript(config.run_dir / "transcript.jsonl");
  std::ofstream records(config.run_dir / "records.jsonl", std::ios::binary | std::ios::trunc);
  if (!records) throw IoError("cannot write records in " + config.run_dir.string());

  Rng rate_rng(derive_seed(config.seed, {"rate"}));
  const std::string model = backend.model_name();
  std::size_t step = 0;
  EvolutionResult result;

  auto exchange = [&](const ChatRequest& request) {
    ChatExchange ex = backend.complete(request);
    transcript.append(config.run_id, ++step, model, ex);
    return ex;
  };

  auto score_instance = [&](CodeInstance& inst) {
    const fs::path file = code_dir / fmt::format("{}.txt", inst.instance_id);
    write_file(file, inst.source.raw());
    const auto outcome =
        evaluator.evaluate(file, inst.source, derive_seed(config.seed, {"eval", std::to_string(inst.instance_id)}));
    inst.status = outcome.status;
    inst.error_text = outcome.error_text;
    inst.score = outcome.status == InstanceStatus::ok ? outcome.score : 0.0;
    return outcome.out_of_bounds;
  };

  auto emit = [&](const CodeInstance& inst, bool accepted, std::size_t oob) {
    RunRecord rec;
    rec.run_id = config.run_id;
    rec.gen = inst.instance_id;
    rec.parent_id = inst.parent_id;
    rec.prompt_id = config.prompt_id;
    rec.requested_rate = inst.requested_rate;
    rec.delivered_diff = inst.delivered_diff;
    rec.score = inst.score.value_or(0.0);
    rec.accepted = accepted;
    rec.status = inst.status;
    rec.error_text = inst.error_text;
    rec.rate_policy = config.rate_policy.to_string();
    rec.seed = config.seed;
    rec.out_of_bounds = oob;
    records << to_jsonl_line(rec) << '\n';
    records.flush();
    if (on_generation) on_generation(rec);
    result.log.push_back(std::move(rec));
  };

  // Initial instance.
  CodeInstance first;
  first.instance_id = 1;
  {
    std::string last_failure;
    bool extracted = false;
    for (int attempt = 0; attempt < kInitialAttempts && !extracted; ++attempt) {
      ChatRequest request{{{"system", generation_template().body}, {"user", std::string(kInitialRequest)}}, {}};
      try {
        first.source = extract_code(exchange(request).response_text);
        extracted = !first.source.empty();
        if (!extracted) last_failure = "empty code block";
      } catch (const TransportError& e) {
        last_failure = e.what();
      } catch (const ExtractionError& e) {
        last_failure = e.what();
      }
    }
    if (!extracted) {
      throw GenerationAborted(fmt::format("initial generation failed after {} attempts: {}", kInitialAttempts,
                                          last_failure));
    }
  }
  const std::size_t first_oob = score_instance(first);
  emit(first, true, first_oob);
  result.instances.push_back(first);
  CodeInstance incumbent = first;
  std::optional<std::string> last_error;
  if (first.status != InstanceStatus::ok) last_error = fmt::format("{}: {}", to_string(first.status), first.error_text);

  for (std::size_t gen = 2; gen <= config.generation_budget; ++gen) {
    CodeInstance child;
    child.instance_id = static_cast<int>(gen);
    child.parent_id = incumbent.instance_id;
    std::size_t oob = 0;

    std::optional<double> rate;
    if (config.rate_policy.kind() == RatePolicy::Kind::fixed) {
      rate = config.rate_policy.value();
    } else if (incumbent.source.line_count() >= 2) {
      const PowerLawConfig pl(config.rate_policy.value(), static_cast<int>(incumbent.source.line_count()));
      rate = PowerLawSampler(pl).sample_rate_percent(rate_rng);
    }

    if (!rate) {
      child.status = InstanceStatus::extract_failed;
      child.error_text = "parent has fewer than 2 lines; no dynamic rate can be drawn";
      child.score = 0.0;
    } else {
      child.requested_rate = rate;
      const RenderedPrompt rendered = render(tmpl, *rate, incumbent.source, model);
      ChatRequest request{build_mutation_messages(incumbent, rendered, last_error),
                          MutationHint{incumbent.source, *rate}};
      try {
        child.source = extract_code(exchange(request).response_text);
        if (child.source.empty()) throw ExtractionError("empty code block");
      } catch (const TransportError& e) {
        child.status = InstanceStatus::extract_failed;
        child.error_text = std::string("generation failed: ") + e.what();
      } catch (const ExtractionError& e) {
        child.status = InstanceStatus::extract_failed;
        child.error_text = e.what();
      }
      if (child.status == InstanceStatus::ok) {
        child.delivered_diff = diff_percent(incumbent.source, child.source);
        oob = score_instance(child);
      } else {
        child.score = 0.0;
      }
    }

    const bool accepted = &select(incumbent, child) == &child;
    emit(child, accepted, oob);
    last_error.reset();
    if (child.status != InstanceStatus::ok) {
      last_error = fmt::format("{}: {}", to_string(child.status), child.error_text);
    }
    result.instances.push_back(child);
    if (accepted) incumbent = child;
  }

  result.best = incumbent;
  return result;
}

}  // namespace ctrlmut
