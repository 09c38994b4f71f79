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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <set>

#include "ctrlmut/errors.hpp"
#include "ctrlmut/powerlaw.hpp"
#include "support/helpers.hpp"

namespace ctrlmut {
namespace {

using testing::TempDir;

// Scores a source by a hash of its text, so evolution makes progress without
// spawning candidates.
class HashEvaluator final : public Evaluator {
 public:
  EvaluationOutcome evaluate(const std::filesystem::path& file, const SourceText& source, std::uint64_t) override {
    ++calls;
    EXPECT_TRUE(std::filesystem::exists(file));
    EvaluationOutcome out;
    out.score = static_cast<double>(std::hash<std::string>{}(source.raw()) % 10007) / 10007.0;
    return out;
  }
  int calls = 0;
};

class FailingEvaluator final : public Evaluator {
 public:
  EvaluationOutcome evaluate(const std::filesystem::path&, const SourceText&, std::uint64_t) override {
    return {0.7, InstanceStatus::run_failed, "crashed on sphere", 0};
  }
};

// Answers the first request with the seed program, then garbage or failures.
class ScriptedBackend final : public ChatBackend {
 public:
  explicit ScriptedBackend(std::vector<std::function<ChatExchange()>> steps) : steps_(std::move(steps)) {}
  ChatExchange complete(const ChatRequest& request) override {
    requests.push_back(request);
    const auto& step = steps_.at(std::min(cursor_++, steps_.size() - 1));
    return step();
  }
  std::string_view kind() const override { return "mock"; }
  std::string model_name() const override { return "scripted"; }
  std::vector<ChatRequest> requests;

 private:
  std::vector<std::function<ChatExchange()>> steps_;
  std::size_t cursor_ = 0;
};

ChatExchange reply(std::string text) { return ChatExchange{{}, std::move(text), {}, 0.0, "mock"}; }

EvolutionConfig config_for(const TempDir& dir, RatePolicy policy, std::size_t budget = 20) {
  EvolutionConfig c;
  c.run_id = "t";
  c.rate_policy = policy;
  c.generation_budget = budget;
  c.run_dir = dir / "run";
  c.seed = 11;
  return c;
}

TEST(RatePolicy, ParseAndPrint) {
  EXPECT_EQ(RatePolicy::parse("fixed:10").to_string(), "fixed:10");
  EXPECT_EQ(RatePolicy::parse("dynamic:1.5").to_string(), "dynamic:1.5");
  EXPECT_EQ(RatePolicy::parse("fixed:2.5").value(), 2.5);
  EXPECT_EQ(RatePolicy::parse("dynamic:2").kind(), RatePolicy::Kind::dynamic);
  for (const char* bad : {"fixed", "fixed:0", "fixed:100", "dynamic:0", "dynamic:-1", "weird:3", "fixed:abc"}) {
    EXPECT_THROW(RatePolicy::parse(bad), ConfigError) << bad;
  }
}

TEST(Select, StrictImprovement) {
  CodeInstance p, c;
  p.score = 0.5;
  c.score = 0.5;
  EXPECT_EQ(&select(p, c), &p);
  c.score = 0.50001;
  EXPECT_EQ(&select(p, c), &c);
  c.score = 0.1;
  EXPECT_EQ(&select(p, c), &p);
  c.score.reset();
  EXPECT_THROW(select(p, c), DomainError);
}

TEST(MutationMessages, ContainParentPromptAndError) {
  CodeInstance parent;
  parent.source = SourceText::normalize("a = 1\nb = 2");
  const RenderedPrompt rendered{"Change 10% of the code.", 10.0, 2};
  auto msgs = build_mutation_messages(parent, rendered, std::nullopt);
  ASSERT_EQ(msgs.size(), 2u);
  EXPECT_EQ(msgs[0].role, "system");
  EXPECT_EQ(msgs[1].role, "user");
  EXPECT_NE(msgs[1].content.find("a = 1\nb = 2"), std::string::npos);
  EXPECT_NE(msgs[1].content.find("Change 10% of the code."), std::string::npos);
  msgs = build_mutation_messages(parent, rendered, std::string("timeout: no answer\nwithin 60 s"));
  EXPECT_NE(msgs[1].content.find("timeout: no answer within 60 s"), std::string::npos);
}

TEST(RunRecord, JsonRoundTrip) {
  RunRecord r;
  r.run_id = "x";
  r.gen = 4;
  r.parent_id = 2;
  r.prompt_id = "prompt3";
  r.requested_rate = 10;
  r.delivered_diff = 9.5;
  r.score = 0.25;
  r.accepted = true;
  r.status = InstanceStatus::timeout;
  r.error_text = "slow";
  r.rate_policy = "fixed:10";
  r.seed = 1234567890123ULL;
  r.out_of_bounds = 3;
  EXPECT_EQ(run_record_from_json(nlohmann::json::parse(to_jsonl_line(r))), r);
  RunRecord empty;
  empty.rate_policy = "dynamic:1.5";
  EXPECT_EQ(run_record_from_json(to_json(empty)), empty);
}

TEST(Evolve, FixedRateMockDeliversExactly) {
  TempDir dir;
  auto cfg = config_for(dir, RatePolicy::fixed(10));
  MockBackend mock(MockBackend::Mode::exact, 3);
  HashEvaluator eval;
  std::vector<int> seen;
  const auto result = evolve(cfg, mock, eval, builtin_bank(), [&](const RunRecord& r) { seen.push_back(r.gen); });
  ASSERT_EQ(result.log.size(), 20u);
  EXPECT_EQ(eval.calls, 20);
  EXPECT_EQ(seen.size(), 20u);
  double best = -1;
  for (const auto& r : result.log) {
    if (r.gen == 1) {
      EXPECT_FALSE(r.requested_rate);
      EXPECT_TRUE(r.accepted);
    } else {
      ASSERT_TRUE(r.delivered_diff);
      const std::size_t n = result.instances[static_cast<std::size_t>(*r.parent_id - 1)].source.line_count();
      EXPECT_EQ(*r.delivered_diff, 100.0 * static_cast<double>(mock_changed_lines(n, 10)) / static_cast<double>(n));
      EXPECT_EQ(*r.requested_rate, 10.0);
    }
    if (r.accepted) {
      EXPECT_GT(r.score, best);
      best = r.score;
    }
  }
  EXPECT_EQ(*result.best.score, best);
  EXPECT_EQ(read_run_records(cfg.run_dir / "records.jsonl"), result.log);
  EXPECT_EQ(read_transcript(cfg.run_dir / "transcript.jsonl").size(), 20u);
  EXPECT_TRUE(std::filesystem::exists(cfg.run_dir / "code" / "20.txt"));
  const auto meta = nlohmann::json::parse(testing::slurp(cfg.run_dir / "meta.json"));
  EXPECT_EQ(meta["rate_policy"], "fixed:10");
  EXPECT_EQ(meta["generation_budget"], 20);
}

TEST(Evolve, DynamicRatesComeFromTheGrid) {
  TempDir dir;
  auto cfg = config_for(dir, RatePolicy::dynamic(1.5), 40);
  MockBackend mock(MockBackend::Mode::exact, 8);
  HashEvaluator eval;
  const auto result = evolve(cfg, mock, eval, builtin_bank());
  std::set<double> distinct;
  for (const auto& r : result.log) {
    if (r.gen == 1) continue;
    const std::size_t n = result.instances[static_cast<std::size_t>(*r.parent_id - 1)].source.line_count();
    ASSERT_TRUE(r.requested_rate);
    const double alpha = *r.requested_rate * static_cast<double>(n) / 100.0;
    EXPECT_NEAR(alpha, std::round(alpha), 1e-9);
    EXPECT_GE(std::round(alpha), 1.0);
    EXPECT_LE(std::round(alpha), std::floor(static_cast<double>(n) / 2));
    distinct.insert(*r.requested_rate);
  }
  EXPECT_GT(distinct.size(), 1u);
}

TEST(Evolve, FailedChildScoresZeroAndFeedsBackError) {
  TempDir dir;
  auto cfg = config_for(dir, RatePolicy::fixed(20), 4);
  ScriptedBackend backend({[] { return reply("```python\n" + default_seed_program() + "```"); },
                           [] { return reply("no code at all"); },
                           [] { return reply("```python\nx = 2\n```"); }});
  HashEvaluator eval;
  const auto result = evolve(cfg, backend, eval, builtin_bank());
  ASSERT_EQ(result.log.size(), 4u);
  EXPECT_EQ(result.log[1].status, InstanceStatus::extract_failed);
  EXPECT_EQ(result.log[1].score, 0.0);
  EXPECT_FALSE(result.log[1].accepted);
  EXPECT_FALSE(result.log[1].delivered_diff);
  EXPECT_EQ(eval.calls, 3);
  EXPECT_NE(backend.requests[2].messages[1].content.find("previous attempt failed"), std::string::npos);
  EXPECT_EQ(backend.requests[3].messages[1].content.find("previous attempt failed"), std::string::npos);
}

TEST(Evolve, EvaluatorFailureScoresZero) {
  TempDir dir;
  auto cfg = config_for(dir, RatePolicy::fixed(20), 3);
  MockBackend mock(MockBackend::Mode::exact, 1);
  FailingEvaluator eval;
  const auto result = evolve(cfg, mock, eval, builtin_bank());
  for (const auto& r : result.log) {
    EXPECT_EQ(r.status, InstanceStatus::run_failed);
    EXPECT_EQ(r.score, 0.0);
  }
  EXPECT_EQ(result.best.instance_id, 1);
}

TEST(Evolve, TransportErrorsOnChildrenDoNotAbort) {
  TempDir dir;
  auto cfg = config_for(dir, RatePolicy::fixed(20), 3);
  ScriptedBackend backend({[] { return reply("```python\n" + default_seed_program() + "```"); },
                           []() -> ChatExchange { throw TransportError("503"); }});
  HashEvaluator eval;
  const auto result = evolve(cfg, backend, eval, builtin_bank());
  EXPECT_EQ(result.log[2].status, InstanceStatus::extract_failed);
  EXPECT_NE(result.log[2].error_text.find("503"), std::string::npos);
}

TEST(Evolve, InitialFailureAborts) {
  TempDir dir;
  auto cfg = config_for(dir, RatePolicy::fixed(20), 3);
  ScriptedBackend backend({[] { return reply("sorry"); }});
  HashEvaluator eval;
  EXPECT_THROW(evolve(cfg, backend, eval, builtin_bank()), GenerationAborted);
  EXPECT_EQ(backend.requests.size(), 3u);
}

TEST(Evolve, ReplayReproducesTheRun) {
  TempDir dir;
  auto cfg = config_for(dir, RatePolicy::dynamic(1.5), 25);
  MockBackend mock(MockBackend::Mode::sloppy, 4);
  HashEvaluator eval;
  const auto original = evolve(cfg, mock, eval, builtin_bank());

  auto replay_cfg = cfg;
  replay_cfg.run_dir = dir / "replayed";
  auto replay = ReplayBackend::from_file(cfg.run_dir / "transcript.jsonl");
  const auto again = evolve(replay_cfg, replay, eval, builtin_bank());
  EXPECT_EQ(again.log, original.log);
  EXPECT_EQ(replay.remaining(), 0u);
}

TEST(Evolve, Validation) {
  TempDir dir;
  MockBackend mock(MockBackend::Mode::exact, 1);
  HashEvaluator eval;
  auto cfg = config_for(dir, RatePolicy::fixed(10), 1);
  EXPECT_THROW(evolve(cfg, mock, eval, builtin_bank()), ConfigError);
  cfg = config_for(dir, RatePolicy::fixed(10));
  cfg.prompt_id = "meta";
  EXPECT_THROW(evolve(cfg, mock, eval, builtin_bank()), ConfigError);
  cfg = config_for(dir, RatePolicy::fixed(10));
  cfg.evaluation.bounds = {1.0, 0.5};
  EXPECT_THROW(evolve(cfg, mock, eval, builtin_bank()), ConfigError);
  cfg = config_for(dir, RatePolicy::fixed(10));
  cfg.prompt_id = "nope";
  EXPECT_THROW(evolve(cfg, mock, eval, builtin_bank()), Error);
}

TEST(CandidateEvaluator, ScoresTheSeedProgram) {
  TempDir dir;
  EvaluationConfig ev;
  ev.functions = {FunctionId::sphere};
  ev.instances = {1};
  ev.repeats = 2;
  ev.eval_budget = 200;
  ev.candidate_command = {testing::cli_path(), "candidate-param", "{source}"};
  testing::spit(dir / "seed.py", default_seed_program());
  CandidateEvaluator eval(ev);
  const auto source = SourceText::normalize(default_seed_program());
  const auto a = eval.evaluate(dir / "seed.py", source, 3);
  EXPECT_EQ(a.status, InstanceStatus::ok) << a.error_text;
  EXPECT_GT(a.score, 0.0);
  EXPECT_LE(a.score, 1.0);
  EXPECT_EQ(eval.evaluate(dir / "seed.py", source, 3).score, a.score);

  ev.candidate_command = {"/bin/false"};
  const auto bad = CandidateEvaluator(ev).evaluate(dir / "seed.py", source, 3);
  EXPECT_NE(bad.status, InstanceStatus::ok);
  EXPECT_EQ(bad.score, 0.0);
  EXPECT_THROW(CandidateEvaluator(EvaluationConfig{}), ConfigError);
}

}  // namespace
}  // namespace ctrlmut
