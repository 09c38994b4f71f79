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

#include "ctrlmut/benchsuite.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "ctrlmut/errors.hpp"
#include "support/helpers.hpp"

namespace ctrlmut {
namespace {

using testing::TempDir;
using testing::write_script;

std::vector<std::string> echo_candidate() { return {testing::cli_path(), "candidate-echo"}; }

TEST(Functions, Names) {
  ASSERT_EQ(all_functions().size(), 6u);
  for (auto f : all_functions()) EXPECT_EQ(function_from_string(to_string(f)), f);
  EXPECT_THROW(function_from_string("griewank"), DomainError);
}

TEST(Problem, DeterministicAndShifted) {
  for (auto f : all_functions()) {
    const auto a = make_problem(f, 5, 7);
    const auto b = make_problem(f, 5, 7);
    EXPECT_EQ(a.x_opt(), b.x_opt());
    EXPECT_EQ(a.f_opt(), b.f_opt());
    for (double v : a.x_opt()) {
      EXPECT_GE(v, -4.0);
      EXPECT_LE(v, 4.0);
    }
    EXPECT_GE(a.f_opt(), -100.0);
    EXPECT_LE(a.f_opt(), 100.0);
    EXPECT_NEAR(a.f_opt() * 100.0, std::round(a.f_opt() * 100.0), 1e-6);
    EXPECT_NE(make_problem(f, 5, 8).x_opt(), a.x_opt());
  }
  EXPECT_NE(make_problem(FunctionId::sphere, 5, 1).x_opt(), make_problem(FunctionId::rastrigin, 5, 1).x_opt());
  EXPECT_THROW(make_problem(FunctionId::sphere, 0, 1), DomainError);
}

TEST(Problem, OptimumHasZeroPrecision) {
  for (auto f : all_functions()) {
    for (std::uint64_t inst : {1u, 2u, 3u}) {
      const auto p = make_problem(f, 5, inst);
      EXPECT_LE(p.precision(p.x_opt()), 1e-12) << to_string(f);
    }
  }
}

TEST(Problem, SpherePrecisionIsSquaredDistance) {
  const auto p = make_problem(FunctionId::sphere, 5, 3);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(5);
    double d = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
      x[k] = u(rng);
      d += (x[k] - p.x_opt()[k]) * (x[k] - p.x_opt()[k]);
    }
    EXPECT_NEAR(p.precision(x), d, 1e-12 * std::max(1.0, d));
  }
}

TEST(Problem, RastriginUnitOffset) {
  const auto p = make_problem(FunctionId::rastrigin, 5, 4);
  auto x = p.x_opt();
  x[0] += 1.0;
  EXPECT_NEAR(p.precision(x), 1.0, 1e-9);
}

TEST(Problem, OptimumIsGlobalOnRandomPoints) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(kLowerBound, kUpperBound);
  for (auto f : all_functions()) {
    const auto p = make_problem(f, 5, 1);
    std::vector<double> x(5);
    for (int i = 0; i < 20000; ++i) {
      for (double& v : x) v = u(rng);
      ASSERT_GE(p.precision(x), 0.0) << to_string(f);
      ASSERT_GE(p.evaluate(x), p.f_opt()) << to_string(f);
    }
  }
}

TEST(Problem, WorksInOneDimension) {
  for (auto f : all_functions()) {
    const auto p = make_problem(f, 1, 2);
    EXPECT_LE(p.precision(p.x_opt()), 1e-12);
    EXPECT_GT(p.precision(std::vector<double>{p.x_opt()[0] + 0.5}), 0.0);
  }
}

TEST(BudgetedRun, TraceAndBudget) {
  BudgetedRun run(make_problem(FunctionId::sphere, 2, 1), 3);
  const auto& xo = run.problem().x_opt();
  run.evaluate(std::vector<double>{xo[0] + 1, xo[1]});
  EXPECT_EQ(run.trace().best_so_far.size(), 1u);
  run.evaluate(std::vector<double>{xo[0] + 3, xo[1]});
  EXPECT_EQ(run.trace().best_so_far[1], run.trace().best_so_far[0]);
  EXPECT_EQ(run.evals_used(), 2u);
  EXPECT_EQ(run.evals_left(), 1u);
  run.evaluate(std::vector<double>{9.0, 0.0});
  EXPECT_EQ(run.out_of_bounds(), 1u);
  EXPECT_THROW(run.evaluate(std::vector<double>{0.0, 0.0}), BudgetExhausted);
  EXPECT_EQ(run.trace().best_so_far.size(), run.evals_used());
}

TEST(BudgetedRun, RejectsBadPoints) {
  BudgetedRun run(make_problem(FunctionId::sphere, 2, 1), 10);
  EXPECT_THROW(run.evaluate(std::vector<double>{0.0}), ProtocolError);
  EXPECT_THROW(run.evaluate(std::vector<double>{0.0, NAN}), ProtocolError);
  EXPECT_THROW(run.evaluate(std::vector<double>{INFINITY, 0.0}), ProtocolError);
  EXPECT_EQ(run.evals_used(), 0u);
  EXPECT_THROW(BudgetedRun(make_problem(FunctionId::sphere, 2, 1), 0), DomainError);
}

TEST(RunCandidate, ReferenceCandidateFillsBudget) {
  const auto problem = make_problem(FunctionId::sphere, 5, 1);
  CandidateLimits limits;
  limits.seed = 42;
  const auto a = run_candidate(echo_candidate(), problem, 200, limits);
  ASSERT_FALSE(a.failed()) << a.error_text;
  EXPECT_EQ(a.run.trace().best_so_far.size(), 200u);
  const auto b = run_candidate(echo_candidate(), problem, 200, limits);
  EXPECT_EQ(a.run.trace().best_so_far, b.run.trace().best_so_far);
  limits.seed = 43;
  EXPECT_NE(run_candidate(echo_candidate(), problem, 200, limits).run.trace().best_so_far,
            a.run.trace().best_so_far);
}

TEST(RunCandidate, MalformedLine) {
  TempDir dir;
  const auto s = write_script(dir / "c.sh", "read init\necho 'this is not json'\n");
  const auto r = run_candidate({s.string()}, make_problem(FunctionId::sphere, 2, 1), 10, {});
  EXPECT_EQ(r.status, RunStatus::protocol_error);
}

TEST(RunCandidate, UnknownTypeAndWrongDimension) {
  TempDir dir;
  auto s = write_script(dir / "a.sh", "read init\necho '{\"type\":\"hello\"}'\n");
  EXPECT_EQ(run_candidate({s.string()}, make_problem(FunctionId::sphere, 2, 1), 10, {}).status,
            RunStatus::protocol_error);
  s = write_script(dir / "b.sh", "read init\necho '{\"type\":\"ask\",\"x\":[1,2,3]}'\nread t\n");
  EXPECT_EQ(run_candidate({s.string()}, make_problem(FunctionId::sphere, 2, 1), 10, {}).status,
            RunStatus::protocol_error);
}

TEST(RunCandidate, ImmediateExitIsPrematureWithEmptyTrace) {
  TempDir dir;
  const auto s = write_script(dir / "c.sh", "exit 0\n");
  const auto r = run_candidate({s.string()}, make_problem(FunctionId::sphere, 2, 1), 10, {});
  EXPECT_EQ(r.status, RunStatus::premature_exit);
  EXPECT_TRUE(r.run.trace().best_so_far.empty());
}

TEST(RunCandidate, ErrorMessage) {
  TempDir dir;
  const auto s = write_script(dir / "c.sh", "read init\necho '{\"type\":\"error\",\"message\":\"boom\"}'\nexit 1\n");
  const auto r = run_candidate({s.string()}, make_problem(FunctionId::sphere, 2, 1), 10, {});
  EXPECT_EQ(r.status, RunStatus::candidate_error);
  EXPECT_NE(r.error_text.find("boom"), std::string::npos);
}

TEST(RunCandidate, EarlyDoneIsFine) {
  TempDir dir;
  const auto s = write_script(dir / "c.sh",
                              "read init\necho '{\"type\":\"ask\",\"x\":[0,0]}'\nread t\necho '{\"type\":\"done\"}'\n");
  const auto r = run_candidate({s.string()}, make_problem(FunctionId::sphere, 2, 1), 10, {});
  EXPECT_FALSE(r.failed()) << r.error_text;
  EXPECT_EQ(r.run.evals_used(), 1u);
}

TEST(RunCandidate, HangIsTimeout) {
  TempDir dir;
  const auto s = write_script(dir / "c.sh", "read init\nsleep 30\n");
  CandidateLimits limits;
  limits.timeout_s = 0.3;
  const auto r = run_candidate({s.string()}, make_problem(FunctionId::sphere, 2, 1), 10, limits);
  EXPECT_EQ(r.status, RunStatus::timeout);
  EXPECT_LT(r.wall_s, 10.0);
}

TEST(RunCandidate, IgnoringStopIsTimeout) {
  TempDir dir;
  const auto s = write_script(dir / "c.sh",
                              "read init\necho '{\"type\":\"ask\",\"x\":[0,0]}'\nread t\nexec sleep 30\n");
  CandidateLimits limits;
  limits.stop_grace_s = 0.2;
  const auto r = run_candidate({s.string()}, make_problem(FunctionId::sphere, 2, 1), 1, limits);
  EXPECT_EQ(r.status, RunStatus::timeout);
  EXPECT_EQ(r.run.evals_used(), 1u);
}

TEST(RunCandidate, NonZeroExitAfterStopIsCrash) {
  TempDir dir;
  const auto s = write_script(dir / "c.sh",
                              "read init\necho '{\"type\":\"ask\",\"x\":[0,0]}'\nread t\necho bad >&2\nexit 4\n");
  const auto r = run_candidate({s.string()}, make_problem(FunctionId::sphere, 2, 1), 1, {});
  EXPECT_EQ(r.status, RunStatus::crashed);
  EXPECT_NE(r.error_text.find("bad"), std::string::npos);
}

TEST(RunCandidate, SpawnFailure) {
  const auto r = run_candidate({"/nonexistent/cand"}, make_problem(FunctionId::sphere, 2, 1), 10, {});
  EXPECT_EQ(r.status, RunStatus::spawn_failed);
}

}  // namespace
}  // namespace ctrlmut

namespace ctrlmut {
namespace {

bool have_python() { return std::system("python3 -c pass >/dev/null 2>&1") == 0; }

std::vector<std::string> shim(const std::filesystem::path& source) {
  return {"python3", std::string(CTRLMUT_SOURCE_DIR) + "/pyshim/ctrlmut_shim.py", source.string()};
}

TEST(PythonShim, ReferenceSourceUsesFullBudget) {
  if (!have_python()) GTEST_SKIP() << "python3 not available";
  const auto r = run_candidate(shim(std::filesystem::path(CTRLMUT_SOURCE_DIR) / "pyshim" / "random_search.py"),
                               make_problem(FunctionId::sphere, 5, 1), 200, {});
  EXPECT_FALSE(r.failed()) << r.error_text;
  EXPECT_EQ(r.run.evals_used(), 200u);
}

TEST(PythonShim, RaisingSourceIsReported) {
  if (!have_python()) GTEST_SKIP() << "python3 not available";
  TempDir dir;
  testing::spit(dir / "bad.py", "def optimize(f, dim, budget, lo, hi, seed):\n    raise RuntimeError('nope')\n");
  const auto r = run_candidate(shim(dir / "bad.py"), make_problem(FunctionId::sphere, 5, 1), 200, {});
  EXPECT_EQ(r.status, RunStatus::candidate_error);
  EXPECT_NE(r.error_text.find("nope"), std::string::npos);
  EXPECT_EQ(r.run.evals_used(), 0u);
}

TEST(PythonShim, MissingEntryPoint) {
  if (!have_python()) GTEST_SKIP() << "python3 not available";
  TempDir dir;
  testing::spit(dir / "none.py", "x = 1\n");
  const auto r = run_candidate(shim(dir / "none.py"), make_problem(FunctionId::sphere, 5, 1), 200, {});
  EXPECT_EQ(r.status, RunStatus::candidate_error);
  EXPECT_EQ(r.run.evals_used(), 0u);
}

}  // namespace
}  // namespace ctrlmut
