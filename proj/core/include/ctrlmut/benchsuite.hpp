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

// Shifted BBOB-style test functions, budgeted evaluation, and the ask/tell
// protocol used to drive candidate optimizers in a child process.
//
// Wire protocol (one JSON object per '\n'-terminated line):
//   harness -> candidate  {"type":"init","dim":D,"budget":B,"lower":-5.0,"upper":5.0,"seed":S}
//   candidate -> harness  {"type":"ask","x":[...]}
//   harness -> candidate  {"type":"tell","y":Y,"evals_left":N}
//   harness -> candidate  {"type":"stop"}           after the last tell
//   candidate -> harness  {"type":"done"}           optional early exit
//   candidate -> harness  {"type":"error","message":"..."}

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctrlmut/metrics.hpp"

namespace ctrlmut {

enum class FunctionId { sphere, ellipsoid, rastrigin, rosenbrock, diff_powers, schaffers };

inline constexpr double kLowerBound = -5.0;
inline constexpr double kUpperBound = 5.0;

std::string_view to_string(FunctionId id);
/// Throws DomainError for unknown names.
FunctionId function_from_string(std::string_view name);
std::span<const FunctionId> all_functions();

/// One shifted problem instance. Immutable once made.
class Problem {
 public:
  FunctionId function_id() const { return id_; }
  std::size_t dim() const { return x_opt_.size(); }
  std::uint64_t instance_seed() const { return instance_seed_; }
  const std::vector<double>& x_opt() const { return x_opt_; }
  double f_opt() const { return f_opt_; }

  /// Raw objective value, f_opt plus the non-negative shifted base function.
  double evaluate(std::span<const double> x) const;
  /// evaluate(x) - f_opt.
  double precision(std::span<const double> x) const;

 private:
  friend Problem make_problem(FunctionId, std::size_t, std::uint64_t);
  FunctionId id_ = FunctionId::sphere;
  std::uint64_t instance_seed_ = 0;
  std::vector<double> x_opt_;
  double f_opt_ = 0.0;
};

/// x_opt uniform in [-4, 4]^dim and f_opt in [-100, 100] (two decimals), both
/// drawn deterministically from (function, dim, instance_seed).
Problem make_problem(FunctionId id, std::size_t dim, std::uint64_t instance_seed);

/// Budget accounting plus best-so-far precision trace. Single owner.
class BudgetedRun {
 public:
  BudgetedRun(Problem problem, std::size_t budget, AoccBounds bounds = {});

  /// Throws BudgetExhausted past the budget and ProtocolError on a
  /// wrong-length or non-finite point. Out-of-box points are evaluated and counted.
  double evaluate(std::span<const double> x);

  const Problem& problem() const { return problem_; }
  std::size_t budget() const { return trace_.budget; }
  std::size_t evals_used() const { return trace_.best_so_far.size(); }
  std::size_t evals_left() const { return budget() - evals_used(); }
  std::size_t out_of_bounds() const { return out_of_bounds_; }
  const EvalTrace& trace() const { return trace_; }

 private:
  Problem problem_;
  EvalTrace trace_;
  std::size_t out_of_bounds_ = 0;
};

enum class RunStatus { ok, spawn_failed, protocol_error, timeout, crashed, candidate_error, premature_exit };

std::string_view to_string(RunStatus s);

struct CandidateRun {
  BudgetedRun run;
  RunStatus status = RunStatus::ok;
  std::string error_text;
  double wall_s = 0.0;

  bool failed() const { return status != RunStatus::ok; }
};

struct CandidateLimits {
  double timeout_s = 60.0;      // wall clock for the whole run
  double stop_grace_s = 5.0;    // time to exit after stop/done
  std::uint64_t seed = 0;       // sent in the init message
};

/// Spawns `argv`, speaks the ask/tell protocol until the budget is spent, the
/// candidate says done, fails, or the wall-clock limit passes. Never throws for
/// candidate misbehaviour; failures are reported through CandidateRun::status.
CandidateRun run_candidate(const std::vector<std::string>& argv, const Problem& problem, std::size_t budget,
                           const CandidateLimits& limits, AoccBounds bounds = {});

}  // namespace ctrlmut
