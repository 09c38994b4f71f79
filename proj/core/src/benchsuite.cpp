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

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>

#include "ctrlmut/errors.hpp"
#include "ctrlmut/powerlaw.hpp"
#include "ctrlmut/seeding.hpp"
#include "ctrlmut/subprocess.hpp"

namespace ctrlmut {
namespace {

constexpr std::array<FunctionId, 6> kAllFunctions = {FunctionId::sphere,     FunctionId::ellipsoid,
                                                     FunctionId::rastrigin,  FunctionId::rosenbrock,
                                                     FunctionId::diff_powers, FunctionId::schaffers};

double sphere(std::span<const double> z) {
  double s = 0.0;
  for (double v : z) s += v * v;
  return s;
}

double ellipsoid(std::span<const double> z) {
  const std::size_t d = z.size();
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double e = d > 1 ? 6.0 * static_cast<double>(i) / static_cast<double>(d - 1) : 0.0;
    s += std::pow(10.0, e) * z[i] * z[i];
  }
  return s;
}

double rastrigin(std::span<const double> z) {
  double cos_sum = 0.0;
  double sq = 0.0;
  for (double v : z) {
    cos_sum += std::cos(2.0 * std::numbers::pi * v);
    sq += v * v;
  }
  return 10.0 * (static_cast<double>(z.size()) - cos_sum) + sq;
}

double rosenbrock(std::span<const double> z) {
  const double scale = std::max(1.0, std::sqrt(static_cast<double>(z.size())) / 8.0);
  std::vector<double> w(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) w[i] = scale * z[i] + 1.0;
  if (w.size() == 1) return (w[0] - 1.0) * (w[0] - 1.0);
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    const double a = w[i] * w[i] - w[i + 1];
    s += 100.0 * a * a + (w[i] - 1.0) * (w[i] - 1.0);
  }
  return s;
}

double diff_powers(std::span<const double> z) {
  const std::size_t d = z.size();
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double e = 2.0 + (d > 1 ? 4.0 * static_cast<double>(i) / static_cast<double>(d - 1) : 0.0);
    s += std::pow(std::abs(z[i]), e);
  }
  return std::sqrt(s);
}

double schaffers(std::span<const double> z) {
  auto term = [](double s) {
    const double r = std::sqrt(s);
    const double sn = std::sin(50.0 * std::pow(s, 0.2));
    return r + r * sn * sn;
  };
  if (z.size() == 1) {
    const double t = term(std::abs(z[0]));
    return t * t;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < z.size(); ++i) acc += term(std::hypot(z[i], z[i + 1]));
  const double m = acc / static_cast<double>(z.size() - 1);
  return m * m;
}

double base_value(FunctionId id, std::span<const double> z) {
  switch (id) {
    case FunctionId::sphere: return sphere(z);
    case FunctionId::ellipsoid: return ellipsoid(z);
    case FunctionId::rastrigin: return rastrigin(z);
    case FunctionId::rosenbrock: return rosenbrock(z);
    case FunctionId::diff_powers: return diff_powers(z);
    case FunctionId::schaffers: return schaffers(z);
  }
  return sphere(z);
}

double seconds_since(Subprocess::Clock::time_point t) {
  return std::chrono::duration<double>(Subprocess::Clock::now() - t).count();
}

}  // namespace

std::string_view to_string(FunctionId id) {
  switch (id) {
    case FunctionId::sphere: return "sphere";
    case FunctionId::ellipsoid: return "ellipsoid";
    case FunctionId::rastrigin: return "rastrigin";
    case FunctionId::rosenbrock: return "rosenbrock";
    case FunctionId::diff_powers: return "diff_powers";
    case FunctionId::schaffers: return "schaffers";
  }
  return "sphere";
}

FunctionId function_from_string(std::string_view name) {
  for (FunctionId id : kAllFunctions) {
    if (to_string(id) == name) return id;
  }
  throw DomainError("unknown benchmark function '" + std::string(name) + "'");
}

std::span<const FunctionId> all_functions() { return kAllFunctions; }

Problem make_problem(FunctionId id, std::size_t dim, std::uint64_t instance_seed) {
  if (dim < 1) throw DomainError("problem dimension must be >= 1");
  Problem p;
  p.id_ = id;
  p.instance_seed_ = instance_seed;
  const std::string dim_label = std::to_string(dim);
  Rng rng(derive_seed(instance_seed, {"problem", to_string(id), dim_label}));
  std::uniform_real_distribution<double> shift(-4.0, 4.0);
  p.x_opt_.resize(dim);
  for (double& v : p.x_opt_) v = shift(rng);
  std::uniform_real_distribution<double> offset(-100.0, 100.0);
  p.f_opt_ = std::round(offset(rng) * 100.0) / 100.0;
  return p;
}

double Problem::evaluate(std::span<const double> x) const {
  if (x.size() != x_opt_.size()) throw DomainError("point dimension does not match the problem");
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - x_opt_[i];
  return f_opt_ + base_value(id_, z);
}

double Problem::precision(std::span<const double> x) const { return std::abs(evaluate(x) - f_opt_); }

BudgetedRun::BudgetedRun(Problem problem, std::size_t budget, AoccBounds bounds) : problem_(std::move(problem)) {
  if (budget == 0) throw DomainError("evaluation budget must be >= 1");
  trace_.budget = budget;
  trace_.bounds = bounds;
  trace_.best_so_far.reserve(budget);
}

double BudgetedRun::evaluate(std::span<const double> x) {
  if (evals_used() >= budget()) throw BudgetExhausted(fmt::format("budget of {} evaluations exhausted", budget()));
  if (x.size() != problem_.dim()) {
    throw ProtocolError(fmt::format("point has {} coordinates, expected {}", x.size(), problem_.dim()));
  }
  bool outside = false;
  for (double v : x) {
    if (!std::isfinite(v)) throw ProtocolError("point has a non-finite coordinate");
    outside = outside || v < kLowerBound || v > kUpperBound;
  }
  if (outside) ++out_of_bounds_;
  const double y = problem_.evaluate(x);
  double prec = std::abs(y - problem_.f_opt());
  if (std::isnan(prec)) prec = std::numeric_limits<double>::infinity();
  if (!trace_.best_so_far.empty()) prec = std::min(prec, trace_.best_so_far.back());
  trace_.best_so_far.push_back(prec);
  return y;
}

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::ok: return "ok";
    case RunStatus::spawn_failed: return "spawn_failed";
    case RunStatus::protocol_error: return "protocol_error";
    case RunStatus::timeout: return "timeout";
    case RunStatus::crashed: return "crashed";
    case RunStatus::candidate_error: return "candidate_error";
    case RunStatus::premature_exit: return "premature_exit";
  }
  return "ok";
}

CandidateRun run_candidate(const std::vector<std::string>& argv, const Problem& problem, std::size_t budget,
                           const CandidateLimits& limits, AoccBounds bounds) {
  using Clock = Subprocess::Clock;
  const auto start = Clock::now();
  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(limits.timeout_s));
  const auto grace = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(limits.stop_grace_s));

  CandidateRun result{BudgetedRun(problem, budget, bounds), RunStatus::ok, {}, 0.0};
  auto fail = [&result](RunStatus s, std::string text) {
    if (result.status == RunStatus::ok) {
      result.status = s;
      result.error_text = std::move(text);
    }
  };

  std::optional<Subprocess> proc;
  try {
    proc.emplace(argv);
  } catch (const IoError& e) {
    fail(RunStatus::spawn_failed, e.what());
    result.wall_s = seconds_since(start);
    return result;
  }

  const nlohmann::json init = {{"type", "init"},         {"dim", problem.dim()},      {"budget", budget},
                               {"lower", kLowerBound},    {"upper", kUpperBound},      {"seed", limits.seed}};
  proc->write_line(init.dump());

  bool finished = false;  // stop sent or done received
  std::string line;
  while (!finished) {
    const auto rs = proc->read_line(line, deadline);
    if (rs == Subprocess::ReadStatus::timeout) {
      fail(RunStatus::timeout, fmt::format("no response within {} s wall clock", limits.timeout_s));
      break;
    }
    if (rs == Subprocess::ReadStatus::eof) {
      fail(RunStatus::premature_exit,
           fmt::format("candidate closed its output after {} of {} evaluations", result.run.evals_used(), budget));
      break;
    }
    nlohmann::json msg;
    try {
      msg = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      fail(RunStatus::protocol_error, "malformed message: " + line.substr(0, 200));
      break;
    }
    const std::string type = msg.is_object() && msg.contains("type") && msg["type"].is_string()
                                 ? msg["type"].get<std::string>()
                                 : std::string();
    if (type == "ask") {
      std::vector<double> x;
      try {
        x = msg.at("x").get<std::vector<double>>();
        const double y = result.run.evaluate(x);
        const double clamped = std::clamp(y, -std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
        const nlohmann::json tell = {{"type", "tell"}, {"y", clamped}, {"evals_left", result.run.evals_left()}};
        proc->write_line(tell.dump());
      } catch (const nlohmann::json::exception&) {
        fail(RunStatus::protocol_error, "ask without a numeric x array");
        break;
      } catch (const ProtocolError& e) {
        fail(RunStatus::protocol_error, e.what());
        break;
      }
      if (result.run.evals_left() == 0) {
        proc->write_line(R"({"type":"stop"})");
        finished = true;
      }
    } else if (type == "done") {
      finished = true;
    } else if (type == "error") {
      fail(RunStatus::candidate_error, "candidate raised: " + msg.value("message", std::string("(no message)")));
      break;
    } else {
      fail(RunStatus::protocol_error, "unknown message type '" + type + "'");
      break;
    }
  }

  proc->close_stdin();
  const bool orderly = result.status == RunStatus::ok || result.status == RunStatus::candidate_error;
  std::optional<Subprocess::ExitStatus> exit;
  if (orderly) exit = proc->wait(Clock::now() + grace);
  if (!exit) {
    proc->kill();
    exit = proc->wait(Clock::now() + std::chrono::seconds(5));
    if (result.status == RunStatus::ok) {
      fail(RunStatus::timeout, fmt::format("candidate did not exit within {} s of stopping", limits.stop_grace_s));
    }
  } else if (result.status == RunStatus::ok && !(exit->exited && exit->code == 0)) {
    fail(RunStatus::crashed, exit->exited ? fmt::format("exit code {}", exit->code)
                                          : fmt::format("killed by signal {}", exit->code));
  }
  if (result.failed() && !proc->stderr_tail().empty()) {
    std::string tail = proc->stderr_tail();
    const auto cut = tail.size() > 300 ? tail.size() - 300 : 0;
    result.error_text += " | stderr: " + tail.substr(cut);
  }
  result.wall_s = seconds_since(start);
  return result;
}

}  // namespace ctrlmut
