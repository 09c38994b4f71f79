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

#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "ctrlmut/benchsuite.hpp"
#include "ctrlmut/codediff.hpp"
#include "ctrlmut/metrics.hpp"
#include "ctrlmut/powerlaw.hpp"

namespace {

using namespace ctrlmut;

SourceText random_source(std::size_t lines, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::string text;
  for (std::size_t i = 0; i < lines; ++i) text += "x" + std::to_string(rng() % (lines / 2 + 1)) + " = 1\n";
  return SourceText::normalize(text);
}

void BM_DiffPercent(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_source(n, 1);
  const auto b = random_source(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(diff_percent(a, b));
}
BENCHMARK(BM_DiffPercent)->Arg(16)->Arg(64)->Arg(256)->Arg(1024);

void BM_PowerLawSample(benchmark::State& state) {
  const PowerLawSampler sampler(PowerLawConfig(1.5, static_cast<int>(state.range(0))));
  Rng rng(7);
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample_rate_percent(rng));
}
BENCHMARK(BM_PowerLawSample)->Arg(40)->Arg(400);

void BM_Aocc(benchmark::State& state) {
  EvalTrace trace;
  trace.budget = static_cast<std::size_t>(state.range(0));
  double v = 1e2;
  for (std::size_t i = 0; i < trace.budget; ++i) trace.best_so_far.push_back(v *= 0.97);
  for (auto _ : state) benchmark::DoNotOptimize(aocc(trace));
}
BENCHMARK(BM_Aocc)->Arg(1000)->Arg(10000);

void BM_FunctionEval(benchmark::State& state) {
  const auto problem = make_problem(static_cast<FunctionId>(state.range(0)), 5, 1);
  std::vector<double> x(5, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(problem.evaluate(x));
}
BENCHMARK(BM_FunctionEval)->DenseRange(0, 5);

}  // namespace

BENCHMARK_MAIN();
