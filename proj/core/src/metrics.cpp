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

#include "ctrlmut/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ctrlmut/errors.hpp"

namespace ctrlmut {

double mse(const AdherenceSample& sample) {
  if (!(sample.requested_rate > 0.0) || !std::isfinite(sample.requested_rate)) {
    throw DomainError("requested rate must be positive");
  }
  if (sample.delivered_diffs.empty()) throw DomainError("mse needs at least one delivered diff");
  double sum = 0.0;
  for (double d : sample.delivered_diffs) {
    if (d < 0.0 || !std::isfinite(d)) throw DomainError("delivered diff must be finite and >= 0");
    const double floored = d == 0.0 ? kZeroDiffFloor : d;
    const double r = std::log(floored / sample.requested_rate);
    sum += r * r;
  }
  return sum / static_cast<double>(sample.delivered_diffs.size());
}

std::vector<double> tdw_weights(std::span<const double> rates, double beta) {
  if (rates.empty()) throw DomainError("tdw needs at least one rate");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("tdw beta must be positive");
  std::vector<double> sorted(rates.begin(), rates.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() <= 0.0 || !std::isfinite(sorted.back())) {
    throw DomainError("tdw rates must be positive and finite");
  }
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("tdw rates must be distinct");
  }
  std::vector<double> w;
  w.reserve(rates.size());
  double total = 0.0;
  for (double x : rates) {
    w.push_back(std::pow(x, -beta));
    total += w.back();
  }
  for (double& v : w) v /= total;
  return w;
}

double tdw_score(std::span<const RateMse> per_rate, double beta) {
  std::vector<double> rates;
  rates.reserve(per_rate.size());
  for (const auto& r : per_rate) rates.push_back(r.rate);
  const auto w = tdw_weights(rates, beta);
  double sum = 0.0;
  for (std::size_t i = 0; i < per_rate.size(); ++i) sum += w[i] * per_rate[i].mse;
  return sum / static_cast<double>(per_rate.size());
}

double aocc(const EvalTrace& trace) {
  const auto& ys = trace.best_so_far;
  if (ys.empty()) throw DomainError("aocc of an empty trace");
  if (trace.budget == 0 || ys.size() > trace.budget) {
    throw DomainError("trace length " + std::to_string(ys.size()) + " exceeds budget " +
                      std::to_string(trace.budget));
  }
  const auto [lb, ub] = trace.bounds;
  if (!(lb > 0.0) || !(lb < ub) || !std::isfinite(ub)) {
    throw DomainError("aocc bounds must satisfy 0 < lower < upper");
  }
  const double log_lb = std::log10(lb);
  const double span = std::log10(ub) - log_lb;

  auto step_score = [&](double y) {
    if (std::isnan(y) || y < 0.0) throw DomainError("precision values must be >= 0");
    if (y <= lb) return 1.0;
    if (y >= ub) return 0.0;
    return 1.0 - std::clamp((std::log10(y) - log_lb) / span, 0.0, 1.0);
  };

  double sum = 0.0;
  double prev = ys.front();
  for (double y : ys) {
    if (y > prev) throw DomainError("best-so-far trace must be non-increasing");
    prev = y;
    sum += step_score(y);
  }
  // Accumulate the padding term by term so a padded trace scores bit-identically
  // to the same trace written out in full.
  const double last = step_score(ys.back());
  for (std::size_t i = ys.size(); i < trace.budget; ++i) sum += last;
  return sum / static_cast<double>(trace.budget);
}

double mean_aocc(std::span<const EvalTrace> traces) {
  if (traces.empty()) throw DomainError("mean_aocc of an empty collection");
  const auto& b = traces.front().bounds;
  double sum = 0.0;
  for (const auto& t : traces) {
    if (t.bounds.lower != b.lower || t.bounds.upper != b.upper) {
      throw DomainError("mean_aocc requires identical bounds across traces");
    }
    sum += aocc(t);
  }
  return sum / static_cast<double>(traces.size());
}

}  // namespace ctrlmut
