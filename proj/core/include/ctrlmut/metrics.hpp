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

// Prompt adherence (log-ratio MSE, target-distribution-weighted score) and
// anytime performance (area over the convergence curve).

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace ctrlmut {

/// Delivered diffs of zero are raised to this many percent before taking logs.
inline constexpr double kZeroDiffFloor = 0.01;
inline constexpr std::string_view kMseLogBase = "e";

struct AdherenceSample {
  double requested_rate = 0.0;          // percent, > 0
  std::vector<double> delivered_diffs;  // percent, >= 0, children only
};

/// Mean of ln^2(d_j / x) over the delivered diffs.
double mse(const AdherenceSample& sample);

struct RateMse {
  double rate = 0.0;
  double mse = 0.0;
};

/// w_i = x_i^-beta / sum_j x_j^-beta. Rates must be distinct and positive.
std::vector<double> tdw_weights(std::span<const double> rates, double beta);

/// (sum_i w_i * mse_i) / M.
double tdw_score(std::span<const RateMse> per_rate, double beta);

struct AoccBounds {
  double lower = 1e-8;
  double upper = 1e2;
};

struct EvalTrace {
  std::vector<double> best_so_far;  // precision |f(x) - f*|, non-increasing
  std::size_t budget = 0;
  AoccBounds bounds;
};

/// Mean over the budget of 1 - clamp(log-scaled precision, 0, 1). A trace
/// shorter than its budget is padded with its final value.
double aocc(const EvalTrace& trace);

double mean_aocc(std::span<const EvalTrace> traces);

}  // namespace ctrlmut
