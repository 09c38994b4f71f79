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

// Discrete power-law distribution of mutation strengths.
//
// A mutation strength alpha is drawn from {1, ..., floor(n/2)} with
// probability C * alpha^-beta, where C normalizes the support. The resulting
// mutation rate is alpha / n, i.e. at most one half of the reference length.

#pragma once

#include <random>
#include <span>
#include <vector>

namespace ctrlmut {

using Rng = std::mt19937_64;

class PowerLawConfig {
 public:
  /// Throws DomainError unless beta > 0 (and finite) and n >= 2.
  PowerLawConfig(double beta, int n);

  double beta() const { return beta_; }
  int n() const { return n_; }
  /// Largest admissible alpha, floor(n / 2).
  int support_size() const { return n_ / 2; }

 private:
  double beta_;
  int n_;
};

/// (sum_{i=1}^{floor(n/2)} i^-beta)^-1
double normalization(const PowerLawConfig& config);

/// Probability of drawing `alpha`. Throws DomainError outside 1..floor(n/2).
double pmf(int alpha, const PowerLawConfig& config);

/// Inverse-CDF sampler over a precomputed cumulative table.
class PowerLawSampler {
 public:
  explicit PowerLawSampler(const PowerLawConfig& config);

  const PowerLawConfig& config() const { return config_; }
  std::span<const double> cdf() const { return cdf_; }

  int sample_alpha(Rng& rng) const;
  /// 100 * alpha / n, in (0, 50].
  double sample_rate_percent(Rng& rng) const;

 private:
  PowerLawConfig config_;
  std::vector<double> cdf_;
};

int sample_alpha(const PowerLawConfig& config, Rng& rng);
double sample_rate_percent(const PowerLawConfig& config, Rng& rng);

}  // namespace ctrlmut
