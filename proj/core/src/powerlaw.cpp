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

#include "ctrlmut/powerlaw.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ctrlmut/errors.hpp"

namespace ctrlmut {

PowerLawConfig::PowerLawConfig(double beta, int n) : beta_(beta), n_(n) {
  if (!std::isfinite(beta) || beta <= 0.0) {
    throw DomainError("power-law beta must be positive and finite, got " + std::to_string(beta));
  }
  if (n < 2) {
    throw DomainError("power-law reference length n must be >= 2, got " + std::to_string(n));
  }
}

double normalization(const PowerLawConfig& config) {
  // Summing the smallest terms first keeps the rounding error well below 1e-15.
  double sum = 0.0;
  for (int i = config.support_size(); i >= 1; --i) {
    sum += std::pow(static_cast<double>(i), -config.beta());
  }
  return 1.0 / sum;
}

double pmf(int alpha, const PowerLawConfig& config) {
  if (alpha < 1 || alpha > config.support_size()) {
    throw DomainError("alpha " + std::to_string(alpha) + " outside support 1.." +
                      std::to_string(config.support_size()));
  }
  return normalization(config) * std::pow(static_cast<double>(alpha), -config.beta());
}

PowerLawSampler::PowerLawSampler(const PowerLawConfig& config) : config_(config) {
  const double c = normalization(config_);
  cdf_.reserve(static_cast<std::size_t>(config_.support_size()));
  double acc = 0.0;
  for (int alpha = 1; alpha <= config_.support_size(); ++alpha) {
    acc += c * std::pow(static_cast<double>(alpha), -config_.beta());
    cdf_.push_back(acc);
  }
  cdf_.back() = 1.0;
}

int PowerLawSampler::sample_alpha(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto index = std::min<std::ptrdiff_t>(it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size()) - 1);
  return static_cast<int>(index) + 1;
}

double PowerLawSampler::sample_rate_percent(Rng& rng) const {
  return 100.0 * static_cast<double>(sample_alpha(rng)) / static_cast<double>(config_.n());
}

int sample_alpha(const PowerLawConfig& config, Rng& rng) {
  return PowerLawSampler(config).sample_alpha(rng);
}

double sample_rate_percent(const PowerLawConfig& config, Rng& rng) {
  return PowerLawSampler(config).sample_rate_percent(rng);
}

}  // namespace ctrlmut
