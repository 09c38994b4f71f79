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

// Built-in candidates that speak the ask/tell protocol on a pair of streams.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>

namespace ctrlmut {

/// Candidate side of the wire protocol.
class AskTellClient {
 public:
  struct Init {
    std::size_t dim = 0;
    std::size_t budget = 0;
    double lower = 0.0;
    double upper = 0.0;
    std::uint64_t seed = 0;
  };

  AskTellClient(std::istream& in, std::ostream& out);

  /// Reads the init message. Throws ProtocolError if it is malformed.
  const Init& start();
  /// Sends an ask and returns the told value, or nullopt once the harness stops.
  std::optional<double> ask(std::span<const double> x);
  void done();

  std::size_t evals_left() const { return evals_left_; }

 private:
  std::istream& in_;
  std::ostream& out_;
  Init init_;
  std::size_t evals_left_ = 0;
  bool stopped_ = false;
};

/// Uniform random search over the box until the budget is spent.
int run_random_search(std::istream& in, std::ostream& out);

/// Tunables of the parametric (1+1)-ES candidate.
struct CandidateParams {
  double initial_sigma = 0.3;  // fraction of the box width
  double success_factor = 1.5;
  double failure_factor = 0.9;
  double min_sigma = 1e-9;
  std::size_t init_samples = 10;
  std::size_t restart_patience = 200;

  bool operator==(const CandidateParams&) const = default;
};

/// Reads `NAME = number` lines (INITIAL_SIGMA, SUCCESS_FACTOR, FAILURE_FACTOR,
/// MIN_SIGMA, INIT_SAMPLES, RESTART_PATIENCE). Later lines win, anything else
/// is ignored, and values are clamped into a workable range.
CandidateParams parse_candidate_params(std::string_view source);

/// (1+1)-ES with multiplicative step-size control and restarts.
int run_parametric_candidate(const CandidateParams& params, std::istream& in, std::ostream& out);

}  // namespace ctrlmut
