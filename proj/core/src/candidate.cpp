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

#include "ctrlmut/candidate.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <nlohmann/json.hpp>
#include <ostream>
#include <random>
#include <regex>
#include <string>
#include <vector>

#include "ctrlmut/errors.hpp"
#include "ctrlmut/powerlaw.hpp"

namespace ctrlmut {

AskTellClient::AskTellClient(std::istream& in, std::ostream& out) : in_(in), out_(out) {}

const AskTellClient::Init& AskTellClient::start() {
  std::string line;
  if (!std::getline(in_, line)) throw ProtocolError("no init message");
  try {
    const auto j = nlohmann::json::parse(line);
    if (j.at("type") != "init") throw ProtocolError("first message is not init");
    init_.dim = j.at("dim").get<std::size_t>();
    init_.budget = j.at("budget").get<std::size_t>();
    init_.lower = j.at("lower").get<double>();
    init_.upper = j.at("upper").get<double>();
    init_.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed init message: ") + e.what());
  }
  evals_left_ = init_.budget;
  return init_;
}

std::optional<double> AskTellClient::ask(std::span<const double> x) {
  if (stopped_ || evals_left_ == 0) return std::nullopt;
  out_ << nlohmann::json{{"type", "ask"}, {"x", std::vector<double>(x.begin(), x.end())}}.dump() << '\n';
  out_.flush();
  std::string line;
  while (std::getline(in_, line)) {
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ProtocolError("malformed harness message");
    const std::string type = j.value("type", "");
    if (type == "stop") {
      stopped_ = true;
      return std::nullopt;
    }
    if (type == "tell") {
      evals_left_ = j.value("evals_left", std::size_t{0});
      return j.at("y").get<double>();
    }
    throw ProtocolError("unexpected harness message '" + type + "'");
  }
  stopped_ = true;
  return std::nullopt;
}

void AskTellClient::done() {
  if (stopped_) return;
  out_ << R"({"type":"done"})" << '\n';
  out_.flush();
  stopped_ = true;
}

int run_random_search(std::istream& in, std::ostream& out) {
  AskTellClient client(in, out);
  const auto init = client.start();
  Rng rng(init.seed);
  std::uniform_real_distribution<double> coord(init.lower, init.upper);
  std::vector<double> x(init.dim);
  for (;;) {
    for (double& v : x) v = coord(rng);
    if (!client.ask(x)) break;
  }
  return 0;
}

CandidateParams parse_candidate_params(std::string_view source) {
  static const std::regex re(R"(^\s*([A-Z][A-Z0-9_]*)\s*=\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*(#.*)?$)");
  CandidateParams p;
  std::size_t start = 0;
  while (start <= source.size()) {
    std::size_t end = source.find('\n', start);
    if (end == std::string_view::npos) end = source.size();
    const std::string line(source.substr(start, end - start));
    start = end + 1;
    std::smatch m;
    if (!std::regex_match(line, m, re)) continue;
    const double v = std::strtod(m[2].str().c_str(), nullptr);
    if (!std::isfinite(v)) continue;
    const std::string name = m[1].str();
    auto count = [](double d) { return static_cast<std::size_t>(std::llround(std::clamp(d, 1.0, 1e6))); };
    if (name == "INITIAL_SIGMA") p.initial_sigma = std::clamp(v, 1e-6, 1.0);
    else if (name == "SUCCESS_FACTOR") p.success_factor = std::clamp(v, 1.0, 10.0);
    else if (name == "FAILURE_FACTOR") p.failure_factor = std::clamp(v, 0.01, 1.0);
    else if (name == "MIN_SIGMA") p.min_sigma = std::clamp(v, 0.0, 0.1);
    else if (name == "INIT_SAMPLES") p.init_samples = count(v);
    else if (name == "RESTART_PATIENCE") p.restart_patience = count(v);
  }
  return p;
}

int run_parametric_candidate(const CandidateParams& params, std::istream& in, std::ostream& out) {
  AskTellClient client(in, out);
  const auto init = client.start();
  Rng rng(init.seed);
  std::uniform_real_distribution<double> coord(init.lower, init.upper);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double width = init.upper - init.lower;

  auto random_point = [&] {
    std::vector<double> x(init.dim);
    for (double& v : x) v = coord(rng);
    return x;
  };

  std::vector<double> best_x;
  double best_f = std::numeric_limits<double>::infinity();
  const std::size_t warmup = std::min(params.init_samples, init.budget);
  for (std::size_t i = 0; i < warmup; ++i) {
    auto x = random_point();
    const auto f = client.ask(x);
    if (!f) return 0;
    if (best_x.empty() || *f < best_f) {
      best_x = std::move(x);
      best_f = *f;
    }
  }

  double sigma = params.initial_sigma;
  std::size_t stall = 0;
  std::vector<double> y(init.dim);
  while (client.evals_left() > 0) {
    for (std::size_t i = 0; i < init.dim; ++i) {
      y[i] = std::clamp(best_x[i] + sigma * width * gauss(rng), init.lower, init.upper);
    }
    const auto f = client.ask(y);
    if (!f) break;
    if (*f <= best_f) {
      best_x = y;
      best_f = *f;
      stall = 0;
      sigma = std::min(sigma * params.success_factor, 1e3);
    } else {
      sigma *= params.failure_factor;
      ++stall;
    }
    if ((sigma < params.min_sigma || stall > params.restart_patience) && client.evals_left() > 0) {
      best_x = random_point();
      const auto restart = client.ask(best_x);
      if (!restart) break;
      best_f = *restart;
      sigma = params.initial_sigma;
      stall = 0;
    }
  }
  return 0;
}

}  // namespace ctrlmut
