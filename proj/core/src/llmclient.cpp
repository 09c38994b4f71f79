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

#include "ctrlmut/llmclient.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>
#include <sstream>
#include <unordered_set>

#include "ctrlmut/errors.hpp"

namespace ctrlmut {
namespace {

constexpr std::string_view kFence = "```";

const std::regex& assignment_re() {
  static const std::regex re(R"(^(\s*)([A-Z][A-Z0-9_]*)\s*=\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*(#.*)?$)");
  return re;
}

std::string fenced(const std::vector<std::string>& lines) {
  std::string out = "Here is the updated algorithm.\n\n```python\n";
  for (const auto& l : lines) {
    out += l;
    out.push_back('\n');
  }
  out += "```\n";
  return out;
}

/// A line absent from `taken`. Assignments of numeric constants keep their
/// name and get a perturbed value, other lines become marker comments.
std::string fresh_line(const std::string& original, std::unordered_set<std::string>& taken, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::smatch m;
  const bool is_assignment = std::regex_match(original, m, assignment_re());
  std::string indent;
  if (is_assignment) {
    indent = m[1].str();
  } else {
    indent = original.substr(0, original.find_first_not_of(" \t"));
    if (indent.size() == original.size()) indent.clear();
  }
  for (;;) {
    const std::uint64_t tag = rng() & 0xffffffffffffULL;
    std::string line;
    if (is_assignment) {
      const double value = std::stod(m[3].str()) * std::exp(0.5 * gauss(rng));
      line = fmt::format("{}{} = {:.6g}  # mutated {:012x}", indent, m[2].str(), value, tag);
    } else {
      line = fmt::format("{}# mutated {:012x}", indent, tag);
    }
    if (taken.insert(line).second) return line;
  }
}

std::string replace_lines(const SourceText& parent, std::size_t k, Rng& rng) {
  const auto& lines = parent.lines();
  std::vector<std::size_t> idx(lines.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first k entries become the chosen positions.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::unordered_set<std::string> taken(lines.begin(), lines.end());
  std::vector<std::string> child = lines;
  for (std::size_t i = 0; i < k; ++i) child[idx[i]] = fresh_line(lines[idx[i]], taken, rng);
  return fenced(child);
}

nlohmann::json messages_json(const std::vector<ChatMessage>& messages) {
  auto arr = nlohmann::json::array();
  for (const auto& m : messages) arr.push_back({{"role", m.role}, {"content", m.content}});
  return arr;
}

}  // namespace

void validate(const ModelConfig& config, bool live) {
  if (!std::isfinite(config.temperature) || config.temperature < 0.0) {
    throw ConfigError("temperature must be finite and >= 0");
  }
  if (config.max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (!(config.timeout_s > 0.0)) throw ConfigError("timeout must be positive");
  if (live && config.endpoint_url.empty()) throw ConfigError("live backend needs an endpoint_url");
  if (live && config.model_name.empty()) throw ConfigError("live backend needs a model name");
}

SourceText extract_code(std::string_view text) {
  std::optional<std::string_view> last;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t open = text.find(kFence, pos);
    if (open == std::string_view::npos) break;
    const std::size_t eol = text.find('\n', open + kFence.size());
    if (eol == std::string_view::npos) break;
    const std::size_t close = text.find(kFence, eol + 1);
    if (close == std::string_view::npos) break;
    last = text.substr(eol + 1, close - eol - 1);
    pos = close + kFence.size();
  }
  if (!last) throw ExtractionError("response contains no fenced code block");
  return SourceText::normalize(*last);
}

std::size_t mock_changed_lines(std::size_t n, double rate_percent) {
  const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(n) * rate_percent / 100.0));
  return std::min(n, std::max<std::size_t>(1, k));
}

std::string mock_mutate(const SourceText& parent, double rate_percent, Rng& rng) {
  if (parent.empty()) throw DomainError("mock_mutate needs a non-empty parent");
  return replace_lines(parent, mock_changed_lines(parent.line_count(), rate_percent), rng);
}

std::string sloppy_mock_mutate(const SourceText& parent, double /*rate_percent*/, Rng& rng) {
  if (parent.empty()) throw DomainError("sloppy_mock_mutate needs a non-empty parent");
  const std::size_t n = parent.line_count();
  const auto lo = static_cast<std::size_t>(std::ceil(0.4 * static_cast<double>(n)));
  const auto hi = static_cast<std::size_t>(std::floor(0.9 * static_cast<double>(n)));
  std::size_t k = lo;
  if (hi > lo) k = std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  k = std::clamp<std::size_t>(k, 1, n);
  return replace_lines(parent, k, rng);
}

const std::string& default_seed_program() {
  static const std::string program = R"(import math
import random

# (1+1) evolution strategy with multiplicative step-size control and restarts.
INITIAL_SIGMA = 0.3
SUCCESS_FACTOR = 1.5
FAILURE_FACTOR = 0.9
MIN_SIGMA = 1e-9
INIT_SAMPLES = 10
RESTART_PATIENCE = 200


def sample_point(rng, dim, lower, upper):
    return [rng.uniform(lower, upper) for _ in range(dim)]


def optimize(objective, dim, budget, lower, upper, seed):
    rng = random.Random(seed)
    width = upper - lower
    best_x, best_f = None, math.inf
    evals = 0
    while evals < min(INIT_SAMPLES, budget):
        x = sample_point(rng, dim, lower, upper)
        f = objective(x)
        evals += 1
        if f < best_f:
            best_x, best_f = x, f
    sigma, stall = INITIAL_SIGMA, 0
    while evals < budget:
        y = [min(upper, max(lower, xi + sigma * width * rng.gauss(0.0, 1.0))) for xi in best_x]
        f = objective(y)
        evals += 1
        if f <= best_f:
            best_x, best_f, stall = y, f, 0
            sigma *= SUCCESS_FACTOR
        else:
            sigma *= FAILURE_FACTOR
            stall += 1
        if (sigma < MIN_SIGMA or stall > RESTART_PATIENCE) and evals < budget:
            best_x = sample_point(rng, dim, lower, upper)
            best_f = objective(best_x)
            evals += 1
            sigma, stall = INITIAL_SIGMA, 0
    return best_x
)";
  return program;
}

MockBackend::MockBackend(Mode mode, std::uint64_t seed, std::string seed_program)
    : mode_(mode), rng_(seed), seed_program_(seed_program.empty() ? default_seed_program() : std::move(seed_program)) {}

std::string MockBackend::model_name() const {
  return mode_ == Mode::exact ? "mock-exact" : "mock-sloppy";
}

ChatExchange MockBackend::complete(const ChatRequest& request) {
  if (request.messages.empty()) throw DomainError("chat request without messages");
  ChatExchange ex;
  ex.request_messages = request.messages;
  ex.backend = "mock";
  if (!request.hint) {
    ex.response_text = "```python\n" + seed_program_ + "```\n";
  } else if (mode_ == Mode::exact) {
    ex.response_text = mock_mutate(request.hint->parent, request.hint->rate_percent, rng_);
  } else {
    ex.response_text = sloppy_mock_mutate(request.hint->parent, request.hint->rate_percent, rng_);
  }
  return ex;
}

ReplayBackend::ReplayBackend(std::vector<ChatExchange> recorded, bool strict)
    : recorded_(std::move(recorded)), strict_(strict) {}

ReplayBackend ReplayBackend::from_file(const std::filesystem::path& transcript, bool strict) {
  return ReplayBackend(read_transcript(transcript), strict);
}

ChatExchange ReplayBackend::complete(const ChatRequest& request) {
  if (cursor_ >= recorded_.size()) {
    throw ReplayExhausted(fmt::format("transcript exhausted after {} exchanges", recorded_.size()));
  }
  const ChatExchange& rec = recorded_[cursor_];
  if (strict_ && rec.request_messages != request.messages) {
    throw ReplayMismatch(fmt::format("request {} differs from the recorded transcript", cursor_));
  }
  ++cursor_;
  ChatExchange ex = rec;
  ex.request_messages = request.messages;
  ex.backend = "replay";
  ex.latency_s = 0.0;
  return ex;
}

nlohmann::json transcript_entry(std::string_view run_id, std::size_t step, std::string_view model,
                                const ChatExchange& exchange) {
  return {
      {"run_id", run_id},
      {"step", step},
      {"backend", exchange.backend},
      {"model", model},
      {"request_messages", messages_json(exchange.request_messages)},
      {"response_text", exchange.response_text},
      {"token_usage",
       {{"prompt_tokens", exchange.token_usage.prompt_tokens},
        {"completion_tokens", exchange.token_usage.completion_tokens},
        {"total_tokens", exchange.token_usage.total_tokens}}},
      {"latency_s", exchange.latency_s},
  };
}

std::vector<ChatExchange> read_transcript(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read transcript " + path.string());
  std::vector<ChatExchange> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ChatExchange ex;
      for (const auto& m : j.at("request_messages")) {
        ex.request_messages.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
      }
      ex.response_text = j.at("response_text").get<std::string>();
      ex.backend = j.at("backend").get<std::string>();
      ex.latency_s = j.value("latency_s", 0.0);
      if (j.contains("token_usage")) {
        const auto& u = j["token_usage"];
        ex.token_usage = {u.value("prompt_tokens", std::int64_t{0}), u.value("completion_tokens", std::int64_t{0}),
                          u.value("total_tokens", std::int64_t{0})};
      }
      out.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(fmt::format("{}:{}: malformed transcript entry: {}", path.string(), lineno, e.what()));
    }
  }
  return out;
}

TranscriptWriter::TranscriptWriter(const std::filesystem::path& path) : out_(path, std::ios::app | std::ios::binary) {
  if (!out_) throw IoError("cannot open transcript " + path.string());
}

void TranscriptWriter::append(std::string_view run_id, std::size_t step, std::string_view model,
                              const ChatExchange& exchange) {
  const std::string line =
      transcript_entry(run_id, step, model, exchange).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  std::lock_guard lock(mu_);
  out_ << line << '\n';
  out_.flush();
}

}  // namespace ctrlmut
