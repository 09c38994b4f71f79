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

// Mutation engines behind one interface: a chat-completions HTTP client, two
// offline mock mutators and a transcript replayer. Also code extraction from
// model responses and the JSONL transcript log.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctrlmut/codediff.hpp"
#include "ctrlmut/powerlaw.hpp"

namespace ctrlmut {

struct ModelConfig {
  std::string model_name = "gpt-4o-2024-08-06";
  std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
  double temperature = 1.0;
  int max_retries = 3;
  double timeout_s = 120.0;
  /// Name of the environment variable holding the API key. The key itself is never logged.
  std::string api_key_env = "OPENAI_API_KEY";
  double initial_backoff_s = 1.0;
};

/// Throws ConfigError. `live` additionally requires an endpoint.
void validate(const ModelConfig& config, bool live);

struct ChatMessage {
  std::string role;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t total_tokens = 0;
};

/// Side channel for the offline mutators, which cannot parse free-form prompts.
/// Live and replay backends ignore it.
struct MutationHint {
  SourceText parent;
  double rate_percent = 0.0;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  std::optional<MutationHint> hint;  // absent for the initial generation
};

struct ChatExchange {
  std::vector<ChatMessage> request_messages;
  std::string response_text;  // verbatim
  TokenUsage token_usage;
  double latency_s = 0.0;
  std::string backend;  // "live", "mock" or "replay"
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatExchange complete(const ChatRequest& request) = 0;
  virtual std::string_view kind() const = 0;
  virtual std::string model_name() const = 0;
};

/// Deterministic offline stand-in for the model.
///
/// Without a hint it answers with the seed program. With a hint it either
/// rewrites exactly the requested share of lines (exact) or ignores the rate
/// and rewrites 40-90% of them (sloppy).
class MockBackend final : public ChatBackend {
 public:
  enum class Mode { exact, sloppy };

  MockBackend(Mode mode, std::uint64_t seed, std::string seed_program = {});

  ChatExchange complete(const ChatRequest& request) override;
  std::string_view kind() const override { return "mock"; }
  std::string model_name() const override;

 private:
  Mode mode_;
  Rng rng_;
  std::string seed_program_;
};

/// Returns recorded responses in order.
class ReplayBackend final : public ChatBackend {
 public:
  /// With `strict`, a request that differs from the recorded one throws ReplayMismatch.
  explicit ReplayBackend(std::vector<ChatExchange> recorded, bool strict = true);
  static ReplayBackend from_file(const std::filesystem::path& transcript, bool strict = true);

  ChatExchange complete(const ChatRequest& request) override;
  std::string_view kind() const override { return "replay"; }
  std::string model_name() const override { return model_; }
  std::size_t remaining() const { return recorded_.size() - cursor_; }

 private:
  std::vector<ChatExchange> recorded_;
  std::size_t cursor_ = 0;
  bool strict_;
  std::string model_ = "replay";
};

/// Chat-completions client over HTTP+JSON with exponential-backoff retries on
/// connection failures, 429 and 5xx. 401/403 fail immediately with AuthError.
class LiveBackend final : public ChatBackend {
 public:
  explicit LiveBackend(ModelConfig config);

  ChatExchange complete(const ChatRequest& request) override;
  std::string_view kind() const override { return "live"; }
  std::string model_name() const override { return config_.model_name; }

 private:
  ModelConfig config_;
};

/// Contents of the last fenced code block; the language tag is ignored.
/// Throws ExtractionError when there is none.
SourceText extract_code(std::string_view response_text);

/// Lines rewritten by the exact mock: max(1, round(n * rate / 100)), at most n.
std::size_t mock_changed_lines(std::size_t n, double rate_percent);

/// Fenced block holding `parent` with mock_changed_lines() lines replaced by
/// lines that occur nowhere in the parent.
std::string mock_mutate(const SourceText& parent, double rate_percent, Rng& rng);

/// Ignores the rate; replaces a uniformly drawn 40-90% of the lines.
std::string sloppy_mock_mutate(const SourceText& parent, double rate_percent, Rng& rng);

/// Program returned by the mock for the initial generation: a Python (1+1)-ES
/// whose tunable constants the built-in parametric candidate also understands.
const std::string& default_seed_program();

nlohmann::json transcript_entry(std::string_view run_id, std::size_t step, std::string_view model,
                                const ChatExchange& exchange);
std::vector<ChatExchange> read_transcript(const std::filesystem::path& path);

/// Append-only JSONL transcript. Appends from several threads are serialized.
class TranscriptWriter {
 public:
  explicit TranscriptWriter(const std::filesystem::path& path);

  void append(std::string_view run_id, std::size_t step, std::string_view model,
              const ChatExchange& exchange);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

}  // namespace ctrlmut
