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

// Mutation, generation and meta prompts with placeholder substitution.
//
// Recognized placeholders:
//   {rate_percent}  requested rate, at most two decimals ("2", "3.33")
//   {total_lines}   normalized line count n of the parent source
//   {mutate_lines}  floor(n * rate / 100)
//   {keep_lines}    n - floor(n * rate / 100)
//   {model_name}    target model name (meta prompt)

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctrlmut/codediff.hpp"

namespace ctrlmut {

enum class PromptKind { generation, mutation, meta };

std::string_view to_string(PromptKind kind);
PromptKind prompt_kind_from_string(std::string_view s);

struct PromptTemplate {
  std::string id;
  PromptKind kind = PromptKind::mutation;
  std::string body;

  bool operator==(const PromptTemplate&) const = default;
};

struct RenderedPrompt {
  std::string text;
  double requested_rate = 0.0;
  std::size_t source_lines = 0;
};

/// Names of the `{name}` tokens in `body`, in order of appearance.
std::vector<std::string> placeholders_in(std::string_view body);

bool is_known_placeholder(std::string_view name);

/// Immutable, validated collection of templates with unique ids.
class PromptBank {
 public:
  PromptBank() = default;
  /// Throws ConfigError on duplicate ids or unknown placeholders.
  explicit PromptBank(std::vector<PromptTemplate> templates);

  /// YAML sequence of {id, kind, body} maps.
  static PromptBank parse(std::string_view text);
  static PromptBank load(const std::filesystem::path& path);
  std::string serialize() const;
  void save(const std::filesystem::path& path) const;

  const PromptTemplate* find(std::string_view id) const;
  /// Throws ConfigError if absent.
  const PromptTemplate& get(std::string_view id) const;

  std::span<const PromptTemplate> templates() const { return templates_; }
  std::size_t size() const { return templates_.size(); }

 private:
  std::vector<PromptTemplate> templates_;
};

/// prompt1..prompt11, `baseline` and `meta`.
PromptBank builtin_bank();

/// Task prompt sent as the system message for every request.
const PromptTemplate& generation_template();

/// "2" for 2.0, "3.33" for 3.3333; never more than two decimals.
std::string format_rate(double rate_percent);

RenderedPrompt render(const PromptTemplate& tmpl, double rate_percent, const SourceText& source,
                      std::string_view model_name = {});

}  // namespace ctrlmut
