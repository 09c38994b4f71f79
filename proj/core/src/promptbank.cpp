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

#include "ctrlmut/promptbank.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ctrlmut/errors.hpp"

namespace ctrlmut {
namespace {

constexpr std::array<std::string_view, 5> kPlaceholders = {
    "rate_percent", "total_lines", "mutate_lines", "keep_lines", "model_name"};

constexpr std::string_view kRefine =
    "Now, refine the strategy of the selected solution to improve it. "
    "Make sure that you only change {rate_percent}% of the code";
constexpr std::string_view kMandatory =
    "This changing rate {rate_percent}% is the mandatory requirement";
constexpr std::string_view kNoMoreLess = ", you cannot change more or less than this rate.";
constexpr std::string_view kHundredLines =
    ", which means if the code has 100 lines, you can only change {rate_percent} lines, "
    "and the rest lines should remain the same.";

std::vector<PromptTemplate> builtin_templates() {
  const std::string refine(kRefine);
  const std::string mandatory(kMandatory);
  std::vector<PromptTemplate> t;
  t.push_back({"prompt1", PromptKind::mutation, refine + "."});
  t.push_back({"prompt2", PromptKind::mutation, refine + ". " + mandatory + "."});
  t.push_back({"prompt3", PromptKind::mutation,
               refine + ". " + mandatory + std::string(kNoMoreLess)});
  t.push_back({"prompt4", PromptKind::mutation,
               refine + std::string(kHundredLines) + " " + mandatory + std::string(kNoMoreLess)});
  t.push_back({"prompt5", PromptKind::mutation,
               refine + std::string(kHundredLines) +
                   " For this code, it has {total_lines} lines, so you can only change "
                   "{mutate_lines} lines, the rest {keep_lines} lines should remain the same. " +
                   mandatory + std::string(kNoMoreLess)});
  t.push_back({"prompt6", PromptKind::mutation,
               "Adjust the code such that the algorithm's convergence speed is improved, while "
               "ensuring that the changes result in an exact difference of {rate_percent}% "
               "compared to the original code. This difference should reflect the modification "
               "in functionality, not code style or syntax. Feel free to adjust any part of the "
               "algorithm (e.g., initialization, selection, mutation, or other components) to "
               "achieve faster convergence while maintaining the specified code difference."});
  t.push_back({"prompt7", PromptKind::mutation,
               "Modify the optimization algorithm code to improve its performance in terms of "
               "convergence speed. The modification should result in a code difference of "
               "exactly {rate_percent}%. Ensure that the changes are meaningful to enhance "
               "optimization speed without focusing on code efficiency or readability "
               "improvements. Explore any strategy within the algorithm to achieve this, but "
               "keep the difference precisely at the specified percentage."});
  t.push_back({"prompt8", PromptKind::mutation,
               "Please enhance the convergence speed of the optimization algorithm given below "
               "by modifying it. The modifications should introduce a code difference of "
               "precisely {rate_percent}% compared to the original code. Focus on optimizing "
               "the algorithm's behavior rather than its implementation efficiency. You are "
               "free to explore any area of the algorithm's logic, but ensure that the total "
               "code difference remains exactly at {rate_percent}% and is geared toward faster "
               "convergence."});
  t.push_back({"prompt9", PromptKind::mutation,
               "Here's a piece of code for an optimization algorithm. Please modify it by "
               "exactly {rate_percent}% to improve the algorithm's performance in terms of "
               "optimization convergence speed. Focus on introducing meaningful changes that "
               "can potentially enhance its effectiveness, such as exploring alternative "
               "strategies or approaches across any aspect of the algorithm. Keep the "
               "modifications strictly within the specified {rate_percent}% range for code "
               "difference while striving for faster convergence."});
  t.push_back({"prompt10", PromptKind::mutation,
               "Take this code of an optimization algorithm and adjust it by {rate_percent}% "
               "to improve convergence speed. Make sure the modifications cover a broad "
               "spectrum of possible algorithm adjustments, considering changes across "
               "different components without exceeding {rate_percent}% in code difference. "
               "Your changes should aim to improve the algorithm's ability to reach optimal "
               "solutions more quickly."});
  t.push_back({"prompt11", PromptKind::mutation,
               "Please transform this optimization algorithm code by exactly {rate_percent}% "
               "in a way that enhances convergence speed. Keep the code difference precisely at "
               "{rate_percent}%, and focus solely on achieving performance improvements through "
               "algorithmic adjustments across various elements of the code. Avoid focusing on "
               "code efficiency; instead, prioritize exploration of diverse approaches within "
               "the allowed modification percentage."});
  t.push_back({"baseline", PromptKind::mutation,
               "Either refine or redesign to improve the algorithm."});
  t.push_back({"meta", PromptKind::meta,
               "Now, imagine yourself as a prompt engineer, you give {model_name} a piece of "
               "optimization algorithm code, and you want {model_name} to modify it by x% "
               "(where x is a predefined number from 2 to 40, and indicated the code difference "
               "between the new one and the old one) exactly to improve the algorithm "
               "performance (meaning optimization convergence speed, not code efficiency, for "
               "example, by trying different mutation, selection, etc. strategies), what prompt "
               "would you give? Please give me at least 3 examples. Do not propose any specific "
               "directions or elements to change, since we want to cover the whole algorithm "
               "search space."});
  return t;
}

bool is_placeholder_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

std::string strip_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

std::string_view to_string(PromptKind kind) {
  switch (kind) {
    case PromptKind::generation: return "generation";
    case PromptKind::mutation: return "mutation";
    case PromptKind::meta: return "meta";
  }
  return "mutation";
}

PromptKind prompt_kind_from_string(std::string_view s) {
  if (s == "generation") return PromptKind::generation;
  if (s == "mutation") return PromptKind::mutation;
  if (s == "meta") return PromptKind::meta;
  throw ConfigError("unknown prompt kind '" + std::string(s) + "'");
}

std::vector<std::string> placeholders_in(std::string_view body) {
  std::vector<std::string> out;
  for (std::size_t pos = body.find('{'); pos != std::string_view::npos; pos = body.find('{', pos + 1)) {
    std::size_t end = pos + 1;
    while (end < body.size() && is_placeholder_char(body[end])) ++end;
    if (end < body.size() && end > pos + 1 && body[end] == '}') {
      out.emplace_back(body.substr(pos + 1, end - pos - 1));
    }
  }
  return out;
}

bool is_known_placeholder(std::string_view name) {
  return std::find(kPlaceholders.begin(), kPlaceholders.end(), name) != kPlaceholders.end();
}

PromptBank::PromptBank(std::vector<PromptTemplate> templates) : templates_(std::move(templates)) {
  std::set<std::string> seen;
  for (const auto& t : templates_) {
    if (t.id.empty()) throw ConfigError("prompt template with empty id");
    if (!seen.insert(t.id).second) throw ConfigError("duplicate prompt id '" + t.id + "'");
    for (const auto& name : placeholders_in(t.body)) {
      if (!is_known_placeholder(name)) {
        throw ConfigError("prompt '" + t.id + "' uses unknown placeholder {" + name + "}");
      }
    }
  }
}

PromptBank PromptBank::parse(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed prompt file: ") + e.what());
  }
  if (!root.IsSequence()) throw ConfigError("prompt file must be a sequence of templates");
  std::vector<PromptTemplate> templates;
  for (const auto& node : root) {
    if (!node.IsMap() || !node["id"] || !node["kind"] || !node["body"]) {
      throw ConfigError("each prompt record needs id, kind and body");
    }
    templates.push_back({node["id"].as<std::string>(),
                         prompt_kind_from_string(node["kind"].as<std::string>()),
                         strip_trailing_newlines(node["body"].as<std::string>())});
  }
  return PromptBank(std::move(templates));
}

PromptBank PromptBank::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read prompt file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string PromptBank::serialize() const {
  YAML::Emitter out;
  out << YAML::BeginSeq;
  for (const auto& t : templates_) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << t.id;
    out << YAML::Key << "kind" << YAML::Value << std::string(to_string(t.kind));
    out << YAML::Key << "body" << YAML::Value << YAML::Literal << t.body;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  return std::string(out.c_str()) + "\n";
}

void PromptBank::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write prompt file " + path.string());
  out << serialize();
}

const PromptTemplate* PromptBank::find(std::string_view id) const {
  auto it = std::find_if(templates_.begin(), templates_.end(),
                         [&](const PromptTemplate& t) { return t.id == id; });
  return it == templates_.end() ? nullptr : &*it;
}

const PromptTemplate& PromptBank::get(std::string_view id) const {
  if (const auto* t = find(id)) return *t;
  throw ConfigError("unknown prompt id '" + std::string(id) + "'");
}

PromptBank builtin_bank() { return PromptBank(builtin_templates()); }

const PromptTemplate& generation_template() {
  static const PromptTemplate tmpl{
      "generation", PromptKind::generation,
      "You are an expert in designing black-box optimization algorithms. Write a novel "
      "metaheuristic that minimizes a continuous function over the box [lower, upper]^dim "
      "within a fixed budget of function evaluations.\n"
      "\n"
      "Provide a Python module that defines exactly one entry point:\n"
      "\n"
      "    def optimize(objective, dim, budget, lower, upper, seed):\n"
      "\n"
      "objective(x) takes a list of dim floats and returns the function value. Call it at "
      "most budget times; further calls raise an exception that you may catch to stop. "
      "lower and upper are scalar bounds shared by every coordinate. Seed all randomness "
      "with seed. Only the Python standard library, math and numpy may be imported. The "
      "harness records every evaluation, so the return value is ignored.\n"
      "\n"
      "Return the complete code in exactly one fenced code block."};
  return tmpl;
}

std::string format_rate(double rate_percent) {
  std::string s = fmt::format("{:.2f}", rate_percent);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

RenderedPrompt render(const PromptTemplate& tmpl, double rate_percent, const SourceText& source,
                      std::string_view model_name) {
  const auto names = placeholders_in(tmpl.body);
  const bool uses_rate = std::find(names.begin(), names.end(), "rate_percent") != names.end();
  const bool uses_lines = std::any_of(names.begin(), names.end(), [](const std::string& n) {
    return n == "total_lines" || n == "mutate_lines" || n == "keep_lines";
  });
  if (uses_rate && !(rate_percent > 0.0 && rate_percent < 100.0)) {
    throw DomainError("rate_percent must lie in (0, 100), got " + std::to_string(rate_percent));
  }
  if (uses_lines && source.empty()) {
    throw DomainError("prompt '" + tmpl.id + "' needs line counts but the source is empty");
  }

  const std::size_t n = source.line_count();
  // The epsilon absorbs rates like 100*3/87 whose product with n lands just below an integer.
  const auto mutate = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * rate_percent / 100.0 + 1e-9));

  std::string text;
  text.reserve(tmpl.body.size() + 32);
  std::string_view body = tmpl.body;
  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '{') {
      std::size_t end = i + 1;
      while (end < body.size() && is_placeholder_char(body[end])) ++end;
      if (end < body.size() && end > i + 1 && body[end] == '}') {
        const std::string_view name = body.substr(i + 1, end - i - 1);
        if (name == "rate_percent") {
          text += format_rate(rate_percent);
        } else if (name == "total_lines") {
          text += std::to_string(n);
        } else if (name == "mutate_lines") {
          text += std::to_string(mutate);
        } else if (name == "keep_lines") {
          text += std::to_string(n - mutate);
        } else if (name == "model_name") {
          text += model_name;
        } else {
          throw DomainError("unknown placeholder {" + std::string(name) + "} in " + tmpl.id);
        }
        i = end + 1;
        continue;
      }
    }
    text.push_back(body[i]);
    ++i;
  }
  if (!placeholders_in(text).empty()) {
    throw Error("internal error: unresolved placeholder after rendering " + tmpl.id);
  }
  return {std::move(text), rate_percent, n};
}

}  // namespace ctrlmut
