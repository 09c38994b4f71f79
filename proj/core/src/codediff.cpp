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

#include "ctrlmut/codediff.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <unordered_map>

#include "ctrlmut/errors.hpp"

namespace ctrlmut {
namespace {

bool is_trailing_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

}  // namespace

SourceText SourceText::normalize(std::string_view raw) {
  SourceText src;
  src.raw_ = std::string(raw);
  std::size_t start = 0;
  while (start <= raw.size()) {
    std::size_t end = raw.find('\n', start);
    if (end == std::string_view::npos) end = raw.size();
    std::string_view line = raw.substr(start, end - start);
    while (!line.empty() && is_trailing_space(line.back())) line.remove_suffix(1);
    if (!line.empty()) src.lines_.emplace_back(line);
    start = end + 1;
  }
  return src;
}

std::string SourceText::joined() const {
  std::string out;
  for (std::size_t i = 0; i < lines_.size(); ++i) {
    if (i) out.push_back('\n');
    out += lines_[i];
  }
  return out;
}

constexpr std::size_t kSmallLcs = 32;

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  if (a.size() < b.size()) std::swap(a, b);

  if (b.size() < kSmallLcs) {
    std::array<std::size_t, kSmallLcs> prev{}, cur{};
    for (std::size_t i = 1; i <= a.size(); ++i) {
      for (std::size_t j = 1; j <= b.size(); ++j) {
        cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
      }
      std::swap(prev, cur);
    }
    return prev[b.size()];
  }

  // Intern lines so the DP compares integers.
  std::unordered_map<std::string_view, std::uint32_t> ids;
  auto intern = [&ids](std::span<const std::string> seq) {
    std::vector<std::uint32_t> out;
    out.reserve(seq.size());
    for (const auto& s : seq) {
      out.push_back(ids.emplace(s, static_cast<std::uint32_t>(ids.size())).first->second);
    }
    return out;
  };
  const auto ia = intern(a);
  const auto ib = intern(b);

  std::vector<std::size_t> prev(ib.size() + 1, 0), cur(ib.size() + 1, 0);
  for (std::size_t i = 1; i <= ia.size(); ++i) {
    for (std::size_t j = 1; j <= ib.size(); ++j) {
      cur[j] = ia[i - 1] == ib[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[ib.size()];
}

double diff_percent(const SourceText& parent, const SourceText& child) {
  const std::size_t denom = std::max(parent.line_count(), child.line_count());
  if (denom == 0) throw DomainError("diff_percent is undefined for two empty sources");
  const std::size_t common = lcs_length(parent.lines(), child.lines());
  // (100 * changed) / denom, so equal-length inputs give exact multiples of 100/n.
  return 100.0 * static_cast<double>(denom - common) / static_cast<double>(denom);
}

}  // namespace ctrlmut
