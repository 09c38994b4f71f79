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

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ctrlmut {

/// Identifier of the line normalization and diff rule, written into run metadata.
inline constexpr std::string_view kDiffMethod = "line-lcs;rstrip;drop-blank;comments-kept";

/// Source code as received plus its normalized line view.
///
/// Normalized lines are the raw lines with trailing whitespace removed and
/// lines that end up empty dropped. Comments are kept.
class SourceText {
 public:
  SourceText() = default;

  static SourceText normalize(std::string_view raw);

  const std::string& raw() const { return raw_; }
  const std::vector<std::string>& lines() const { return lines_; }
  std::size_t line_count() const { return lines_.size(); }
  bool empty() const { return lines_.empty(); }

  /// Normalized lines joined with '\n'.
  std::string joined() const;

 private:
  std::string raw_;
  std::vector<std::string> lines_;
};

/// Length of the longest common subsequence of two line sequences.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// Percent of lines changed: 100 * (1 - LCS / max(|parent|, |child|)).
/// Throws DomainError when both sources are empty.
double diff_percent(const SourceText& parent, const SourceText& child);

}  // namespace ctrlmut
