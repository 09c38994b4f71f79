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

#include <gtest/gtest.h>

#include <random>
#include <string>

#include "ctrlmut/errors.hpp"
#include "support/helpers.hpp"

namespace ctrlmut {
namespace {

using testing::numbered_source;

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

// Reference texts with the rate written as "X%".
const char* const kRef1 =
    "Now, refine the strategy of the selected solution to improve it. Make sure that you only change X% of the "
    "code.";
const char* const kRef3 =
    "Now, refine the strategy of the selected solution to improve it. Make sure that you only change X% of the "
    "code. This changing rate X% is the mandatory requirement, you cannot change more or less than this rate.";
const char* const kRef5 =
    "Now, refine the strategy of the selected solution to improve it. Make sure that you only change X% of the "
    "code, which means if the code has 100 lines, you can only change X lines, and the rest lines should remain "
    "the same. For this code, it has N lines, so you can only change M lines, the rest K lines should remain the "
    "same. This changing rate X% is the mandatory requirement, you cannot change more or less than this rate.";
const char* const kRef10 =
    "Take this code of an optimization algorithm and adjust it by X% to improve convergence speed. Make sure the "
    "modifications cover a broad spectrum of possible algorithm adjustments, considering changes across "
    "different components without exceeding X% in code difference. Your changes should aim to improve the "
    "algorithm's ability to reach optimal solutions more quickly.";

TEST(BuiltinBank, Contents) {
  const auto bank = builtin_bank();
  EXPECT_EQ(bank.size(), 13u);
  for (int i = 1; i <= 11; ++i) {
    const auto& t = bank.get("prompt" + std::to_string(i));
    EXPECT_EQ(t.kind, PromptKind::mutation);
    if (i != 5) EXPECT_NE(t.body.find("{rate_percent}"), std::string::npos) << i;
  }
  EXPECT_EQ(bank.get("baseline").body, "Either refine or redesign to improve the algorithm.");
  EXPECT_EQ(bank.get("meta").kind, PromptKind::meta);
  EXPECT_THROW(bank.get("prompt12"), ConfigError);
  EXPECT_EQ(bank.find("nope"), nullptr);
}

TEST(BuiltinBank, VerbatimTexts) {
  const auto bank = builtin_bank();
  const auto src = SourceText::normalize(numbered_source(87));
  const std::string x = "20";
  EXPECT_EQ(render(bank.get("prompt1"), 20, src).text, replace_all(kRef1, "X", x));
  EXPECT_EQ(render(bank.get("prompt3"), 20, src).text, replace_all(kRef3, "X", x));
  EXPECT_EQ(render(bank.get("prompt10"), 20, src).text, replace_all(kRef10, "X", x));
  std::string p5 = replace_all(kRef5, "X", x);
  p5 = replace_all(p5, "N lines", "87 lines");
  p5 = replace_all(p5, "M lines", "17 lines");
  p5 = replace_all(p5, "K lines", "70 lines");
  EXPECT_EQ(render(bank.get("prompt5"), 20, src).text, p5);
}

TEST(Render, PromptFiveLineCounts) {
  const auto src = SourceText::normalize(numbered_source(87));
  const auto r = render(builtin_bank().get("prompt5"), 10, src);
  EXPECT_NE(r.text.find("it has 87 lines"), std::string::npos);
  EXPECT_NE(r.text.find("only change 8 lines"), std::string::npos);
  EXPECT_NE(r.text.find("the rest 79 lines"), std::string::npos);
  EXPECT_EQ(r.source_lines, 87u);
  EXPECT_EQ(r.requested_rate, 10.0);
}

TEST(Render, PromptOneSubstitution) {
  const auto r = render(builtin_bank().get("prompt1"), 20, SourceText{});
  EXPECT_NE(r.text.find("20%"), std::string::npos);
  EXPECT_EQ(r.text.find('{'), std::string::npos);
}

TEST(Render, BaselineIgnoresRate) {
  const auto& b = builtin_bank().get("baseline");
  const auto src = SourceText::normalize("a\nb\n");
  EXPECT_EQ(render(b, 2, src).text, render(b, 37.5, src).text);
  EXPECT_EQ(render(b, 2, src).text, b.body);
}

TEST(Render, MetaPromptNamesModel) {
  const auto r = render(builtin_bank().get("meta"), 0.0, SourceText{}, "GPT-4o");
  EXPECT_EQ(r.text.rfind("Now, imagine yourself as a prompt engineer, you give GPT-4o a piece", 0), 0u);
  EXPECT_NE(r.text.find("you want GPT-4o to modify it by x%"), std::string::npos);
}

TEST(Render, Errors) {
  const auto bank = builtin_bank();
  EXPECT_THROW(render(bank.get("prompt5"), 10, SourceText{}), DomainError);
  EXPECT_THROW(render(bank.get("prompt1"), 0, SourceText{}), DomainError);
  EXPECT_THROW(render(bank.get("prompt1"), 100, SourceText{}), DomainError);
  EXPECT_THROW(render(bank.get("prompt1"), -3, SourceText{}), DomainError);
}

TEST(Render, RateFormatting) {
  EXPECT_EQ(format_rate(2.0), "2");
  EXPECT_EQ(format_rate(2.5), "2.5");
  EXPECT_EQ(format_rate(100.0 / 3.0), "33.33");
  EXPECT_EQ(format_rate(40.0), "40");
  EXPECT_EQ(format_rate(0.004), "0");
  const auto r = render(builtin_bank().get("prompt2"), 2, SourceText{});
  EXPECT_NE(r.text.find("change 2% of"), std::string::npos);
  EXPECT_EQ(r.text.find("2.00"), std::string::npos);
}

TEST(Render, PropertiesOverRandomInputs) {
  const auto bank = builtin_bank();
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 300;
    const double rate = std::uniform_real_distribution<double>(0.01, 99.99)(rng);
    const auto src = SourceText::normalize(numbered_source(n));
    for (const auto& t : bank.templates()) {
      if (t.kind != PromptKind::mutation) continue;
      const auto a = render(t, rate, src);
      EXPECT_EQ(a.text, render(t, rate, src).text);
      EXPECT_TRUE(placeholders_in(a.text).empty()) << t.id;
    }
    // Prompt 5: mutate + keep = total.
    const std::size_t mutate = static_cast<std::size_t>(std::floor(n * rate / 100.0 + 1e-9));
    const auto p5 = render(bank.get("prompt5"), rate, src).text;
    EXPECT_NE(p5.find("only change " + std::to_string(mutate) + " lines, the rest " + std::to_string(n - mutate)),
              std::string::npos);
  }
}

TEST(Render, FloorIsExactForIntegerProducts) {
  // n * x / 100 integral: floor must not drop a line to floating error.
  for (std::size_t n = 1; n <= 300; ++n) {
    for (std::size_t k = 1; k <= n; ++k) {
      const double rate = 100.0 * static_cast<double>(k) / static_cast<double>(n);
      if (!(rate < 100.0)) continue;
      const auto text = render(builtin_bank().get("prompt5"), rate, SourceText::normalize(numbered_source(n))).text;
      ASSERT_NE(text.find("only change " + std::to_string(k) + " lines, the rest"), std::string::npos) << n << " "
                                                                                                         << k;
    }
    if (n > 40) n += 20;
  }
}

TEST(PromptBank, RejectsDuplicatesAndUnknownPlaceholders) {
  EXPECT_THROW(PromptBank({{"a", PromptKind::mutation, "x"}, {"a", PromptKind::mutation, "y"}}), ConfigError);
  EXPECT_THROW(PromptBank({{"a", PromptKind::mutation, "change {bogus}"}}), ConfigError);
  EXPECT_NO_THROW(PromptBank({{"a", PromptKind::mutation, "json {\"k\": 1} is fine"}}));
}

TEST(PromptBank, RoundTripsThroughFile) {
  const auto bank = builtin_bank();
  const auto again = PromptBank::parse(bank.serialize());
  ASSERT_EQ(again.size(), bank.size());
  for (std::size_t i = 0; i < bank.size(); ++i) EXPECT_EQ(again.templates()[i], bank.templates()[i]);

  testing::TempDir dir;
  bank.save(dir / "bank.yaml");
  const auto loaded = PromptBank::load(dir / "bank.yaml");
  for (std::size_t i = 0; i < bank.size(); ++i) EXPECT_EQ(loaded.templates()[i], bank.templates()[i]);

  const PromptBank custom({{"multi", PromptKind::mutation, "line one {rate_percent}%\n\n  indented: yes\n#x"}});
  EXPECT_EQ(PromptBank::parse(custom.serialize()).templates()[0], custom.templates()[0]);
}

TEST(PromptBank, ShippedFileMatchesBuiltin) {
  const auto shipped = PromptBank::load(std::string(CTRLMUT_SOURCE_DIR) + "/prompts/builtin.yaml");
  const auto bank = builtin_bank();
  ASSERT_EQ(shipped.size(), bank.size());
  for (std::size_t i = 0; i < bank.size(); ++i) EXPECT_EQ(shipped.templates()[i], bank.templates()[i]);
}

TEST(PromptBank, ParseErrors) {
  EXPECT_THROW(PromptBank::parse("not: [a sequence"), ConfigError);
  EXPECT_THROW(PromptBank::parse("- id: a\n  kind: nonsense\n  body: x\n"), ConfigError);
  EXPECT_THROW(PromptBank::parse("- id: a\n  kind: mutation\n"), ConfigError);
  EXPECT_THROW(PromptBank::load("/nonexistent/bank.yaml"), IoError);
}

TEST(GenerationTemplate, DescribesContract) {
  const auto& g = generation_template();
  EXPECT_EQ(g.kind, PromptKind::generation);
  EXPECT_NE(g.body.find("def optimize(objective, dim, budget, lower, upper, seed)"), std::string::npos);
  EXPECT_TRUE(placeholders_in(g.body).empty());
}

}  // namespace
}  // namespace ctrlmut
