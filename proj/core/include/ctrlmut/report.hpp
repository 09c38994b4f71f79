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

// Reports are pure functions of the run logs under a runs/ directory.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ctrlmut {

struct MseCell {
  std::optional<double> mse;  // absent when no child delivered a diff
  std::size_t samples = 0;
  std::size_t failed = 0;        // children without a delivered diff
  std::size_t zero_floored = 0;  // delivered diffs of exactly 0
};

struct DiffSample {
  std::string prompt_id;
  double requested_rate = 0.0;
  std::string run_id;
  int gen = 0;
  double delivered_diff = 0.0;
};

struct TracePoint {
  std::string run_id;
  std::string prompt_id;
  int gen = 0;
  std::optional<double> requested_rate;
  std::optional<double> delivered_diff;
};

struct ReportBundle {
  // Fixed-rate runs.
  std::vector<std::string> prompts;
  std::vector<double> rates;
  std::vector<std::vector<MseCell>> mse_grid;  // [prompt][rate]
  std::vector<std::optional<double>> tdw;      // per prompt
  double tdw_beta = 1.5;
  std::vector<DiffSample> diff_scatter;

  // Dynamic-rate runs.
  std::vector<std::string> dynamic_prompts;
  std::size_t generation_budget = 0;
  std::vector<std::vector<double>> convergence_mean;  // [prompt][gen - 1]
  std::vector<std::vector<double>> convergence_std;   // population std across repeats
  std::vector<std::size_t> convergence_runs;          // repeats per prompt
  std::vector<TracePoint> codediff_trace;

  bool has_adherence() const { return !prompts.empty(); }
  bool has_dynamic() const { return !dynamic_prompts.empty(); }
};

/// Reads every <runs_dir>/<run_id>/{meta.json,records.jsonl}.
ReportBundle build_report(const std::filesystem::path& runs_dir);

/// prompt,<rate>...,tdw
std::string mse_grid_csv(const ReportBundle& bundle, bool with_tdw = false);
std::string tdw_csv(const ReportBundle& bundle);
std::string sample_counts_csv(const ReportBundle& bundle);
std::string diff_scatter_csv(const ReportBundle& bundle);
std::string convergence_csv(const ReportBundle& bundle);
std::string codediff_trace_csv(const ReportBundle& bundle);
std::string convergence_svg(const ReportBundle& bundle);

/// Writes the CSVs (and the SVG chart) present in the bundle; returns the paths written.
std::vector<std::filesystem::path> emit_reports(const ReportBundle& bundle, const std::filesystem::path& out_dir);

/// Natural order: "prompt2" < "prompt10".
bool natural_less(const std::string& a, const std::string& b);

}  // namespace ctrlmut
