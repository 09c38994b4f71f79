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

#include "ctrlmut/report.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ctrlmut/errors.hpp"
#include "ctrlmut/evolution.hpp"
#include "ctrlmut/metrics.hpp"

namespace ctrlmut {
namespace fs = std::filesystem;

namespace {

std::string num(double v) { return fmt::format("{}", v); }

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

struct NaturalLess {
  bool operator()(const std::string& a, const std::string& b) const { return natural_less(a, b); }
};

nlohmann::json read_meta(const fs::path& dir) {
  std::ifstream in(dir / "meta.json", std::ios::binary);
  if (!in) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed " + (dir / "meta.json").string() + ": " + e.what());
  }
}

// Incumbent score after each generation. Selection is strict improvement, so
// the incumbent is the last accepted record.
std::vector<double> incumbent_curve(const std::vector<RunRecord>& records) {
  std::vector<double> curve;
  double inc = 0.0;
  for (const auto& r : records) {
    if (r.accepted) inc = r.score;
    curve.push_back(inc);
  }
  return curve;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const bool da = std::isdigit(static_cast<unsigned char>(a[i])) != 0;
    const bool db = std::isdigit(static_cast<unsigned char>(b[j])) != 0;
    if (da && db) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      auto sa = a.substr(i, ie - i), sb = b.substr(j, je - j);
      sa.erase(0, std::min(sa.find_first_not_of('0'), sa.size()));
      sb.erase(0, std::min(sb.find_first_not_of('0'), sb.size()));
      if (sa.size() != sb.size()) return sa.size() < sb.size();
      if (sa != sb) return sa < sb;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  if (a.size() - i != b.size() - j) return a.size() - i < b.size() - j;
  return a < b;
}

ReportBundle build_report(const fs::path& runs_dir) {
  ReportBundle bundle;
  if (!fs::is_directory(runs_dir)) throw IoError("no runs directory at " + runs_dir.string());

  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(runs_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "records.jsonl")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end(),
            [](const fs::path& a, const fs::path& b) { return natural_less(a.filename().string(), b.filename().string()); });

  std::map<std::string, std::map<double, std::vector<const RunRecord*>>, NaturalLess> fixed;
  std::map<std::string, std::vector<std::vector<double>>, NaturalLess> curves;
  std::vector<std::vector<RunRecord>> storage;
  storage.reserve(dirs.size());
  bool beta_set = false;

  for (const auto& dir : dirs) {
    auto records = read_run_records(dir / "records.jsonl");
    if (records.empty()) continue;
    const auto meta = read_meta(dir);
    const auto policy = RatePolicy::parse(records.front().rate_policy);
    const std::string& prompt = records.front().prompt_id;
    storage.push_back(std::move(records));
    const auto& recs = storage.back();

    if (policy.kind() == RatePolicy::Kind::fixed) {
      if (meta.contains("tdw_beta")) {
        const double beta = meta["tdw_beta"].get<double>();
        if (beta_set && beta != bundle.tdw_beta) throw ConfigError("runs disagree on the TDW beta");
        bundle.tdw_beta = beta;
        beta_set = true;
      }
      auto& cell = fixed[prompt][policy.value()];
      for (const auto& r : recs) {
        if (r.gen >= 2) cell.push_back(&r);
      }
    } else {
      const std::size_t budget = meta.value("generation_budget", recs.size());
      bundle.generation_budget = std::max({bundle.generation_budget, budget, recs.size()});
      curves[prompt].push_back(incumbent_curve(recs));
      for (const auto& r : recs) {
        bundle.codediff_trace.push_back({r.run_id, r.prompt_id, r.gen, r.requested_rate, r.delivered_diff});
      }
    }
  }

  // Adherence grid.
  std::map<double, bool> all_rates;
  for (const auto& [_, by_rate] : fixed) {
    for (const auto& [rate, __] : by_rate) all_rates[rate] = true;
  }
  for (const auto& [rate, _] : all_rates) bundle.rates.push_back(rate);
  for (const auto& [prompt, by_rate] : fixed) {
    bundle.prompts.push_back(prompt);
    std::vector<MseCell> row(bundle.rates.size());
    std::vector<RateMse> defined;
    for (std::size_t c = 0; c < bundle.rates.size(); ++c) {
      const double rate = bundle.rates[c];
      auto it = by_rate.find(rate);
      if (it == by_rate.end()) continue;
      MseCell& cell = row[c];
      AdherenceSample sample{rate, {}};
      for (const RunRecord* r : it->second) {
        if (!r->delivered_diff) {
          ++cell.failed;
          continue;
        }
        sample.delivered_diffs.push_back(*r->delivered_diff);
        bundle.diff_scatter.push_back({prompt, rate, r->run_id, r->gen, *r->delivered_diff});
        if (*r->delivered_diff == 0.0) ++cell.zero_floored;
      }
      cell.samples = sample.delivered_diffs.size();
      if (cell.samples > 0) {
        cell.mse = mse(sample);
        defined.push_back({rate, *cell.mse});
      }
    }
    bundle.mse_grid.push_back(std::move(row));
    bundle.tdw.push_back(defined.empty() ? std::nullopt : std::optional<double>(tdw_score(defined, bundle.tdw_beta)));
  }

  // Convergence, padded with the final incumbent for short runs.
  for (auto& [prompt, runs] : curves) {
    bundle.dynamic_prompts.push_back(prompt);
    const std::size_t n = bundle.generation_budget;
    std::vector<double> mean(n, 0.0), sd(n, 0.0);
    for (auto& c : runs) c.resize(n, c.empty() ? 0.0 : c.back());
    for (std::size_t g = 0; g < n; ++g) {
      double s = 0.0;
      for (const auto& c : runs) s += c[g];
      mean[g] = s / static_cast<double>(runs.size());
      double v = 0.0;
      for (const auto& c : runs) v += (c[g] - mean[g]) * (c[g] - mean[g]);
      sd[g] = std::sqrt(v / static_cast<double>(runs.size()));
    }
    bundle.convergence_mean.push_back(std::move(mean));
    bundle.convergence_std.push_back(std::move(sd));
    bundle.convergence_runs.push_back(runs.size());
  }
  return bundle;
}

std::string mse_grid_csv(const ReportBundle& b, bool with_tdw) {
  std::string out = "prompt";
  for (double r : b.rates) out += "," + num(r);
  if (with_tdw) out += ",tdw";
  out += "\n";
  for (std::size_t p = 0; p < b.prompts.size(); ++p) {
    out += b.prompts[p];
    for (const auto& cell : b.mse_grid[p]) out += "," + opt_num(cell.mse);
    if (with_tdw) out += "," + opt_num(b.tdw[p]);
    out += "\n";
  }
  return out;
}

std::string tdw_csv(const ReportBundle& b) {
  std::string out = "prompt,tdw,beta\n";
  for (std::size_t p = 0; p < b.prompts.size(); ++p) {
    out += fmt::format("{},{},{}\n", b.prompts[p], opt_num(b.tdw[p]), num(b.tdw_beta));
  }
  return out;
}

std::string sample_counts_csv(const ReportBundle& b) {
  std::string out = "prompt,rate,samples,failed,zero_floored\n";
  for (std::size_t p = 0; p < b.prompts.size(); ++p) {
    for (std::size_t r = 0; r < b.rates.size(); ++r) {
      const auto& c = b.mse_grid[p][r];
      out += fmt::format("{},{},{},{},{}\n", b.prompts[p], num(b.rates[r]), c.samples, c.failed, c.zero_floored);
    }
  }
  return out;
}

std::string diff_scatter_csv(const ReportBundle& b) {
  std::string out = "prompt,rate,run_id,gen,delivered_diff,ratio\n";
  for (const auto& s : b.diff_scatter) {
    out += fmt::format("{},{},{},{},{},{}\n", s.prompt_id, num(s.requested_rate), s.run_id, s.gen,
                       num(s.delivered_diff), num(s.delivered_diff / s.requested_rate));
  }
  return out;
}

std::string convergence_csv(const ReportBundle& b) {
  std::string out = "gen";
  for (const auto& p : b.dynamic_prompts) out += fmt::format(",{0}_mean,{0}_std", p);
  out += "\n";
  for (std::size_t g = 0; g < b.generation_budget; ++g) {
    out += std::to_string(g + 1);
    for (std::size_t p = 0; p < b.dynamic_prompts.size(); ++p) {
      out += "," + num(b.convergence_mean[p][g]) + "," + num(b.convergence_std[p][g]);
    }
    out += "\n";
  }
  return out;
}

std::string codediff_trace_csv(const ReportBundle& b) {
  std::string out = "run_id,prompt,gen,requested_rate,delivered_diff\n";
  for (const auto& t : b.codediff_trace) {
    out += fmt::format("{},{},{},{},{}\n", t.run_id, t.prompt_id, t.gen, opt_num(t.requested_rate),
                       opt_num(t.delivered_diff));
  }
  return out;
}

std::string convergence_svg(const ReportBundle& b) {
  constexpr double W = 720, H = 420, L = 60, R = 160, T = 30, B = 50;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
                                  "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const std::size_t n = b.generation_budget;
  double lo = 0.0, hi = 1e-9;
  for (std::size_t p = 0; p < b.dynamic_prompts.size(); ++p) {
    for (std::size_t g = 0; g < n; ++g) {
      lo = std::min(lo, b.convergence_mean[p][g] - b.convergence_std[p][g]);
      hi = std::max(hi, b.convergence_mean[p][g] + b.convergence_std[p][g]);
    }
  }
  hi += 0.05 * (hi - lo);
  auto px = [&](std::size_t g) { return L + (n > 1 ? (W - L - R) * static_cast<double>(g) / (n - 1) : 0.0); };
  auto py = [&](double v) { return T + (H - T - B) * (hi - v) / (hi - lo); };

  std::ostringstream s;
  s << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">)", W, H,
                   W, H)
    << "\n";
  s << fmt::format(R"(<rect width="{}" height="{}" fill="white"/>)", W, H) << "\n";
  s << fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>)", L, H - B, W - R, H - B) << "\n";
  s << fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>)", L, T, L, H - B) << "\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    s << fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="11" text-anchor="end">{:.3g}</text>)", L - 6,
                     py(v) + 4, v)
      << "\n";
  }
  for (std::size_t i = 0; i <= 4 && n > 0; ++i) {
    const std::size_t g = (n - 1) * i / 4;
    s << fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="11" text-anchor="middle">{}</text>)", px(g),
                     H - B + 16, g + 1)
      << "\n";
  }
  s << fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="12" text-anchor="middle">generation</text>)",
                   (L + W - R) / 2, H - 12)
    << "\n";
  s << fmt::format(
           R"svg(<text x="14" y="{:.2f}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.2f})">best-so-far score</text>)svg",
           (T + H - B) / 2, (T + H - B) / 2)
    << "\n";

  for (std::size_t p = 0; p < b.dynamic_prompts.size(); ++p) {
    const char* color = kColors[p % std::size(kColors)];
    const auto& m = b.convergence_mean[p];
    const auto& sd = b.convergence_std[p];
    std::string band, line;
    for (std::size_t g = 0; g < n; ++g) band += fmt::format("{:.2f},{:.2f} ", px(g), py(m[g] + sd[g]));
    for (std::size_t g = n; g-- > 0;) band += fmt::format("{:.2f},{:.2f} ", px(g), py(m[g] - sd[g]));
    for (std::size_t g = 0; g < n; ++g) line += fmt::format("{:.2f},{:.2f} ", px(g), py(m[g]));
    if (!band.empty()) band.pop_back();
    if (!line.empty()) line.pop_back();
    s << fmt::format(R"(<polygon points="{}" fill="{}" fill-opacity="0.2" stroke="none"/>)", band, color) << "\n";
    s << fmt::format(R"(<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>)", line, color) << "\n";
    const double ly = T + 16.0 * static_cast<double>(p);
    s << fmt::format(R"(<line x1="{:.2f}" y1="{:.2f}" x2="{:.2f}" y2="{:.2f}" stroke="{}" stroke-width="2"/>)",
                     W - R + 12, ly, W - R + 32, ly, color)
      << "\n";
    s << fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="11">{} (n={})</text>)", W - R + 36, ly + 4,
                     b.dynamic_prompts[p], b.convergence_runs[p])
      << "\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::vector<fs::path> emit_reports(const ReportBundle& bundle, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<fs::path> written;
  auto put = [&](const char* name, const std::string& text) {
    write_text(out_dir / name, text);
    written.push_back(out_dir / name);
  };
  if (bundle.has_adherence()) {
    put("mse_grid.csv", mse_grid_csv(bundle));
    put("tdw.csv", tdw_csv(bundle));
    put("sample_counts.csv", sample_counts_csv(bundle));
    put("diff_scatter.csv", diff_scatter_csv(bundle));
  }
  if (bundle.has_dynamic()) {
    put("convergence.csv", convergence_csv(bundle));
    put("codediff_trace.csv", codediff_trace_csv(bundle));
    put("convergence.svg", convergence_svg(bundle));
  }
  return written;
}

}  // namespace ctrlmut
