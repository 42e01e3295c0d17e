// Copyright 2026 The maskeval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "maskeval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "maskeval/error.hpp"
#include "maskeval/text_util.hpp"

namespace maskeval {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& contents,
                std::vector<std::string>& files) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << contents;
  files.push_back(path.string());
}

bool selected(const std::vector<std::string>& filter, std::string_view v) {
  return filter.empty() || std::find(filter.begin(), filter.end(), v) != filter.end();
}

}  // namespace

std::optional<double> metric_value(const MetricsCell& c, std::string_view metric) {
  if (metric == "acc") return c.acc;
  if (metric == "na") return c.na;
  if (metric == "pa") return c.pa;
  if (metric == "ea") return c.ea;
  if (metric == "ki") return c.ki;
  if (metric == "nar") return c.nar;
  if (metric == "p_delta" || metric == "p_delta_trimmed") return c.p_delta_trimmed;
  if (metric == "p_delta_raw") return c.p_delta_raw;
  if (metric == "p_sigma") return c.p_sigma;
  if (metric == "p_half_sigma") return c.p_half_sigma;
  throw ValidationError("unknown metric '" + std::string(metric) + "'");
}

void check_grids(const std::vector<MetricsCell>& cells) {
  std::map<TaskKind, std::map<std::string, std::set<std::int64_t>>> grids;
  std::map<TaskKind, std::set<std::int64_t>> all;
  for (const auto& c : cells) {
    const auto name = c.dataset + "/" + std::string(mask_mode_name(c.mode));
    grids[c.kind][name].insert(rate_key(c.rate));
    all[c.kind].insert(rate_key(c.rate));
  }
  std::string problems;
  for (const auto& [kind, by_curve] : grids) {
    for (const auto& [name, keys] : by_curve) {
      std::string missing;
      for (auto k : all[kind]) {
        if (keys.contains(k)) continue;
        missing += (missing.empty() ? "" : ", ") + format_number(static_cast<double>(k) / 1e6);
      }
      if (!missing.empty()) problems += "\n  " + name + " lacks rates " + missing;
    }
  }
  if (!problems.empty()) throw ValidationError("rate grids differ:" + problems);
}

std::vector<Series> curves(const std::vector<MetricsCell>& cells, std::string_view metric) {
  std::vector<Series> out;
  std::map<std::string, std::size_t> index;
  for (const auto& c : cells) {
    const auto name = c.dataset + "/" + std::string(mask_mode_name(c.mode));
    auto [it, fresh] = index.emplace(name, out.size());
    if (fresh) out.push_back({name, {}});
    if (auto v = metric_value(c, metric)) out[it->second].points.emplace_back(c.rate, *v);
  }
  for (auto& s : out) std::sort(s.points.begin(), s.points.end());
  return out;
}

std::string curves_to_csv(const std::vector<Series>& series) {
  std::map<std::int64_t, double> rates;
  for (const auto& s : series) {
    for (const auto& [r, _] : s.points) rates.emplace(rate_key(r), r);
  }
  std::string out = "rate";
  for (const auto& s : series) out += "," + s.name;
  out += "\n";
  for (const auto& [key, rate] : rates) {
    out += format_number(rate);
    for (const auto& s : series) {
      out += ",";
      auto it = std::find_if(s.points.begin(), s.points.end(),
                             [&](const auto& p) { return rate_key(p.first) == key; });
      if (it != s.points.end()) out += format_number(it->second);
    }
    out += "\n";
  }
  return out;
}

std::string render_svg(const std::vector<Series>& series, std::string_view title,
                       std::string_view y_label) {
  constexpr double W = 640, H = 420, L = 60, R = 170, T = 40, B = 50;
  const double pw = W - L - R, ph = H - T - B;
  double lo = 0.0, hi = 1.0;
  for (const auto& s : series) {
    for (const auto& [_, v] : s.points) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  auto sx = [&](double r) { return L + r * pw; };
  auto sy = [&](double v) { return T + (hi - v) / (hi - lo) * ph; };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" + num(H) +
       "\" viewBox=\"0 0 " + num(W) + " " + num(H) + "\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + num(W / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
       xml_escape(title) + "</text>\n";
  o += "<g stroke=\"black\" stroke-width=\"1\">\n";
  o += "<line x1=\"" + num(L) + "\" y1=\"" + num(T + ph) + "\" x2=\"" + num(L + pw) +
       "\" y2=\"" + num(T + ph) + "\"/>\n";
  o += "<line x1=\"" + num(L) + "\" y1=\"" + num(T) + "\" x2=\"" + num(L) + "\" y2=\"" +
       num(T + ph) + "\"/>\n</g>\n";
  o += "<g font-size=\"11\">\n";
  for (int i = 0; i <= 10; ++i) {
    const double r = i / 10.0;
    o += "<text x=\"" + num(sx(r)) + "\" y=\"" + num(T + ph + 16) +
         "\" text-anchor=\"middle\">" + format_number(r) + "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double v = lo + (hi - lo) * i / 5.0;
    o += "<text x=\"" + num(L - 6) + "\" y=\"" + num(sy(v) + 4) + "\" text-anchor=\"end\">" +
         num(v) + "</text>\n";
  }
  o += "<text x=\"" + num(L + pw / 2) + "\" y=\"" + num(H - 10) +
       "\" text-anchor=\"middle\">masking rate</text>\n";
  o += "<text x=\"14\" y=\"" + num(T + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
       num(T + ph / 2) + ")\">" + xml_escape(y_label) + "</text>\n</g>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    std::string pts;
    for (const auto& [r, v] : s.points) {
      if (!pts.empty()) pts += ' ';
      pts += num(sx(r)) + "," + num(sy(v));
    }
    o += "<polyline data-series=\"" + xml_escape(s.name) + "\" fill=\"none\" stroke=\"" +
         color + "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    const double ly = T + 14 + 18 * static_cast<double>(i);
    o += "<line x1=\"" + num(L + pw + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" +
         num(L + pw + 32) + "\" y2=\"" + num(ly) + "\" stroke=\"" + color +
         "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + num(L + pw + 38) + "\" y=\"" + num(ly + 4) + "\" font-size=\"11\">" +
         xml_escape(s.name) + "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

void ReportSpec::validate() const {
  if (formats.empty()) throw ValidationError("report needs at least one output format");
  for (const auto& f : formats) {
    if (f != "csv" && f != "json" && f != "svg") {
      throw ValidationError("unknown output format '" + f + "'");
    }
  }
}

ReportResult write_report(const std::vector<TrialRecord>& records,
                          const std::vector<TrialRecord>* baseline, const ReportSpec& spec,
                          const MetricsOptions& options) {
  spec.validate();
  std::vector<TrialRecord> chosen;
  for (const auto& r : records) {
    if (selected(spec.datasets, r.dataset) && selected(spec.modes, mask_mode_name(r.mode))) {
      chosen.push_back(r);
    }
  }
  if (chosen.empty()) throw ValidationError("no trial records match the report selection");

  ReportResult res;
  res.cells = compute_metrics(chosen, baseline, options, &res.warnings);
  check_grids(res.cells);
  res.summary = summarize(res.cells);
  for (const auto& m : spec.metrics) metric_value(res.cells.front(), m);

  const std::filesystem::path dir(spec.out_dir);
  std::filesystem::create_directories(dir);
  if (spec.formats.contains("csv")) {
    write_file(dir / "metrics.csv", metrics_to_csv(res.cells), res.files);
    write_file(dir / "summary.txt", format_summary(res.summary), res.files);
  }
  if (spec.formats.contains("json")) {
    write_file(dir / "metrics.json", metrics_to_json(res.cells).dump(2) + "\n", res.files);
    write_file(dir / "summary.json", summary_to_json(res.summary).dump(2) + "\n", res.files);
  }
  for (const auto& m : spec.metrics) {
    const auto series = curves(res.cells, m);
    if (spec.formats.contains("csv")) {
      write_file(dir / ("curves_" + m + ".csv"), curves_to_csv(series), res.files);
    }
    if (spec.formats.contains("svg")) {
      write_file(dir / ("curves_" + m + ".svg"), render_svg(series, m + " vs masking rate", m),
                 res.files);
    }
  }
  return res;
}

}  // namespace maskeval
