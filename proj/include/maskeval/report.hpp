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

// Curve tables, summary tables and SVG line plots from metrics cells.

#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "maskeval/metrics.hpp"

namespace maskeval {

/// Named column of a MetricsCell ("acc", "na", "ea", "ki", "nar",
/// "p_sigma", ...). Throws ValidationError on an unknown name.
std::optional<double> metric_value(const MetricsCell& cell, std::string_view metric);

/// Throws ValidationError when the (dataset, mode) curves of one task kind
/// do not all share a rate grid; the message lists the missing rates.
void check_grids(const std::vector<MetricsCell>& cells);

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (rate, value)
};

/// One series per (dataset, mode), "dataset/mode", absent values skipped.
std::vector<Series> curves(const std::vector<MetricsCell>& cells, std::string_view metric);

/// rate,<series 1>,<series 2>,... with empty fields for absent points.
std::string curves_to_csv(const std::vector<Series>& series);

/// Self-contained SVG line chart: one <polyline> per series.
std::string render_svg(const std::vector<Series>& series, std::string_view title,
                       std::string_view y_label);

struct ReportSpec {
  std::set<std::string> formats = {"csv", "json", "svg"};
  std::vector<std::string> metrics = {"acc"};
  std::vector<std::string> datasets;  // empty: all
  std::vector<std::string> modes;     // empty: all
  std::string out_dir = ".";

  /// Throws ValidationError on an empty or unknown format set.
  void validate() const;
};

struct ReportResult {
  std::vector<MetricsCell> cells;
  std::vector<SummaryRow> summary;
  std::vector<std::string> files;
  std::vector<std::string> warnings;
};

/// Computes metrics for `records` (paired with `baseline` when given),
/// checks grids, and writes metrics.{csv,json}, summary.{txt,json} and per
/// metric curves_<metric>.{csv,svg} into spec.out_dir.
ReportResult write_report(const std::vector<TrialRecord>& records,
                          const std::vector<TrialRecord>* baseline,
                          const ReportSpec& spec, const MetricsOptions& options = {});

}  // namespace maskeval
