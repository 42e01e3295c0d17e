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

// Accuracy-family and numeric-error indicators over trial logs.
//
//   Acc   correct / total, missing counted as wrong
//   NA    Acc(D, r) / Acc(D, 0)
//   PA    sqrt(NA(D, r) * NA(U, r)), U the background-knowledge baseline
//   EA    Acc(D, 0) * PA
//   KI    1 - Acc(D, r) / Acc(U, r)
//   NAR   missing / total
//   P_d   1 - trimmed mean of |answer - truth| / |truth|
//   P_vs  share of answered values with relative error <= v * 0.3173
//
// Fractions stay fractions here; percentages are a rendering concern.
// Values with a zero denominator are std::nullopt, never 0.

#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "maskeval/annotation.hpp"
#include "maskeval/calc.hpp"
#include "maskeval/trial.hpp"

namespace maskeval {

inline constexpr double kSigma = 0.3173;
inline constexpr double kDefaultTrim = 0.1;

/// Throws UndefinedValueError on an empty cell.
double acc(std::span<const TrialRecord> records);
double nar(std::span<const TrialRecord> records);

/// Throws UndefinedValueError when acc_0 = 0.
double na(double acc_r, double acc_0);

struct PaEa {
  double pa = 0.0;
  double ea = 0.0;
};
PaEa pa_ea(double na_d, double na_u, double acc0_d);

/// May be negative. Throws UndefinedValueError when acc_u = 0.
double ki(double acc_d, double acc_u);

/// Mean after dropping floor(trim * n) values from each end.
double trimmed_mean(std::vector<double> values, double trim);

struct VariableScore {
  std::string name;
  std::size_t answered = 0;
  std::optional<double> mean_delta;  // untrimmed average relative error
  std::optional<double> p_delta_trimmed;
  std::optional<double> p_delta_raw;
  std::optional<double> p_sigma;
  std::optional<double> p_half_sigma;
};

struct CalcScores {
  std::size_t trials = 0;
  double nar = 0.0;
  double p_delta_trimmed = 0.0;
  double p_delta_raw = 0.0;
  double p_sigma = 0.0;
  double p_half_sigma = 0.0;
  std::vector<VariableScore> variables;  // kScoredVariables order
};

struct CalcScoreOptions {
  double trim = kDefaultTrim;
  double sigma = kSigma;
};

/// Scores calculation trials against one ground truth. Cell indicators
/// average the per-variable values over the scored variables that received
/// at least one answer; a cell with no answers reports 0 for all of them.
/// Throws UndefinedValueError when a scored truth is 0, or on an empty cell.
CalcScores calc_scores(std::span<const TrialRecord> records,
                       const CalcGround& ground,
                       const CalcScoreOptions& options = {});
/// Same, using the key stored in each record's `truth` map.
CalcScores calc_scores(std::span<const TrialRecord> records,
                       const CalcScoreOptions& options = {});

enum class WeightedIndex { kX1, kX2 };

/// X1 = sum(r * X) / sum(r); X2 = geometric mean. Entries at r = 0 are
/// skipped. Throws UndefinedValueError on an empty series, and for X2 on
/// a negative value; X2 is 0 once any value is 0.
double weighted_index(const std::map<double, double>& series, WeightedIndex which);

struct MetricsCell {
  std::string dataset;
  TaskKind kind = TaskKind::kMskQa;
  MaskMode mode = MaskMode::kRegular;
  double rate = 0.0;
  std::size_t n_trials = 0;
  std::optional<double> acc;
  std::optional<double> na;
  std::optional<double> pa;
  std::optional<double> ea;
  std::optional<double> ki;
  std::optional<double> nar;
  std::optional<double> p_delta_trimmed;
  std::optional<double> p_delta_raw;
  std::optional<double> p_sigma;
  std::optional<double> p_half_sigma;
};

struct MetricsOptions {
  CalcScoreOptions calc;
};

/// Groups records into (dataset, mode, rate) cells sorted by dataset, mode
/// and rate. With a baseline log, PA/EA/KI are paired with the baseline
/// cell of the same mode and rate; rates the baseline lacks are skipped and
/// reported through `warnings`.
std::vector<MetricsCell> compute_metrics(
    const std::vector<TrialRecord>& records,
    const std::vector<TrialRecord>* baseline = nullptr,
    const MetricsOptions& options = {},
    std::vector<std::string>* warnings = nullptr);

/// Column order of metrics tables.
const std::vector<std::string>& metrics_columns();
std::string metrics_to_csv(const std::vector<MetricsCell>& cells);
nlohmann::json metrics_to_json(const std::vector<MetricsCell>& cells);

/// One dataset's row pair of the indicator summary: for X1 and X2, Acc per
/// masking mode, NA/EA/KI under regular masking, the four-mode average of
/// the Acc indices and the EA index.
struct SummaryRow {
  std::string dataset;
  WeightedIndex which = WeightedIndex::kX1;
  std::optional<double> acc0;  // unmasked Acc under regular masking
  std::map<MaskMode, std::optional<double>> acc;
  std::optional<double> na;
  std::optional<double> ea;
  std::optional<double> ki;
  std::optional<double> four_state_acc;
  std::optional<double> x_ea;
};

std::vector<SummaryRow> summarize(const std::vector<MetricsCell>& cells);

/// Text table with Acc/EA as percentages (two decimals) and NA/KI as
/// fractions (four decimals); absent values print as "-".
std::string format_summary(const std::vector<SummaryRow>& rows);
nlohmann::json summary_to_json(const std::vector<SummaryRow>& rows);

}  // namespace maskeval
