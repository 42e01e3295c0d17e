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

#include "maskeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

#include "maskeval/error.hpp"
#include "maskeval/text_util.hpp"

namespace maskeval {
namespace {

using nlohmann::json;

constexpr MaskMode kSummaryModes[] = {MaskMode::kStrict, MaskMode::kRegular,
                                      MaskMode::kPartialLifting,
                                      MaskMode::kLenient};

double mean(std::span<const double> v) {
  return compensated_sum(v) / static_cast<double>(v.size());
}

std::optional<double> mean_of_present(const std::vector<std::optional<double>>& v) {
  std::vector<double> present;
  for (const auto& x : v) {
    if (x) present.push_back(*x);
  }
  if (present.empty()) return std::nullopt;
  return mean(present);
}

using TruthFn = std::function<double(const TrialRecord&, std::string_view)>;

CalcScores score_impl(std::span<const TrialRecord> records, const TruthFn& truth,
                      const CalcScoreOptions& opt) {
  if (records.empty()) throw UndefinedValueError("calc scores of an empty cell");
  CalcScores out;
  out.trials = records.size();
  std::size_t missing = 0;
  for (const auto& r : records) {
    if (r.missing) ++missing;
  }
  out.nar = static_cast<double>(missing) / static_cast<double>(records.size());

  std::vector<std::optional<double>> pdt, pdr, ps, phs;
  for (auto name : kScoredVariables) {
    VariableScore vs;
    vs.name = std::string(name);
    std::vector<double> deltas;
    for (const auto& r : records) {
      if (r.missing) continue;
      auto it = r.values.find(vs.name);
      if (it == r.values.end()) continue;
      const double t = truth(r, name);
      if (t == 0.0) {
        throw UndefinedValueError("relative error undefined: true " + vs.name + " is 0");
      }
      deltas.push_back(std::abs(it->second - t) / std::abs(t));
    }
    vs.answered = deltas.size();
    if (!deltas.empty()) {
      const double raw = mean(deltas);
      vs.mean_delta = raw;
      vs.p_delta_raw = 1.0 - raw;
      vs.p_delta_trimmed = 1.0 - trimmed_mean(deltas, opt.trim);
      const auto within = [&](double bound) {
        const auto hits = std::count_if(deltas.begin(), deltas.end(),
                                        [&](double d) { return d <= bound; });
        return static_cast<double>(hits) / static_cast<double>(deltas.size());
      };
      vs.p_sigma = within(opt.sigma);
      vs.p_half_sigma = within(opt.sigma / 2.0);
    }
    pdt.push_back(vs.p_delta_trimmed);
    pdr.push_back(vs.p_delta_raw);
    ps.push_back(vs.p_sigma);
    phs.push_back(vs.p_half_sigma);
    out.variables.push_back(std::move(vs));
  }
  out.p_delta_trimmed = mean_of_present(pdt).value_or(0.0);
  out.p_delta_raw = mean_of_present(pdr).value_or(0.0);
  out.p_sigma = mean_of_present(ps).value_or(0.0);
  out.p_half_sigma = mean_of_present(phs).value_or(0.0);
  return out;
}

std::string fixed(std::optional<double> v, int decimals, double scale = 1.0) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, *v * scale);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::optional<double> index_or_absent(const std::map<double, double>& series,
                                      WeightedIndex which) {
  try {
    return weighted_index(series, which);
  } catch (const UndefinedValueError&) {
    return std::nullopt;
  }
}

}  // namespace

double acc(std::span<const TrialRecord> records) {
  if (records.empty()) throw UndefinedValueError("accuracy of an empty cell");
  std::size_t correct = 0;
  for (const auto& r : records) {
    if (!r.missing && r.correct.value_or(false)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

double nar(std::span<const TrialRecord> records) {
  if (records.empty()) throw UndefinedValueError("missing rate of an empty cell");
  const auto missing = std::count_if(records.begin(), records.end(),
                                     [](const TrialRecord& r) { return r.missing; });
  return static_cast<double>(missing) / static_cast<double>(records.size());
}

double na(double acc_r, double acc_0) {
  if (acc_0 == 0.0) throw UndefinedValueError("NA undefined: unmasked accuracy is 0");
  return acc_r / acc_0;
}

PaEa pa_ea(double na_d, double na_u, double acc0_d) {
  if (na_d < 0.0 || na_u < 0.0) throw ValidationError("NA values must be >= 0");
  const double pa = na_d == na_u ? na_u : std::sqrt(na_d * na_u);
  return {pa, acc0_d * pa};
}

double ki(double acc_d, double acc_u) {
  if (acc_u == 0.0) throw UndefinedValueError("KI undefined: baseline accuracy is 0");
  return 1.0 - acc_d / acc_u;
}

double trimmed_mean(std::vector<double> values, double trim) {
  if (values.empty()) throw UndefinedValueError("trimmed mean of no values");
  if (trim < 0.0 || trim >= 0.5) throw ValidationError("trim must be in [0, 0.5)");
  std::sort(values.begin(), values.end());
  const auto k = static_cast<std::size_t>(
      std::floor(trim * static_cast<double>(values.size()) + 1e-9));
  return mean(std::span<const double>(values).subspan(k, values.size() - 2 * k));
}

CalcScores calc_scores(std::span<const TrialRecord> records,
                       const CalcGround& ground, const CalcScoreOptions& options) {
  return score_impl(
      records,
      [&](const TrialRecord&, std::string_view name) {
        return to_double(*ground.value(name));
      },
      options);
}

CalcScores calc_scores(std::span<const TrialRecord> records,
                       const CalcScoreOptions& options) {
  return score_impl(
      records,
      [](const TrialRecord& r, std::string_view name) {
        auto it = r.truth.find(std::string(name));
        if (it == r.truth.end()) {
          throw ValidationError("record " + trial_key(r) + " has no true " +
                                std::string(name));
        }
        return it->second;
      },
      options);
}

double weighted_index(const std::map<double, double>& series, WeightedIndex which) {
  std::vector<double> weights, weighted, logs;
  bool has_zero = false;
  for (const auto& [r, x] : series) {
    if (rate_key(r) == 0) continue;
    if (which == WeightedIndex::kX1) {
      weights.push_back(r);
      weighted.push_back(r * x);
    } else {
      if (x < 0.0 || std::isnan(x)) {
        throw UndefinedValueError("geometric index undefined for value " +
                                  format_number(x) + " at rate " + format_number(r));
      }
      if (x == 0.0) has_zero = true;  // the product is 0 whatever follows
      logs.push_back(x > 0.0 ? std::log(x) : 0.0);
    }
  }
  if (which == WeightedIndex::kX1) {
    if (weights.empty()) throw UndefinedValueError("weighted index of an empty series");
    return compensated_sum(weighted) / compensated_sum(weights);
  }
  if (logs.empty()) throw UndefinedValueError("weighted index of an empty series");
  if (has_zero) return 0.0;
  return std::exp(mean(logs));
}

std::vector<MetricsCell> compute_metrics(const std::vector<TrialRecord>& records,
                                         const std::vector<TrialRecord>* baseline,
                                         const MetricsOptions& options,
                                         std::vector<std::string>* warnings) {
  using Key = std::tuple<std::string, int, std::int64_t>;
  std::map<Key, std::vector<TrialRecord>> groups;
  for (const auto& r : records) {
    groups[{r.dataset, static_cast<int>(r.mode), rate_key(r.rate)}].push_back(r);
  }

  std::map<std::pair<int, std::int64_t>, double> base_acc;
  if (baseline) {
    std::map<std::pair<int, std::int64_t>, std::vector<TrialRecord>> bg;
    for (const auto& r : *baseline) {
      if (r.kind == TaskKind::kMskQa) {
        bg[{static_cast<int>(r.mode), rate_key(r.rate)}].push_back(r);
      }
    }
    for (const auto& [k, v] : bg) base_acc[k] = acc(v);
  }

  std::vector<MetricsCell> cells;
  std::map<Key, double> acc_by_key;
  for (const auto& [key, recs] : groups) {
    MetricsCell c;
    c.dataset = std::get<0>(key);
    c.kind = recs.front().kind;
    c.mode = recs.front().mode;
    c.rate = recs.front().rate;
    c.n_trials = recs.size();
    c.nar = nar(recs);
    if (c.kind == TaskKind::kMskQa) {
      c.acc = acc(recs);
      acc_by_key[key] = *c.acc;
    } else {
      const auto s = calc_scores(recs, options.calc);
      c.p_delta_trimmed = s.p_delta_trimmed;
      c.p_delta_raw = s.p_delta_raw;
      c.p_sigma = s.p_sigma;
      c.p_half_sigma = s.p_half_sigma;
    }
    cells.push_back(std::move(c));
  }

  std::set<std::string> warned;
  for (auto& c : cells) {
    if (c.kind != TaskKind::kMskQa) continue;
    const auto mode = static_cast<int>(c.mode);
    auto zero = acc_by_key.find({c.dataset, mode, 0});
    if (zero == acc_by_key.end() || zero->second == 0.0) continue;
    const double acc0 = zero->second;
    c.na = na(*c.acc, acc0);
    if (!baseline) continue;
    auto bu = base_acc.find({mode, rate_key(c.rate)});
    auto bu0 = base_acc.find({mode, 0});
    if (bu == base_acc.end() || bu0 == base_acc.end()) {
      const auto msg = "baseline has no " + std::string(mask_mode_name(c.mode)) +
                       " cell at rate " + format_number(c.rate) + "; skipped";
      if (warnings && warned.insert(msg).second) warnings->push_back(msg);
      continue;
    }
    if (bu0->second == 0.0) continue;
    const double na_u = na(bu->second, bu0->second);
    const auto pe = pa_ea(*c.na, na_u, acc0);
    c.pa = pe.pa;
    c.ea = pe.ea;
    if (bu->second > 0.0) c.ki = ki(*c.acc, bu->second);
  }
  return cells;
}

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols = {
      "dataset", "kind", "mode", "rate", "n_trials", "acc", "na", "pa", "ea", "ki",
      "nar", "p_delta_trimmed", "p_delta_raw", "p_sigma", "p_half_sigma"};
  return cols;
}

std::string metrics_to_csv(const std::vector<MetricsCell>& cells) {
  std::string out;
  const auto& cols = metrics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += "\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? format_number(*v) : std::string();
  };
  for (const auto& c : cells) {
    out += csv_field(c.dataset) + "," + std::string(task_kind_name(c.kind)) + "," +
           std::string(mask_mode_name(c.mode)) + "," + format_number(c.rate) + "," +
           std::to_string(c.n_trials) + "," + opt(c.acc) + "," + opt(c.na) + "," +
           opt(c.pa) + "," + opt(c.ea) + "," + opt(c.ki) + "," + opt(c.nar) + "," +
           opt(c.p_delta_trimmed) + "," + opt(c.p_delta_raw) + "," + opt(c.p_sigma) +
           "," + opt(c.p_half_sigma) + "\n";
  }
  return out;
}

json metrics_to_json(const std::vector<MetricsCell>& cells) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json arr = json::array();
  for (const auto& c : cells) {
    json j;
    j["dataset"] = c.dataset;
    j["kind"] = task_kind_name(c.kind);
    j["mode"] = mask_mode_name(c.mode);
    j["rate"] = c.rate;
    j["n_trials"] = c.n_trials;
    j["acc"] = opt(c.acc);
    j["na"] = opt(c.na);
    j["pa"] = opt(c.pa);
    j["ea"] = opt(c.ea);
    j["ki"] = opt(c.ki);
    j["nar"] = opt(c.nar);
    j["p_delta_trimmed"] = opt(c.p_delta_trimmed);
    j["p_delta_raw"] = opt(c.p_delta_raw);
    j["p_sigma"] = opt(c.p_sigma);
    j["p_half_sigma"] = opt(c.p_half_sigma);
    arr.push_back(std::move(j));
  }
  return arr;
}

std::vector<SummaryRow> summarize(const std::vector<MetricsCell>& cells) {
  std::vector<std::string> datasets;
  for (const auto& c : cells) {
    if (c.kind == TaskKind::kMskQa &&
        std::find(datasets.begin(), datasets.end(), c.dataset) == datasets.end()) {
      datasets.push_back(c.dataset);
    }
  }
  std::vector<SummaryRow> rows;
  for (const auto& ds : datasets) {
    std::map<MaskMode, std::map<double, double>> acc_series;
    std::map<double, double> na_s, ea_s, ki_s;
    std::optional<double> acc0;
    for (const auto& c : cells) {
      if (c.dataset != ds || c.kind != TaskKind::kMskQa || !c.acc) continue;
      acc_series[c.mode][c.rate] = *c.acc;
      if (c.mode != MaskMode::kRegular) continue;
      if (rate_key(c.rate) == 0) acc0 = c.acc;
      if (c.na) na_s[c.rate] = *c.na;
      if (c.ea) ea_s[c.rate] = *c.ea;
      if (c.ki) ki_s[c.rate] = *c.ki;
    }
    for (auto which : {WeightedIndex::kX1, WeightedIndex::kX2}) {
      SummaryRow row;
      row.dataset = ds;
      row.which = which;
      row.acc0 = acc0;
      std::vector<std::optional<double>> four;
      for (auto m : kSummaryModes) {
        auto it = acc_series.find(m);
        row.acc[m] = it == acc_series.end() ? std::nullopt : index_or_absent(it->second, which);
        four.push_back(row.acc[m]);
      }
      if (std::all_of(four.begin(), four.end(), [](const auto& v) { return v.has_value(); })) {
        row.four_state_acc = mean_of_present(four);
      }
      row.na = index_or_absent(na_s, which);
      row.ea = index_or_absent(ea_s, which);
      row.ki = index_or_absent(ki_s, which);
      row.x_ea = row.ea;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string format_summary(const std::vector<SummaryRow>& rows) {
  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-12s %-8s %-5s %8s %8s %8s %8s %8s %8s %8s %10s %8s\n",
                "dataset", "acc0", "index", "strict", "reg.", "part.", "lenient", "NA",
                "EA", "KI", "<X(Acc)>", "X(EA)");
  out += buf;
  for (const auto& r : rows) {
    auto acc_of = [&](MaskMode m) {
      auto it = r.acc.find(m);
      return it == r.acc.end() ? std::optional<double>() : it->second;
    };
    std::snprintf(buf, sizeof buf, "%-12s %-8s %-5s %8s %8s %8s %8s %8s %8s %8s %10s %8s\n",
                  r.dataset.c_str(), fixed(r.acc0, 2, 100).c_str(),
                  r.which == WeightedIndex::kX1 ? "X1" : "X2",
                  fixed(acc_of(MaskMode::kStrict), 2, 100).c_str(),
                  fixed(acc_of(MaskMode::kRegular), 2, 100).c_str(),
                  fixed(acc_of(MaskMode::kPartialLifting), 2, 100).c_str(),
                  fixed(acc_of(MaskMode::kLenient), 2, 100).c_str(),
                  fixed(r.na, 4).c_str(), fixed(r.ea, 2, 100).c_str(),
                  fixed(r.ki, 4).c_str(), fixed(r.four_state_acc, 2, 100).c_str(),
                  fixed(r.x_ea, 2, 100).c_str());
    out += buf;
  }
  return out;
}

json summary_to_json(const std::vector<SummaryRow>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json arr = json::array();
  for (const auto& r : rows) {
    json j;
    j["dataset"] = r.dataset;
    j["index"] = r.which == WeightedIndex::kX1 ? "X1" : "X2";
    j["acc0"] = opt(r.acc0);
    json acc = json::object();
    for (const auto& [m, v] : r.acc) acc[std::string(mask_mode_name(m))] = opt(v);
    j["acc"] = acc;
    j["na"] = opt(r.na);
    j["ea"] = opt(r.ea);
    j["ki"] = opt(r.ki);
    j["four_state_acc"] = opt(r.four_state_acc);
    j["x_ea"] = opt(r.x_ea);
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace maskeval
