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

#include "maskeval/trial.hpp"

#include <fstream>
#include <sstream>

#include "maskeval/error.hpp"
#include "maskeval/text_util.hpp"

namespace maskeval {

using nlohmann::json;

std::string_view task_kind_name(TaskKind kind) {
  return kind == TaskKind::kMskQa ? "mskqa" : "mskcal";
}

TaskKind parse_task_kind(std::string_view name) {
  if (name == "mskqa") return TaskKind::kMskQa;
  if (name == "mskcal") return TaskKind::kMskCal;
  throw ValidationError("unknown task kind '" + std::string(name) + "'");
}

std::string trial_key(std::string_view dataset, std::string_view item_id,
                      MaskMode mode, double rate, int trial) {
  return std::string(dataset) + "|" + std::string(item_id) + "|" +
         std::string(mask_mode_name(mode)) + "|" +
         std::to_string(rate_key(rate)) + "|" + std::to_string(trial);
}

std::string trial_key(const TrialRecord& r) {
  return trial_key(r.dataset, r.item_id, r.mode, r.rate, r.trial);
}

json to_json(const TrialRecord& r) {
  json j;
  j["dataset"] = r.dataset;
  j["item_id"] = r.item_id;
  j["kind"] = task_kind_name(r.kind);
  j["mode"] = mask_mode_name(r.mode);
  j["rate"] = r.rate;
  j["trial"] = r.trial;
  j["raw_response"] = r.raw_response;
  j["missing"] = r.missing;
  if (r.kind == TaskKind::kMskQa) {
    j["choice"] = r.choice ? json(*r.choice) : json(nullptr);
    j["answer_index"] = r.answer_index ? json(*r.answer_index) : json(nullptr);
    j["correct"] = r.correct ? json(*r.correct) : json(nullptr);
  } else {
    j["values"] = r.values;
    j["truth"] = r.truth;
    j["rel_errors"] = r.rel_errors;
    j["notes"] = r.notes;
  }
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

TrialRecord trial_from_json(const json& j) {
  TrialRecord r;
  try {
    r.dataset = j.at("dataset").get<std::string>();
    r.item_id = j.at("item_id").get<std::string>();
    r.kind = parse_task_kind(j.at("kind").get<std::string>());
    r.mode = parse_mask_mode(j.at("mode").get<std::string>());
    r.rate = j.at("rate").get<double>();
    r.trial = j.at("trial").get<int>();
    r.raw_response = j.at("raw_response").get<std::string>();
    r.missing = j.at("missing").get<bool>();
    auto opt_int = [&](const char* k) -> std::optional<int> {
      if (!j.contains(k) || j[k].is_null()) return std::nullopt;
      return j[k].get<int>();
    };
    r.choice = opt_int("choice");
    r.answer_index = opt_int("answer_index");
    if (j.contains("correct") && !j["correct"].is_null()) {
      r.correct = j["correct"].get<bool>();
    }
    if (j.contains("values")) r.values = j["values"].get<std::map<std::string, double>>();
    if (j.contains("truth")) r.truth = j["truth"].get<std::map<std::string, double>>();
    if (j.contains("rel_errors")) {
      r.rel_errors = j["rel_errors"].get<std::map<std::string, double>>();
    }
    if (j.contains("notes")) r.notes = j["notes"].get<std::vector<std::string>>();
    if (j.contains("error")) r.error = j["error"].get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed trial record: ") + e.what());
  }
  return r;
}

std::vector<TrialRecord> read_trial_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open trial log '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  const auto text = os.str();
  const auto lines = split_lines(text);
  std::size_t last = lines.size();
  while (last > 0 && trim(lines[last - 1]).empty()) --last;
  std::vector<TrialRecord> records;
  for (std::size_t i = 0; i < last; ++i) {
    if (trim(lines[i]).empty()) continue;
    auto j = json::parse(lines[i], nullptr, false);
    if (j.is_discarded()) {
      if (i + 1 == last) break;
      throw ValidationError(path + ":" + std::to_string(i + 1) +
                            ": malformed trial record");
    }
    try {
      records.push_back(trial_from_json(j));
    } catch (const ValidationError& e) {
      throw ValidationError(path + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return records;
}

void write_trial_log(const std::string& path,
                     const std::vector<TrialRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write trial log '" + path + "'");
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

}  // namespace maskeval
