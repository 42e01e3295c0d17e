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

// One model trial and its JSONL log representation.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "maskeval/annotation.hpp"

namespace maskeval {

enum class TaskKind { kMskQa, kMskCal };
std::string_view task_kind_name(TaskKind kind);  // "mskqa" / "mskcal"
TaskKind parse_task_kind(std::string_view name);

struct TrialRecord {
  std::string dataset;
  std::string item_id;
  TaskKind kind = TaskKind::kMskQa;
  MaskMode mode = MaskMode::kRegular;
  double rate = 0.0;
  int trial = 0;
  std::string raw_response;
  bool missing = true;  // no well-formed answer extracted

  // Multiple choice.
  std::optional<int> choice;
  std::optional<int> answer_index;
  std::optional<bool> correct;

  // Calculation: parsed answers, the key, and |answer - truth| / |truth|.
  std::map<std::string, double> values;
  std::map<std::string, double> truth;
  std::map<std::string, double> rel_errors;
  std::vector<std::string> notes;  // number normalization applied

  std::string error;  // transport failure message, if any

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// "dataset|item|mode|rate|trial", unique per grid cell and trial.
std::string trial_key(const TrialRecord& r);
std::string trial_key(std::string_view dataset, std::string_view item_id,
                      MaskMode mode, double rate, int trial);

nlohmann::json to_json(const TrialRecord& r);
TrialRecord trial_from_json(const nlohmann::json& j);

/// Reads a JSONL trial log. A malformed final line (an interrupted append)
/// is dropped; a malformed line elsewhere is a ValidationError.
std::vector<TrialRecord> read_trial_log(const std::string& path);
void write_trial_log(const std::string& path,
                     const std::vector<TrialRecord>& records);

}  // namespace maskeval
