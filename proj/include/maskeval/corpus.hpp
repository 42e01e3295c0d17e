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

// Dataset records and their JSONL corpus files.
//
// QA corpus, one JSON object per line:
//   {"id": str, "question": str, "options": [str, ...], "answer": int,
//    "evidence": str, "rationale": str (optional), "source": "RQA"|"UQA"|"AQA"|"OTHER"}
// Calculation corpus, one JSON object per line:
//   {"id": str, "document": str, "conditions": str, "simulation": str,
//    "givens": {name: number}, "targets": {name: number}}
//
// Answer indices are 1-based throughout.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "maskeval/calc.hpp"
#include "maskeval/text_util.hpp"

namespace maskeval {

enum class SourceTag { kRqa, kUqa, kAqa, kOther };
std::string_view source_tag_name(SourceTag tag);
SourceTag parse_source_tag(std::string_view name);

/// How the reasoning text of an arithmetic multiple-choice item is used.
enum class EvidenceMode {
  kCase1SameNumbersNoAnswer,
  kCase2DiffNumbersWithAnswer,
  kCase3NoRationale,
};
std::string_view evidence_mode_name(EvidenceMode mode);  // "case1", ...
EvidenceMode parse_evidence_mode(std::string_view name);

struct QAItem {
  std::string id;
  std::string question;
  std::vector<std::string> options;
  std::string evidence;
  int answer_index = 1;
  std::optional<std::string> rationale;
  SourceTag source = SourceTag::kOther;

  friend bool operator==(const QAItem&, const QAItem&) = default;
};

struct CalcTask {
  std::string id;
  std::string document;
  std::string conditions;
  std::string simulation;
  std::map<std::string, double> givens;
  std::vector<std::pair<std::string, double>> targets;  // file order

  friend bool operator==(const CalcTask&, const CalcTask&) = default;
};

/// Throws ValidationError describing the first violated invariant.
void validate(const QAItem& item);
/// Checks the givens, that every variable used in a simulation formula is
/// known, and that the targets equal the exact oracle values.
void validate(const CalcTask& task);

/// Exact ground truth for a task's givens.
CalcGround calc_ground(const CalcTask& task);

enum class CorpusSchema { kQa, kCalc };
CorpusSchema parse_corpus_schema(std::string_view name);

using Corpus = std::variant<std::vector<QAItem>, std::vector<CalcTask>>;

/// Parses JSONL text. Errors name the line (1-based) and field; duplicate
/// ids are rejected. `origin` is used in messages.
std::vector<QAItem> parse_qa_corpus(std::string_view contents,
                                    std::string_view origin = "<memory>");
std::vector<CalcTask> parse_calc_corpus(std::string_view contents,
                                        std::string_view origin = "<memory>");
Corpus load_corpus(const std::string& path, CorpusSchema schema);
std::vector<QAItem> load_qa_corpus(const std::string& path);
std::vector<CalcTask> load_calc_corpus(const std::string& path);

std::string serialize_qa_corpus(const std::vector<QAItem>& items);
std::string serialize_calc_corpus(const std::vector<CalcTask>& tasks);

/// Formula spans in a guided derivation: from a variable name followed by
/// '=' through the last '=' on the line, e.g. "P = E / (B + C) =".
std::vector<Span> find_formula_spans(std::string_view text);
/// Variable names appearing inside formula spans, canonicalized
/// ("E'" -> "E_prime"), in order of first appearance.
std::vector<std::string> formula_variables(std::string_view text);

/// Multiple-choice question generation prompt with `document` substituted
/// after "Text: ". Throws ValidationError on an empty document.
std::string build_uqa_generation_prompt(std::string_view document);

/// Parses generated questions in the generation prompt's answer format:
///   question line(s), "A) ..." option lines, "Answer: C".
/// Items get ids "{id_prefix}-1", "{id_prefix}-2", ..., source UQA and
/// `document` as evidence. Throws ValidationError on a block without an
/// Answer line or an answer letter that is not one of the options.
std::vector<QAItem> parse_generated_qa(std::string_view response,
                                       std::string_view document,
                                       std::string_view id_prefix = "uqa");

/// Renders items back into the generation answer format.
std::string render_generated_qa(const std::vector<QAItem>& items);

}  // namespace maskeval
