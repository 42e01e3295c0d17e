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

// Evaluation prompts for masked multiple-choice QA and the guided
// calculation task.
//
// A QA item is masked as one composite document (text, question, options
// joined by newlines) so that a word gets the same code wherever it appears.
// A calculation task is masked the same way with two code namespaces: "m"
// codes (<#m001>) in the document block, "t" codes (#t001) in the
// conditions and simulation blocks.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maskeval/annotation.hpp"
#include "maskeval/corpus.hpp"
#include "maskeval/masking.hpp"
#include "maskeval/trial.hpp"

namespace maskeval {

struct PromptBundle {
  std::string prompt_text;
  std::string item_id;
  TaskKind kind = TaskKind::kMskQa;
  std::optional<int> answer_index;          // MskQA key
  std::map<std::string, double> calc_key;   // MskCal key
  MaskParams params;
};

/// "item__mode__r0.50"; stable file stem for prompt dumps.
std::string prompt_id(std::string_view item_id, MaskMode mode, double rate);

// --- multiple choice ---------------------------------------------------------

struct QaLayout {
  std::string source;
  std::optional<Span> text;  // absent when the Text section is omitted
  bool text_is_rationale = false;
  Span question;
  std::vector<Span> options;
};

/// Text section: the rationale for AQA items under case 1/2, nothing under
/// case 3, the evidence otherwise (omitted when empty). Throws
/// ValidationError when a case 1/2 item has no rationale, or when a case 1
/// rationale names the correct option label, e.g. "(C)".
QaLayout qa_layout(const QAItem& item, std::optional<EvidenceMode> evidence_mode);

/// Numbers are never masked. AQA options are protected; case 3 also
/// excludes math symbols (including '=') and single-letter variables.
ExclusionRules qa_rules(const QAItem& item, const QaLayout& layout,
                        std::optional<EvidenceMode> evidence_mode);

struct MaskedQa {
  QaLayout layout;
  std::vector<AnnotatedToken> tokens;
  MaskResult result;
};

MaskedQa mask_qa_item(const QAItem& item, std::optional<EvidenceMode> evidence_mode,
                      MaskMode mode, double rate, std::uint64_t seed,
                      MetaGenerator& generator, const Tagger& tagger = RuleTagger{});

/// Rendered parts of a masked QA item.
struct MskQaParts {
  std::optional<std::string> text;
  bool text_is_rationale = false;
  std::string question;
  std::vector<std::string> options;
  std::vector<MaskCode> table;
  MaskParams params;
};

MskQaParts qa_parts(const MaskedQa& masked);

/// Python-style repr of a list of strings: ['1. a', "2. it's"].
std::string python_list_repr(const std::vector<std::string>& items);

/// Throws ValidationError when a part is missing (empty question, option
/// count differing from the item, no Text under a mode that needs one).
PromptBundle build_mskqa_prompt(const QAItem& item, const MskQaParts& parts,
                                std::optional<EvidenceMode> evidence_mode);

// --- guided calculation ------------------------------------------------------

struct CalcLayout {
  std::string source;
  Span document;
  Span conditions;  // includes the "#Conditions" header line
  Span simulation;  // includes the "#Simulation" header line
};

CalcLayout calc_layout(const CalcTask& task);

/// Numbers, single-letter variables, section headers ("#Document") and
/// formula variable names are always protected; restricted masking also
/// protects every formula span ("P = E / (B + C) =").
ExclusionRules calc_rules(const CalcLayout& layout, bool restricted);

std::vector<CodeScope> calc_scopes(const CalcLayout& layout);

struct MaskedCalc {
  CalcLayout layout;
  std::vector<AnnotatedToken> tokens;
  ExclusionRules rules;
  MaskResult result;
};

MaskedCalc mask_calc_task(const CalcTask& task, bool restricted, MaskMode mode,
                          double rate, std::uint64_t seed, MetaGenerator& generator,
                          const Tagger& tagger = RuleTagger{});

struct MskCalParts {
  std::string body;  // masked document, conditions and simulation
  std::vector<MaskCode> document_table;
  std::vector<MaskCode> simulation_table;
  MaskParams params;
};

/// Checks that no code covers a protected token or span, then renders.
/// Throws SpanError on a violation.
MskCalParts calc_parts(const MaskedCalc& masked);

PromptBundle build_mskcal_prompt(const CalcTask& task, const MskCalParts& parts,
                                 bool restricted);

/// Writes {dir}/prompts/{prompt_id}.txt for every bundle, the answer keys
/// to {dir}/answer_keys.json and {dir}/manifest.json mapping each prompt id
/// to its prompt file and key reference.
void dump_prompts(const std::string& dir, const std::vector<PromptBundle>& bundles);

}  // namespace maskeval
