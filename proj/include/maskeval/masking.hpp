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

// Rate-controlled masking of annotated text.
//
// The pipeline is plan_mask -> assign_codes -> generate_meta -> apply_mask.
// plan_mask draws one seeded permutation of the maskable tokens and takes a
// prefix, so for a fixed seed the selection at a lower rate is always a
// subset of the selection at a higher rate. Codes are assigned per lemma
// (case-insensitive) in first-occurrence order, so repeated words share a
// code. The meta-information table is filled by a MetaGenerator; entries
// left without a meaning are "solid" masks. Partial lifting restores solid
// masks to their original surface; strict masking blanks every meaning.
//
// Every masked document carries a recovery map, and unmask() reproduces the
// source byte for byte.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "maskeval/annotation.hpp"
#include "maskeval/text_util.hpp"

namespace maskeval {

class Completer;

/// How a code reference is spelled in masked text.
enum class CodeStyle {
  kAngle,      // <r001>
  kAngleHash,  // <#m001>
  kHash,       // #t001
};

std::string render_code(std::string_view code, CodeStyle style);
std::string_view code_style_name(CodeStyle style);
CodeStyle parse_code_style(std::string_view name);

struct MaskCode {
  std::string code;       // namespace + zero-padded ordinal: r001
  std::string pos_label;  // "NOUN", or "VERB, NOUN" for mixed usage
  std::string category;
  std::string meaning;  // empty means solid mask

  bool solid() const { return meaning.empty(); }
  friend bool operator==(const MaskCode&, const MaskCode&) = default;
};

struct RecoveryEntry {
  Span span;
  std::string surface;
  friend bool operator==(const RecoveryEntry&, const RecoveryEntry&) = default;
};

using RecoveryMap = std::map<std::string, std::vector<RecoveryEntry>>;

struct Segment {
  bool is_code = false;
  std::string text;  // literal text, or the code id when is_code
  Span span;         // source bytes this segment stands for
  CodeStyle style = CodeStyle::kAngle;
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// A region of the source whose codes come from one namespace.
struct CodeScope {
  Span span;
  std::string ns;
  CodeStyle style = CodeStyle::kAngle;
};

struct MaskParams {
  MaskMode mode = MaskMode::kRegular;
  double rate = 0.0;
  std::uint64_t seed = 0;
  std::string ns = "r";  // comma-joined when several scopes are used
  friend bool operator==(const MaskParams&, const MaskParams&) = default;
};

struct MaskedDocument {
  std::vector<Segment> segments;
  std::vector<MaskCode> code_table;
  RecoveryMap recovery_map;
  MaskParams params;
  std::size_t maskable_count = 0;
  std::size_t masked_count = 0;

  friend bool operator==(const MaskedDocument&, const MaskedDocument&) = default;
};

/// Seed-determined selection of round(rate * |M|) maskable token indices,
/// in permutation order. Throws ValidationError if rate is outside [0, 1].
std::vector<std::size_t> plan_mask(const std::vector<AnnotatedToken>& tokens,
                                   MaskMode mode, double rate,
                                   std::uint64_t seed,
                                   const ExclusionRules& rules);

/// Output of assign_codes: a code table with only code and pos_label
/// filled, plus what generate_meta and apply_mask need.
struct CodeAssignment {
  std::vector<MaskCode> table;
  std::vector<std::string> lemmas;    // parallel to table
  std::vector<std::string> surfaces;  // first surface seen, parallel to table
  std::vector<CodeStyle> styles;      // parallel to table
  RecoveryMap recovery_map;
  std::map<std::size_t, std::string> token_codes;  // token index -> code
};

CodeAssignment assign_codes(const std::vector<AnnotatedToken>& tokens,
                            const std::vector<std::size_t>& selection,
                            std::string_view ns,
                            CodeStyle style = CodeStyle::kAngle);

/// Multi-namespace variant: a token takes the namespace of the scope that
/// contains it. Codes are per (namespace, lemma).
CodeAssignment assign_codes(const std::vector<AnnotatedToken>& tokens,
                            const std::vector<std::size_t>& selection,
                            const std::vector<CodeScope>& scopes);

struct MetaRequest {
  std::string code;
  std::string lemma;
  std::string surface;
  std::string pos_label;
};

struct MetaResult {
  std::string category;
  std::string meaning;
  bool failed = false;  // generator could not produce an entry
};

struct GenerationReport {
  std::size_t codes = 0;
  std::size_t solid = 0;
  std::size_t failed = 0;
};

class MetaGenerator {
 public:
  virtual ~MetaGenerator() = default;
  /// One result per request, in request order. `source` is the text being
  /// masked, for generators that want context.
  virtual std::vector<MetaResult> describe(
      const std::vector<MetaRequest>& requests, std::string_view source) = 0;
};

/// Offline generator: category and meaning from the bundled hypernym table
/// (category falls back to a per-POS default, meaning to empty), then each
/// code is made solid with probability `solid_probability`. The draw is
/// keyed by (seed, lemma), so the outcome does not depend on code order.
class FallbackMetaGenerator : public MetaGenerator {
 public:
  explicit FallbackMetaGenerator(double solid_probability = 0.0,
                                 std::uint64_t seed = 0);
  std::vector<MetaResult> describe(const std::vector<MetaRequest>& requests,
                                   std::string_view source) override;

 private:
  double solid_probability_;
  std::uint64_t seed_;
};

/// Asks a language model for category and meaning of every code in one
/// prompt. Entries the model leaves out, and every entry when the request
/// fails, come back as solid masks with failed = true.
class LlmMetaGenerator : public MetaGenerator {
 public:
  explicit LlmMetaGenerator(std::shared_ptr<Completer> completer)
      : completer_(std::move(completer)) {}
  std::vector<MetaResult> describe(const std::vector<MetaRequest>& requests,
                                   std::string_view source) override;

  static std::string build_prompt(const std::vector<MetaRequest>& requests,
                                  std::string_view source);

 private:
  std::shared_ptr<Completer> completer_;
};

/// Category used by the offline generator when the lexicon has no entry.
std::string_view default_category(Pos pos);

/// Fills category/meaning in `assignment.table`; blanks all meanings under
/// strict masking. Returns the generation report.
GenerationReport generate_meta(CodeAssignment& assignment,
                               MetaGenerator& generator, MaskMode mode,
                               std::string_view source);

/// Splices code references over selected tokens. Under partial lifting,
/// solid codes are restored to their surfaces and dropped from the table
/// and recovery map. maskable_count/masked_count are taken from the
/// pre-lifting selection.
MaskedDocument apply_mask(std::string_view source,
                          const std::vector<AnnotatedToken>& tokens,
                          const CodeAssignment& assignment,
                          const MaskParams& params,
                          std::size_t maskable_count);

/// Original text, byte-exact. Throws SpanError if a code reference has no
/// recovery entry.
std::string unmask(const MaskedDocument& doc);

/// Masked text with code references spelled per segment style.
std::string render(const MaskedDocument& doc);
/// Masked text for the source bytes in `range` only. Code references that
/// straddle the range boundary are a SpanError.
std::string render_range(const MaskedDocument& doc, Span range);

/// Metadata table in the QA prompt layout:
///   part_of_speech | category | meaning | code
std::string format_meta_table(const std::vector<MaskCode>& table);

/// Metadata block in the calculation prompt layout:
///   <Meta Information: {title}>
///   Number Part of Speech Category Meaning
std::string format_calc_meta_table(const std::vector<MaskCode>& table,
                                   std::string_view title);

nlohmann::json to_json(const MaskedDocument& doc, bool with_recovery = true);
MaskedDocument masked_document_from_json(const nlohmann::json& j);

struct MaskRequest {
  MaskMode mode = MaskMode::kRegular;
  double rate = 0.0;
  std::uint64_t seed = 0;
  ExclusionRules rules;
  /// Empty means one "r" namespace in angle style over the whole text.
  std::vector<CodeScope> scopes;
};

struct MaskResult {
  MaskedDocument doc;
  GenerationReport report;
};

/// The whole pipeline for one text.
MaskResult mask_text(std::string_view source,
                     const std::vector<AnnotatedToken>& tokens,
                     const MaskRequest& request, MetaGenerator& generator);

}  // namespace maskeval
