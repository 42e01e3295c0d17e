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

// Word-level annotation: the token list that masking rates are computed
// against.
//
// A tagger is any callable text -> tokens. Two are provided: RuleTagger, a
// deterministic lexicon + suffix-heuristic tagger for English, and
// PreAnnotatedTagger, which replays a token file produced by an external
// tool. Masking rates are only comparable between runs that used the same
// tagger.

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "maskeval/text_util.hpp"

namespace maskeval {

enum class Pos { kNoun, kPropn, kVerb, kAdj, kAdv, kFunction, kNumber, kSymbol, kOther };

/// "NOUN", "PROPN", ... as used in tag sets and metadata tables.
std::string_view pos_name(Pos pos);
/// Inverse of pos_name; throws ValidationError on an unknown label.
Pos parse_pos(std::string_view label);
/// Noun, proper noun, verb, adjective or adverb.
bool is_content_pos(Pos pos);

struct AnnotatedToken {
  std::string surface;
  std::string lemma;
  Pos pos = Pos::kOther;
  Span span;
  bool compound = false;

  friend bool operator==(const AnnotatedToken&, const AnnotatedToken&) = default;
};

using Tagger = std::function<std::vector<AnnotatedToken>(std::string_view)>;

/// Lowercases and strips plural -s/-es and, for verbs, -ing/-ed (undoubling
/// final consonants and restoring a dropped 'e' where the lexicon knows the
/// base). Proper nouns, numbers and symbols are only lowercased.
std::string lemmatize(std::string_view surface, Pos pos);

class RuleTagger {
 public:
  std::vector<AnnotatedToken> operator()(std::string_view text) const;
};

/// Replays tokens loaded from a pre-annotated token file. The text passed
/// at call time must be the text the file was produced from; surfaces are
/// checked against it by annotate().
class PreAnnotatedTagger {
 public:
  explicit PreAnnotatedTagger(std::vector<AnnotatedToken> tokens)
      : tokens_(std::move(tokens)) {}
  std::vector<AnnotatedToken> operator()(std::string_view) const {
    return tokens_;
  }

 private:
  std::vector<AnnotatedToken> tokens_;
};

/// Throws SpanError naming the first span that is out of bounds, overlaps
/// or precedes its predecessor, or whose surface differs from the text.
void validate_tokens(std::string_view text,
                     const std::vector<AnnotatedToken>& tokens);

/// Runs `tagger` and validates its output. Empty text is a ValidationError.
std::vector<AnnotatedToken> annotate(std::string_view text,
                                     const Tagger& tagger);
/// annotate() with the bundled RuleTagger.
std::vector<AnnotatedToken> annotate(std::string_view text);

/// Token file: one token per line, tab separated:
///   surface  lemma  POS  start  end  compound(0|1)
/// Lines starting with '#' and blank lines are ignored.
std::vector<AnnotatedToken> parse_token_file(std::string_view contents);
std::string format_token_file(const std::vector<AnnotatedToken>& tokens);

enum class MaskMode { kRegular, kPartialLifting, kStrict, kLenient };

std::string_view mask_mode_name(MaskMode mode);  // "regular", "partial", ...
MaskMode parse_mask_mode(std::string_view name);

/// Task-specific masking exclusions on top of the content-word rule.
struct ExclusionRules {
  /// Tokens starting with a digit.
  bool exclude_numbers = true;
  /// Tokens containing + - / * (and '=' when equals_is_math_symbol).
  bool exclude_math_symbols = false;
  bool equals_is_math_symbol = false;
  /// Alphabetic tokens of length one ("y", "A").
  bool exclude_single_char_vars = false;
  /// Byte ranges that must stay literal (options, derivations, ...).
  std::vector<Span> protected_spans;
};

/// Indices of tokens eligible for masking under `mode` and `rules`.
///
/// Only content words qualify. Lenient mode additionally drops every verb
/// and every token whose lemma also occurs as a verb elsewhere in the list.
std::vector<std::size_t> maskable_tokens(
    const std::vector<AnnotatedToken>& tokens, MaskMode mode,
    const ExclusionRules& rules);

}  // namespace maskeval
