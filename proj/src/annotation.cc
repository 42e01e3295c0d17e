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

#include "maskeval/annotation.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <sstream>
#include <unordered_set>

#include "maskeval/error.hpp"
#include "maskeval/lexicon.hpp"

namespace maskeval {
namespace {

constexpr std::array<std::string_view, 9> kPosNames = {
    "NOUN", "PROPN", "VERB", "ADJ", "ADV", "FUNCTION", "NUMBER", "SYMBOL",
    "OTHER"};

bool is_ascii_alpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Byte length of a UTF-8 sequence that the tagger treats as punctuation,
// or 0 when the sequence at `i` is not punctuation.
std::size_t utf8_punct_len(std::string_view text, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(text[i]);
  if (b0 == 0xC2 && i + 1 < text.size()) return 2;  // U+0080..U+00BF
  if (b0 == 0xC3 && i + 1 < text.size()) {
    const auto b1 = static_cast<unsigned char>(text[i + 1]);
    if (b1 == 0x97 || b1 == 0xB7) return 2;  // multiplication, division
  }
  if (b0 == 0xE2 && i + 2 < text.size()) {
    const auto b1 = static_cast<unsigned char>(text[i + 1]);
    if (b1 == 0x80 || b1 == 0x81) return 3;  // general punctuation block
  }
  return 0;
}

bool is_curly_apostrophe(std::string_view text, std::size_t i) {
  return text.substr(i, 3) == "\xE2\x80\x99";
}

// A byte that can continue a word: ASCII alphanumerics and any non-ASCII
// byte that is not part of a punctuation sequence.
bool is_word_byte(std::string_view text, std::size_t i) {
  const char c = text[i];
  if (is_ascii_alpha(c) || is_ascii_digit(c)) return true;
  const auto b = static_cast<unsigned char>(c);
  if (b < 0x80) return false;
  if (b >= 0xC0) return utf8_punct_len(text, i) == 0;
  return true;  // continuation byte
}

std::size_t utf8_len(unsigned char lead) {
  if (lead >= 0xF0) return 4;
  if (lead >= 0xE0) return 3;
  if (lead >= 0xC0) return 2;
  return 1;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

// Strips -ed / -ing leaving a verb base; empty when nothing applies.
std::string strip_verbal(std::string_view lower) {
  std::string stem;
  if (ends_with(lower, "ing") && lower.size() > 5) {
    stem = std::string(lower.substr(0, lower.size() - 3));
  } else if (ends_with(lower, "ing") && lower.size() == 5) {
    // suing, using: only when the short base is a known word
    stem = std::string(lower.substr(0, 2)) + "e";
    return lexicon::open_class_pos(stem) ? stem : std::string();
  } else if (ends_with(lower, "ied") && lower.size() > 4) {
    return std::string(lower.substr(0, lower.size() - 3)) + "y";
  } else if (ends_with(lower, "ed") && lower.size() > 4) {
    stem = std::string(lower.substr(0, lower.size() - 2));
  } else {
    return {};
  }
  if (lexicon::open_class_pos(stem)) return stem;
  if (lexicon::open_class_pos(stem + "e")) return stem + "e";
  const auto n = stem.size();
  if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) &&
      stem[n - 1] != 'l' && stem[n - 1] != 's' && stem[n - 1] != 'z') {
    return stem.substr(0, n - 1);
  }
  for (std::string_view tail : {"at", "iz", "iv", "bl", "pl", "tl", "dl",
                                "ur", "c", "v", "us", "in"}) {
    if (ends_with(stem, tail) && !ends_with(stem, "ain") &&
        !ends_with(stem, "oin")) {
      return stem + "e";
    }
  }
  return stem;
}

// Strips plural / third-person -s; empty when nothing applies.
std::string strip_plural(std::string_view lower) {
  if (lower.size() > 4 && ends_with(lower, "ies")) {
    return std::string(lower.substr(0, lower.size() - 3)) + "y";
  }
  if (lower.size() > 3 && ends_with(lower, "s")) {
    const auto base = lower.substr(0, lower.size() - 1);
    if (lexicon::open_class_pos(base)) return std::string(base);  // causes, uses
  }
  if (lower.size() > 3 && ends_with(lower, "es")) {
    const auto base = lower.substr(0, lower.size() - 2);
    if (ends_with(base, "ss") || ends_with(base, "x") || ends_with(base, "z") ||
        ends_with(base, "ch") || ends_with(base, "sh")) {
      return std::string(base);
    }
  }
  if (lower.size() > 3 && ends_with(lower, "s") && !ends_with(lower, "ss") &&
      !ends_with(lower, "us") && !ends_with(lower, "is")) {
    return std::string(lower.substr(0, lower.size() - 1));
  }
  return {};
}

Pos suffix_heuristic(std::string_view lower) {
  if (lower.size() > 4 && ends_with(lower, "ly")) return Pos::kAdv;
  if (lower.size() > 5 && ends_with(lower, "ing")) return Pos::kVerb;
  if (lower.size() > 4 && ends_with(lower, "ed")) return Pos::kVerb;
  for (std::string_view s : {"tion", "sion", "ment", "ness", "ity", "ance",
                             "ence", "ship", "ism", "ist", "er", "or", "age",
                             "ure", "dom", "hood"}) {
    if (lower.size() > s.size() + 2 && ends_with(lower, s)) return Pos::kNoun;
  }
  for (std::string_view s : {"ous", "ful", "ive", "able", "ible", "al", "ic",
                             "less", "ish", "ary", "ant", "ent"}) {
    if (lower.size() > s.size() + 2 && ends_with(lower, s)) return Pos::kAdj;
  }
  for (std::string_view s : {"ize", "ise", "ify", "ate"}) {
    if (lower.size() > s.size() + 2 && ends_with(lower, s)) return Pos::kVerb;
  }
  return Pos::kNoun;
}

// Part of speech for a lowercase open-class word.
Pos classify_open(std::string_view lower) {
  if (auto pos = lexicon::open_class_pos(lower)) return *pos;
  if (auto irr = lexicon::irregular_lemma(lower)) {
    if (auto pos = lexicon::open_class_pos(*irr)) {
      return *pos == Pos::kVerb ? Pos::kVerb : *pos;
    }
  }
  if (auto base = strip_plural(lower); !base.empty()) {
    if (auto pos = lexicon::open_class_pos(base)) return *pos;
  }
  if (auto base = strip_verbal(lower); !base.empty()) {
    if (lexicon::open_class_pos(base)) return Pos::kVerb;
  }
  if (lower.size() > 4 && ends_with(lower, "ly")) {
    if (lexicon::open_class_pos(lower.substr(0, lower.size() - 2)) ==
        Pos::kAdj) {
      return Pos::kAdv;
    }
  }
  return suffix_heuristic(lower);
}

struct RawToken {
  Span span;
  bool symbol = false;
};

// Splits text into word runs and punctuation tokens; whitespace is gap.
std::vector<RawToken> segment(std::string_view text) {
  std::vector<RawToken> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (!is_word_byte(text, i)) {
      std::size_t len = 1;
      if (static_cast<unsigned char>(c) >= 0x80) {
        len = std::max<std::size_t>(utf8_punct_len(text, i), 1);
      }
      out.push_back({{i, i + len}, true});
      i += len;
      continue;
    }
    const std::size_t start = i;
    const bool numeric_start = is_ascii_digit(c);
    while (i < text.size()) {
      if (is_word_byte(text, i)) {
        const auto b = static_cast<unsigned char>(text[i]);
        i += b >= 0xC0 ? utf8_len(b) : 1;
        continue;
      }
      const char d = text[i];
      const bool next_word = i + 1 < text.size() && is_word_byte(text, i + 1);
      // 15,840.00 and 0.25 stay whole.
      if (numeric_start && (d == ',' || d == '.') && i + 1 < text.size() &&
          is_ascii_digit(text[i + 1]) && is_ascii_digit(text[i - 1])) {
        ++i;
        continue;
      }
      // Hyphenated compounds: ZX-1000, post-recall.
      if (d == '-' && next_word) {
        ++i;
        continue;
      }
      // In-word apostrophes: don't, year's.
      if (d == '\'' && i + 1 < text.size() && is_ascii_alpha(text[i + 1])) {
        ++i;
        continue;
      }
      if (is_curly_apostrophe(text, i) && i + 3 < text.size() &&
          is_ascii_alpha(text[i + 3])) {
        i += 3;
        continue;
      }
      break;
    }
    // Split a possessive 's into its own token.
    const std::string_view word = text.substr(start, i - start);
    std::size_t possessive = 0;
    if (word.size() > 2 && ends_with(word, "'s")) possessive = 2;
    if (word.size() > 4 && ends_with(word, "\xE2\x80\x99s")) possessive = 4;
    if (possessive) {
      out.push_back({{start, i - possessive}, false});
      out.push_back({{i - possessive, i}, false});
    } else {
      out.push_back({{start, i}, false});
    }
  }
  return out;
}

bool opens_sentence(std::string_view text, const std::vector<RawToken>& raw,
                    std::size_t index) {
  std::size_t j = index;
  while (j > 0) {
    const auto& prev = raw[j - 1];
    const auto gap = text.substr(prev.span.end, raw[j].span.begin - prev.span.end);
    if (gap.find('\n') != std::string_view::npos) return true;
    const auto surf = text.substr(prev.span.begin, prev.span.size());
    if (surf == "(" || surf == "[" || surf == "\"" || surf == "'" ||
        surf == "\xE2\x80\x9C") {
      --j;
      continue;
    }
    return surf == "." || surf == "!" || surf == "?" || surf == ":" ||
           surf == ";";
  }
  return true;
}

AnnotatedToken classify(std::string_view text, const std::vector<RawToken>& raw,
                        std::size_t index) {
  const auto& r = raw[index];
  AnnotatedToken tok;
  tok.span = r.span;
  tok.surface = std::string(text.substr(r.span.begin, r.span.size()));
  const std::string lower = to_lower(tok.surface);
  if (r.symbol) {
    tok.pos = Pos::kSymbol;
    tok.lemma = tok.surface;
    return tok;
  }
  if (lower == "'s" || lower == "\xE2\x80\x99s") {
    tok.pos = Pos::kFunction;
    tok.lemma = "'s";
    return tok;
  }
  const bool has_digit =
      std::any_of(tok.surface.begin(), tok.surface.end(), is_ascii_digit);
  const bool has_hyphen = tok.surface.find('-') != std::string::npos;
  const bool initial = opens_sentence(text, raw, index);
  const bool capitalized = is_upper(tok.surface[0]);
  const bool all_caps =
      std::none_of(tok.surface.begin(), tok.surface.end(),
                   [](char c) { return c >= 'a' && c <= 'z'; });

  if (is_ascii_digit(tok.surface[0]) && !has_hyphen) {
    tok.pos = Pos::kNumber;
  } else if (has_hyphen) {
    tok.compound = true;
    if (has_digit || all_caps || (capitalized && !initial)) {
      tok.pos = Pos::kPropn;
    } else {
      const auto last = lower.substr(lower.rfind('-') + 1);
      tok.pos = classify_open(last);
      if (tok.pos == Pos::kVerb) tok.pos = Pos::kAdj;
    }
  } else if (lexicon::is_number_word(lower)) {
    tok.pos = Pos::kNumber;
  } else if (tok.surface.size() == 1 && capitalized && !initial &&
             tok.surface != "I") {
    tok.pos = Pos::kPropn;  // variable name such as A in "Let A be"
  } else if (lexicon::is_function_word(lower) &&
             !(all_caps && tok.surface.size() > 1 && !initial)) {
    tok.pos = Pos::kFunction;  // "US" mid-sentence is a name, not "us"
  } else if (has_digit || (all_caps && tok.surface.size() > 1) ||
             (capitalized && !initial)) {
    tok.pos = Pos::kPropn;
  } else {
    tok.pos = classify_open(lower);
  }

  if (tok.compound && tok.pos != Pos::kPropn) {
    const auto cut = lower.rfind('-') + 1;
    tok.lemma = lower.substr(0, cut) + lemmatize(lower.substr(cut), tok.pos);
  } else {
    tok.lemma = lemmatize(tok.surface, tok.pos);
  }
  return tok;
}

}  // namespace

std::string_view pos_name(Pos pos) {
  return kPosNames[static_cast<std::size_t>(pos)];
}

Pos parse_pos(std::string_view label) {
  for (std::size_t i = 0; i < kPosNames.size(); ++i) {
    if (kPosNames[i] == label) return static_cast<Pos>(i);
  }
  throw ValidationError("unknown part of speech '" + std::string(label) + "'");
}

bool is_content_pos(Pos pos) {
  return pos == Pos::kNoun || pos == Pos::kPropn || pos == Pos::kVerb ||
         pos == Pos::kAdj || pos == Pos::kAdv;
}

std::string lemmatize(std::string_view surface, Pos pos) {
  const std::string lower = to_lower(surface);
  if (!is_content_pos(pos) || pos == Pos::kPropn) return lower;
  if (auto irr = lexicon::irregular_lemma(lower)) return *irr;
  if (lexicon::open_class_pos(lower)) return lower;
  if (pos == Pos::kNoun || pos == Pos::kVerb) {
    if (auto base = strip_plural(lower); !base.empty()) return base;
  }
  if (pos == Pos::kVerb) {
    if (auto base = strip_verbal(lower); !base.empty()) return base;
  }
  return lower;
}

std::vector<AnnotatedToken> RuleTagger::operator()(std::string_view text) const {
  const auto raw = segment(text);
  std::vector<AnnotatedToken> tokens;
  tokens.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    tokens.push_back(classify(text, raw, i));
  }
  return tokens;
}

void validate_tokens(std::string_view text,
                     const std::vector<AnnotatedToken>& tokens) {
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    auto describe = [&] {
      std::ostringstream os;
      os << "token " << i << " span [" << t.span.begin << ", " << t.span.end
         << ")";
      return os.str();
    };
    if (t.span.begin >= t.span.end) {
      throw SpanError(describe() + " is empty or reversed");
    }
    if (t.span.end > text.size()) {
      throw SpanError(describe() + " runs past end of text");
    }
    if (t.span.begin < prev_end) {
      throw SpanError(describe() + " overlaps or precedes the previous token");
    }
    if (text.substr(t.span.begin, t.span.size()) != t.surface) {
      throw SpanError(describe() + " surface '" + t.surface +
                      "' does not match the text");
    }
    prev_end = t.span.end;
  }
}

std::vector<AnnotatedToken> annotate(std::string_view text,
                                     const Tagger& tagger) {
  if (text.empty()) throw ValidationError("annotate: text is empty");
  auto tokens = tagger(text);
  validate_tokens(text, tokens);
  return tokens;
}

std::vector<AnnotatedToken> annotate(std::string_view text) {
  return annotate(text, RuleTagger{});
}

std::vector<AnnotatedToken> parse_token_file(std::string_view contents) {
  std::vector<AnnotatedToken> tokens;
  std::size_t line_no = 0;
  for (auto line : split_lines(contents)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    auto fail = [&](const std::string& what) {
      throw ValidationError("token file line " + std::to_string(line_no) +
                            ": " + what);
    };
    if (fields.size() != 6) fail("expected 6 tab-separated fields");
    auto parse_size = [&](std::string_view s, const char* name) {
      std::size_t v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) {
        fail(std::string("bad ") + name + " '" + std::string(s) + "'");
      }
      return v;
    };
    AnnotatedToken t;
    t.surface = std::string(fields[0]);
    t.lemma = std::string(fields[1]);
    t.pos = parse_pos(fields[2]);
    t.span = {parse_size(fields[3], "start"), parse_size(fields[4], "end")};
    if (fields[5] != "0" && fields[5] != "1") fail("compound must be 0 or 1");
    t.compound = fields[5] == "1";
    tokens.push_back(std::move(t));
  }
  return tokens;
}

std::string format_token_file(const std::vector<AnnotatedToken>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    out += t.surface + '\t' + t.lemma + '\t' + std::string(pos_name(t.pos)) +
           '\t' + std::to_string(t.span.begin) + '\t' +
           std::to_string(t.span.end) + '\t' + (t.compound ? "1" : "0") + '\n';
  }
  return out;
}

std::string_view mask_mode_name(MaskMode mode) {
  switch (mode) {
    case MaskMode::kRegular:
      return "regular";
    case MaskMode::kPartialLifting:
      return "partial";
    case MaskMode::kStrict:
      return "strict";
    case MaskMode::kLenient:
      return "lenient";
  }
  return "regular";
}

MaskMode parse_mask_mode(std::string_view name) {
  const auto lower = to_lower(name);
  if (lower == "regular") return MaskMode::kRegular;
  if (lower == "partial" || lower == "partial_lifting" ||
      lower == "partial-lifting") {
    return MaskMode::kPartialLifting;
  }
  if (lower == "strict") return MaskMode::kStrict;
  if (lower == "lenient") return MaskMode::kLenient;
  throw ValidationError("unknown masking mode '" + std::string(name) + "'");
}

std::vector<std::size_t> maskable_tokens(
    const std::vector<AnnotatedToken>& tokens, MaskMode mode,
    const ExclusionRules& rules) {
  std::unordered_set<std::string> verb_lemmas;
  if (mode == MaskMode::kLenient) {
    for (const auto& t : tokens) {
      if (t.pos == Pos::kVerb) verb_lemmas.insert(t.lemma);
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (!is_content_pos(t.pos)) continue;
    if (mode == MaskMode::kLenient &&
        (t.pos == Pos::kVerb || verb_lemmas.contains(t.lemma))) {
      continue;
    }
    if (rules.exclude_numbers && !t.surface.empty() &&
        is_ascii_digit(t.surface[0])) {
      continue;
    }
    if (rules.exclude_math_symbols) {
      const char* symbols = rules.equals_is_math_symbol ? "+-/*=" : "+-/*";
      if (t.surface.find_first_of(symbols) != std::string::npos) continue;
    }
    if (rules.exclude_single_char_vars && t.surface.size() == 1 &&
        is_ascii_alpha(t.surface[0])) {
      continue;
    }
    if (std::any_of(rules.protected_spans.begin(), rules.protected_spans.end(),
                    [&](const Span& s) { return s.intersects(t.span); })) {
      continue;
    }
    out.push_back(i);
  }
  return out;
}

}  // namespace maskeval
