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

#include "maskeval/masking.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>

#include "maskeval/error.hpp"
#include "maskeval/lexicon.hpp"
#include "maskeval/llm_client.hpp"

namespace maskeval {
namespace {

using nlohmann::json;

std::string ordinal_code(std::string_view ns, std::size_t ordinal) {
  std::string digits = std::to_string(ordinal);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return std::string(ns) + digits;
}

Pos first_pos(std::string_view pos_label) {
  const auto comma = pos_label.find(',');
  return parse_pos(trim(pos_label.substr(0, comma)));
}

}  // namespace

std::string render_code(std::string_view code, CodeStyle style) {
  switch (style) {
    case CodeStyle::kAngle:
      return "<" + std::string(code) + ">";
    case CodeStyle::kAngleHash:
      return "<#" + std::string(code) + ">";
    case CodeStyle::kHash:
      return "#" + std::string(code);
  }
  return std::string(code);
}

std::string_view code_style_name(CodeStyle style) {
  switch (style) {
    case CodeStyle::kAngle:
      return "angle";
    case CodeStyle::kAngleHash:
      return "angle_hash";
    case CodeStyle::kHash:
      return "hash";
  }
  return "angle";
}

CodeStyle parse_code_style(std::string_view name) {
  if (name == "angle") return CodeStyle::kAngle;
  if (name == "angle_hash") return CodeStyle::kAngleHash;
  if (name == "hash") return CodeStyle::kHash;
  throw ValidationError("unknown code style '" + std::string(name) + "'");
}

std::vector<std::size_t> plan_mask(const std::vector<AnnotatedToken>& tokens,
                                   MaskMode mode, double rate,
                                   std::uint64_t seed,
                                   const ExclusionRules& rules) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw ValidationError("masking rate must lie in [0, 1], got " +
                          format_number(rate));
  }
  const auto maskable = maskable_tokens(tokens, mode, rules);
  const auto perm = seeded_permutation(maskable.size(), seed);
  const auto count = round_half_up_count(rate, maskable.size());
  std::vector<std::size_t> selection;
  selection.reserve(count);
  for (std::size_t k = 0; k < count; ++k) selection.push_back(maskable[perm[k]]);
  return selection;
}

CodeAssignment assign_codes(const std::vector<AnnotatedToken>& tokens,
                            const std::vector<std::size_t>& selection,
                            std::string_view ns, CodeStyle style) {
  const std::size_t end = tokens.empty() ? 0 : tokens.back().span.end;
  return assign_codes(tokens, selection,
                      std::vector<CodeScope>{{{0, end}, std::string(ns), style}});
}

CodeAssignment assign_codes(const std::vector<AnnotatedToken>& tokens,
                            const std::vector<std::size_t>& selection,
                            const std::vector<CodeScope>& scopes) {
  std::vector<std::size_t> ordered(selection);
  std::sort(ordered.begin(), ordered.end());
  ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

  CodeAssignment out;
  std::map<std::string, std::size_t> by_key;       // ns \x1f lemma -> row
  std::map<std::string, std::size_t> next_ordinal;  // ns -> last ordinal
  for (std::size_t index : ordered) {
    if (index >= tokens.size()) {
      throw SpanError("selection index " + std::to_string(index) +
                      " is past the token list");
    }
    const auto& tok = tokens[index];
    const CodeScope* scope = nullptr;
    for (const auto& s : scopes) {
      if (s.span.contains(tok.span)) {
        scope = &s;
        break;
      }
    }
    if (scope == nullptr) {
      throw SpanError("token '" + tok.surface + "' at " +
                      std::to_string(tok.span.begin) +
                      " lies outside every code scope");
    }
    const std::string key = scope->ns + '\x1f' + tok.lemma;
    auto it = by_key.find(key);
    std::size_t row;
    if (it == by_key.end()) {
      row = out.table.size();
      by_key.emplace(key, row);
      MaskCode code;
      code.code = ordinal_code(scope->ns, ++next_ordinal[scope->ns]);
      code.pos_label = std::string(pos_name(tok.pos));
      out.table.push_back(std::move(code));
      out.lemmas.push_back(tok.lemma);
      out.surfaces.push_back(tok.surface);
      out.styles.push_back(scope->style);
    } else {
      row = it->second;
      auto& label = out.table[row].pos_label;
      const std::string pos(pos_name(tok.pos));
      bool present = false;
      std::string_view rest(label);
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        if (trim(rest.substr(0, comma)) == pos) present = true;
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      if (!present) label += ", " + pos;
    }
    const auto& code = out.table[row].code;
    out.recovery_map[code].push_back({tok.span, tok.surface});
    out.token_codes.emplace(index, code);
  }
  return out;
}

std::string_view default_category(Pos pos) {
  switch (pos) {
    case Pos::kNoun:
      return "General";
    case Pos::kPropn:
      return "Proper Name";
    default:
      return "";
  }
}

FallbackMetaGenerator::FallbackMetaGenerator(double solid_probability,
                                             std::uint64_t seed)
    : solid_probability_(solid_probability), seed_(seed) {
  if (!(solid_probability >= 0.0 && solid_probability <= 1.0)) {
    throw ValidationError("solid-mask probability must lie in [0, 1]");
  }
}

std::vector<MetaResult> FallbackMetaGenerator::describe(
    const std::vector<MetaRequest>& requests, std::string_view) {
  std::vector<MetaResult> out;
  out.reserve(requests.size());
  for (const auto& req : requests) {
    MetaResult r;
    const auto pos = first_pos(req.pos_label);
    if (auto hyp = lexicon::hypernym(req.lemma)) {
      r.category = hyp->category.empty() ? std::string(default_category(pos))
                                         : std::string(hyp->category);
      r.meaning = std::string(hyp->meaning);
    } else {
      r.category = std::string(default_category(pos));
    }
    if (solid_probability_ > 0.0 &&
        unit_interval(hash_combine(seed_, fnv1a64(req.lemma))) <
            solid_probability_) {
      r.meaning.clear();
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string LlmMetaGenerator::build_prompt(
    const std::vector<MetaRequest>& requests, std::string_view source) {
  std::ostringstream os;
  os << "Create meta-information for the masked words listed below. For each "
        "code give an abstract category and a short meaning that describes "
        "the word without using the word itself.\n"
        "Respond in JSON format as [{'code': str, 'category': str, "
        "'meaning': str}]\n"
        "## Source\n"
     << source << "\n## Words\ncode | part_of_speech | word\n";
  for (const auto& r : requests) {
    os << r.code << " | " << r.pos_label << " | " << r.surface << "\n";
  }
  return os.str();
}

std::vector<MetaResult> LlmMetaGenerator::describe(
    const std::vector<MetaRequest>& requests, std::string_view source) {
  std::vector<MetaResult> out(requests.size());
  for (auto& r : out) r.failed = true;
  if (requests.empty()) return out;

  std::string raw;
  try {
    CompletionContext ctx;
    ctx.item_id = "meta";
    raw = completer_->complete(build_prompt(requests, source), ctx);
  } catch (const TransportError&) {
    return out;
  }
  const auto open = raw.find('[');
  const auto close = raw.rfind(']');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    return out;
  }
  json parsed = json::parse(raw.substr(open, close - open + 1), nullptr, false);
  if (parsed.is_discarded() || !parsed.is_array()) return out;

  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < requests.size(); ++i) row_of[requests[i].code] = i;
  for (const auto& entry : parsed) {
    if (!entry.is_object() || !entry.contains("code")) continue;
    if (!entry["code"].is_string()) continue;
    auto it = row_of.find(entry["code"].get<std::string>());
    if (it == row_of.end()) continue;
    auto& r = out[it->second];
    if (entry.contains("category") && entry["category"].is_string()) {
      r.category = entry["category"].get<std::string>();
    }
    if (entry.contains("meaning") && entry["meaning"].is_string()) {
      r.meaning = entry["meaning"].get<std::string>();
    }
    r.failed = false;
  }
  return out;
}

GenerationReport generate_meta(CodeAssignment& assignment,
                               MetaGenerator& generator, MaskMode mode,
                               std::string_view source) {
  std::vector<MetaRequest> requests;
  requests.reserve(assignment.table.size());
  for (std::size_t i = 0; i < assignment.table.size(); ++i) {
    requests.push_back({assignment.table[i].code, assignment.lemmas[i],
                        assignment.surfaces[i], assignment.table[i].pos_label});
  }
  auto results = generator.describe(requests, source);
  if (results.size() != requests.size()) {
    throw Error("meta generator returned " + std::to_string(results.size()) +
                " entries for " + std::to_string(requests.size()) + " codes");
  }
  GenerationReport report;
  report.codes = assignment.table.size();
  for (std::size_t i = 0; i < results.size(); ++i) {
    auto& code = assignment.table[i];
    code.category = std::move(results[i].category);
    code.meaning = results[i].failed ? std::string() : std::move(results[i].meaning);
    if (results[i].failed) ++report.failed;
    if (mode == MaskMode::kStrict) code.meaning.clear();
    if (code.solid()) ++report.solid;
  }
  return report;
}

MaskedDocument apply_mask(std::string_view source,
                          const std::vector<AnnotatedToken>& tokens,
                          const CodeAssignment& assignment,
                          const MaskParams& params,
                          std::size_t maskable_count) {
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < assignment.table.size(); ++i) {
    row_of[assignment.table[i].code] = i;
  }
  std::set<std::string> lifted;
  if (params.mode == MaskMode::kPartialLifting) {
    for (const auto& c : assignment.table) {
      if (c.solid()) lifted.insert(c.code);
    }
  }

  MaskedDocument doc;
  doc.params = params;
  doc.maskable_count = maskable_count;
  doc.masked_count = assignment.token_codes.size();

  std::size_t cursor = 0;
  auto emit_literal = [&](std::size_t end) {
    if (end > cursor) {
      doc.segments.push_back(
          {false, std::string(source.substr(cursor, end - cursor)), {cursor, end},
           CodeStyle::kAngle});
    }
    cursor = end;
  };
  for (const auto& [index, code] : assignment.token_codes) {
    if (index >= tokens.size()) {
      throw SpanError("code " + code + " refers to token " +
                      std::to_string(index) + " past the token list");
    }
    const auto& tok = tokens[index];
    if (tok.span.end > source.size() || tok.span.begin < cursor ||
        source.substr(tok.span.begin, tok.span.size()) != tok.surface) {
      throw SpanError("token '" + tok.surface + "' at [" +
                      std::to_string(tok.span.begin) + ", " +
                      std::to_string(tok.span.end) +
                      ") is inconsistent with the source");
    }
    auto row = row_of.find(code);
    if (row == row_of.end()) {
      throw SpanError("code " + code + " missing from the code table");
    }
    if (lifted.contains(code)) continue;
    emit_literal(tok.span.begin);
    doc.segments.push_back(
        {true, code, tok.span, assignment.styles[row->second]});
    cursor = tok.span.end;
  }
  emit_literal(source.size());

  for (const auto& c : assignment.table) {
    if (!lifted.contains(c.code)) doc.code_table.push_back(c);
  }
  for (const auto& [code, entries] : assignment.recovery_map) {
    if (!lifted.contains(code)) doc.recovery_map.emplace(code, entries);
  }
  return doc;
}

std::string unmask(const MaskedDocument& doc) {
  std::string out;
  for (const auto& seg : doc.segments) {
    if (!seg.is_code) {
      out += seg.text;
      continue;
    }
    auto it = doc.recovery_map.find(seg.text);
    if (it == doc.recovery_map.end()) {
      throw SpanError("code " + seg.text + " has no recovery entry");
    }
    auto entry = std::find_if(it->second.begin(), it->second.end(),
                              [&](const RecoveryEntry& e) { return e.span == seg.span; });
    if (entry == it->second.end()) {
      throw SpanError("code " + seg.text + " has no recovery entry at offset " +
                      std::to_string(seg.span.begin));
    }
    out += entry->surface;
  }
  return out;
}

std::string render(const MaskedDocument& doc) {
  std::string out;
  for (const auto& seg : doc.segments) {
    out += seg.is_code ? render_code(seg.text, seg.style) : seg.text;
  }
  return out;
}

std::string render_range(const MaskedDocument& doc, Span range) {
  std::string out;
  for (const auto& seg : doc.segments) {
    if (!seg.span.intersects(range)) continue;
    if (seg.is_code) {
      if (!range.contains(seg.span)) {
        throw SpanError("code " + seg.text + " straddles the rendered range");
      }
      out += render_code(seg.text, seg.style);
      continue;
    }
    const auto begin = std::max(seg.span.begin, range.begin);
    const auto end = std::min(seg.span.end, range.end);
    out += seg.text.substr(begin - seg.span.begin, end - begin);
  }
  return out;
}

std::string format_meta_table(const std::vector<MaskCode>& table) {
  std::string out = "part_of_speech | category | meaning | code";
  for (const auto& c : table) {
    out += "\n" + c.pos_label + " | " + c.category + " | " + c.meaning + " | " +
           c.code;
  }
  return out;
}

std::string format_calc_meta_table(const std::vector<MaskCode>& table,
                                   std::string_view title) {
  std::string out = "<Meta Information: " + std::string(title) +
                    ">\nNumber Part of Speech Category Meaning";
  for (const auto& c : table) {
    out += "\n" + c.code + " " + c.pos_label + " " + c.category + " " + c.meaning;
  }
  return out;
}

json to_json(const MaskedDocument& doc, bool with_recovery) {
  json j;
  j["params"] = {{"mode", mask_mode_name(doc.params.mode)},
                 {"rate", doc.params.rate},
                 {"seed", doc.params.seed},
                 {"namespace", doc.params.ns}};
  j["maskable_count"] = doc.maskable_count;
  j["masked_count"] = doc.masked_count;
  json segments = json::array();
  for (const auto& s : doc.segments) {
    json seg;
    if (s.is_code) {
      seg["code"] = s.text;
      seg["style"] = code_style_name(s.style);
    } else {
      seg["text"] = s.text;
    }
    seg["span"] = {s.span.begin, s.span.end};
    segments.push_back(std::move(seg));
  }
  j["segments"] = std::move(segments);
  json table = json::array();
  for (const auto& c : doc.code_table) {
    table.push_back({{"code", c.code},
                     {"part_of_speech", c.pos_label},
                     {"category", c.category},
                     {"meaning", c.meaning}});
  }
  j["code_table"] = std::move(table);
  if (with_recovery) {
    json rec = json::object();
    for (const auto& [code, entries] : doc.recovery_map) {
      json list = json::array();
      for (const auto& e : entries) {
        list.push_back({e.span.begin, e.span.end, e.surface});
      }
      rec[code] = std::move(list);
    }
    j["recovery_map"] = std::move(rec);
  }
  return j;
}

MaskedDocument masked_document_from_json(const json& j) {
  try {
    MaskedDocument doc;
    const auto& p = j.at("params");
    doc.params.mode = parse_mask_mode(p.at("mode").get<std::string>());
    doc.params.rate = p.at("rate").get<double>();
    doc.params.seed = p.at("seed").get<std::uint64_t>();
    doc.params.ns = p.at("namespace").get<std::string>();
    doc.maskable_count = j.at("maskable_count").get<std::size_t>();
    doc.masked_count = j.at("masked_count").get<std::size_t>();
    for (const auto& s : j.at("segments")) {
      Segment seg;
      seg.span = {s.at("span").at(0).get<std::size_t>(),
                  s.at("span").at(1).get<std::size_t>()};
      if (s.contains("code")) {
        seg.is_code = true;
        seg.text = s.at("code").get<std::string>();
        seg.style = parse_code_style(s.at("style").get<std::string>());
      } else {
        seg.text = s.at("text").get<std::string>();
      }
      doc.segments.push_back(std::move(seg));
    }
    for (const auto& c : j.at("code_table")) {
      doc.code_table.push_back({c.at("code").get<std::string>(),
                                c.at("part_of_speech").get<std::string>(),
                                c.at("category").get<std::string>(),
                                c.at("meaning").get<std::string>()});
    }
    if (j.contains("recovery_map")) {
      for (const auto& [code, entries] : j.at("recovery_map").items()) {
        auto& list = doc.recovery_map[code];
        for (const auto& e : entries) {
          list.push_back({{e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>()},
                          e.at(2).get<std::string>()});
        }
      }
    }
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed masked document: ") + e.what());
  }
}

MaskResult mask_text(std::string_view source,
                     const std::vector<AnnotatedToken>& tokens,
                     const MaskRequest& request, MetaGenerator& generator) {
  std::vector<CodeScope> scopes = request.scopes;
  if (scopes.empty()) scopes.push_back({{0, source.size()}, "r", CodeStyle::kAngle});

  const auto maskable = maskable_tokens(tokens, request.mode, request.rules);
  const auto selection =
      plan_mask(tokens, request.mode, request.rate, request.seed, request.rules);
  auto assignment = assign_codes(tokens, selection, scopes);

  MaskResult result;
  result.report = generate_meta(assignment, generator, request.mode, source);

  MaskParams params;
  params.mode = request.mode;
  params.rate = request.rate;
  params.seed = request.seed;
  params.ns.clear();
  for (const auto& s : scopes) {
    if (!params.ns.empty()) params.ns += ",";
    params.ns += s.ns;
  }
  result.doc = apply_mask(source, tokens, assignment, params, maskable.size());
  return result;
}

}  // namespace maskeval
