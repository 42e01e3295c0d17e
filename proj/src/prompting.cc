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

#include "maskeval/prompting.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"

#include "maskeval/error.hpp"

namespace maskeval {
namespace {

using nlohmann::json;

constexpr std::string_view kQaPreamble =
    "The following is a text and metadata related to the code terms within the "
    "text. Answer the question concisely according to the instructions.\n"
    "## Instructions\n"
    "- Choose the answer from the options and respond with the corresponding "
    "number.\n"
    "- Respond in JSON format as {'basis': str, 'answer': int}\n"
    "- Use only the text as a reference for the basis\n";

bool is_alnum(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
}

bool rationale_reveals_answer(std::string_view rationale, int answer_index) {
  const char letter = static_cast<char>('A' + answer_index - 1);
  for (std::size_t i = 0; i + 1 < rationale.size(); ++i) {
    if (rationale[i] != letter || rationale[i + 1] != ')') continue;
    if (i == 0 || !is_alnum(rationale[i - 1])) return true;
  }
  return false;
}

void append_section(std::string& source, std::string_view text, Span& span) {
  if (!source.empty()) source += '\n';
  span.begin = source.size();
  source += text;
  span.end = source.size();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << contents;
}

}  // namespace

std::string prompt_id(std::string_view item_id, MaskMode mode, double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "r%.2f", rate);
  return std::string(item_id) + "__" + std::string(mask_mode_name(mode)) + "__" + buf;
}

QaLayout qa_layout(const QAItem& item, std::optional<EvidenceMode> evidence_mode) {
  QaLayout layout;
  std::optional<std::string> text;
  if (item.source == SourceTag::kAqa && evidence_mode) {
    if (*evidence_mode != EvidenceMode::kCase3NoRationale) {
      if (!item.rationale || item.rationale->empty()) {
        throw ValidationError("item '" + item.id + "' has no rationale for " +
                              std::string(evidence_mode_name(*evidence_mode)));
      }
      if (*evidence_mode == EvidenceMode::kCase1SameNumbersNoAnswer &&
          rationale_reveals_answer(*item.rationale, item.answer_index)) {
        throw ValidationError("item '" + item.id +
                              "': case1 rationale names the correct option");
      }
      text = *item.rationale;
      layout.text_is_rationale = true;
    }
  } else if (!item.evidence.empty()) {
    text = item.evidence;
  }
  if (text) {
    Span s;
    append_section(layout.source, *text, s);
    layout.text = s;
  }
  append_section(layout.source, item.question, layout.question);
  for (const auto& o : item.options) {
    Span s;
    append_section(layout.source, o, s);
    layout.options.push_back(s);
  }
  return layout;
}

ExclusionRules qa_rules(const QAItem& item, const QaLayout& layout,
                        std::optional<EvidenceMode> evidence_mode) {
  ExclusionRules rules;
  rules.exclude_numbers = true;
  if (item.source == SourceTag::kAqa) {
    rules.protected_spans = layout.options;
    if (evidence_mode == EvidenceMode::kCase3NoRationale) {
      rules.exclude_math_symbols = true;
      rules.equals_is_math_symbol = true;
      rules.exclude_single_char_vars = true;
    }
  }
  return rules;
}

MaskedQa mask_qa_item(const QAItem& item, std::optional<EvidenceMode> evidence_mode,
                      MaskMode mode, double rate, std::uint64_t seed,
                      MetaGenerator& generator, const Tagger& tagger) {
  MaskedQa out;
  out.layout = qa_layout(item, evidence_mode);
  out.tokens = annotate(out.layout.source, tagger);
  MaskRequest req;
  req.mode = mode;
  req.rate = rate;
  req.seed = seed;
  req.rules = qa_rules(item, out.layout, evidence_mode);
  out.result = mask_text(out.layout.source, out.tokens, req, generator);
  return out;
}

MskQaParts qa_parts(const MaskedQa& masked) {
  const auto& doc = masked.result.doc;
  MskQaParts parts;
  if (masked.layout.text) parts.text = render_range(doc, *masked.layout.text);
  parts.text_is_rationale = masked.layout.text_is_rationale;
  parts.question = render_range(doc, masked.layout.question);
  for (const auto& s : masked.layout.options) parts.options.push_back(render_range(doc, s));
  parts.table = doc.code_table;
  parts.params = doc.params;
  return parts;
}

std::string python_list_repr(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& s = items[i];
    const bool dq = s.find('\'') != std::string::npos && s.find('"') == std::string::npos;
    const char q = dq ? '"' : '\'';
    if (i) out += ", ";
    out += q;
    for (unsigned char c : s) {
      if (c == '\\') {
        out += "\\\\";
      } else if (c == static_cast<unsigned char>(q)) {
        out += '\\';
        out += static_cast<char>(c);
      } else if (c == '\n') {
        out += "\\n";
      } else if (c == '\r') {
        out += "\\r";
      } else if (c == '\t') {
        out += "\\t";
      } else if (c < 0x20 || c == 0x7f) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "\\x%02x", c);
        out += buf;
      } else {
        out += static_cast<char>(c);
      }
    }
    out += q;
  }
  return out + "]";
}

PromptBundle build_mskqa_prompt(const QAItem& item, const MskQaParts& parts,
                                std::optional<EvidenceMode> evidence_mode) {
  if (parts.question.empty()) {
    throw ValidationError("item '" + item.id + "': masked question is missing");
  }
  if (parts.options.size() != item.options.size()) {
    throw ValidationError("item '" + item.id + "': expected " +
                          std::to_string(item.options.size()) + " masked options, got " +
                          std::to_string(parts.options.size()));
  }
  const bool wants_rationale = item.source == SourceTag::kAqa && evidence_mode &&
                               *evidence_mode != EvidenceMode::kCase3NoRationale;
  if (wants_rationale && !parts.text) {
    throw ValidationError("item '" + item.id + "': masked rationale is missing");
  }
  std::string p(kQaPreamble);
  const bool omit_text = item.source == SourceTag::kAqa &&
                         evidence_mode == EvidenceMode::kCase3NoRationale;
  if (parts.text && !omit_text) {
    p += parts.text_is_rationale ? "## Text (Rationale)\n" : "## Text\n";
    p += *parts.text + "\n";
  }
  p += "## Question\n" + parts.question + "\n";
  std::vector<std::string> numbered;
  for (std::size_t i = 0; i < parts.options.size(); ++i) {
    numbered.push_back(std::to_string(i + 1) + ". " + parts.options[i]);
  }
  p += "## Options\n" + python_list_repr(numbered) + "\n";
  p += "## Metadata\n" + format_meta_table(parts.table);

  PromptBundle b;
  b.prompt_text = std::move(p);
  b.item_id = item.id;
  b.kind = TaskKind::kMskQa;
  b.answer_index = item.answer_index;
  b.params = parts.params;
  return b;
}

CalcLayout calc_layout(const CalcTask& task) {
  CalcLayout layout;
  append_section(layout.source, task.document, layout.document);
  append_section(layout.source, "#Conditions\n" + task.conditions, layout.conditions);
  append_section(layout.source, "#Simulation\n" + task.simulation, layout.simulation);
  return layout;
}

ExclusionRules calc_rules(const CalcLayout& layout, bool restricted) {
  ExclusionRules rules;
  rules.exclude_numbers = true;
  rules.exclude_single_char_vars = true;
  const std::string_view src = layout.source;

  // "#Word" section headers at line starts.
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] != '#' || (i > 0 && src[i - 1] != '\n')) continue;
    std::size_t j = i + 1;
    while (j < src.size() && is_alnum(src[j])) ++j;
    rules.protected_spans.push_back({i, j});
  }

  // Every whole-word occurrence of a formula identifier (NR, E', ...).
  std::set<std::string> idents;
  const auto formulas = find_formula_spans(src);
  for (const auto& f : formulas) {
    for (std::size_t i = f.begin; i < f.end;) {
      if (src[i] >= 'A' && src[i] <= 'Z' && (i == 0 || !is_alnum(src[i - 1]))) {
        std::size_t j = i;
        while (j < f.end && src[j] >= 'A' && src[j] <= 'Z') ++j;
        if (j == f.end || !is_alnum(src[j])) idents.emplace(src.substr(i, j - i));
        i = j;
      } else {
        ++i;
      }
    }
  }
  for (const auto& id : idents) {
    for (auto pos = src.find(id); pos != std::string_view::npos; pos = src.find(id, pos + 1)) {
      const auto end = pos + id.size();
      const bool left = pos == 0 || !is_alnum(src[pos - 1]);
      const bool right = end == src.size() || !is_alnum(src[end]);
      if (left && right) rules.protected_spans.push_back({pos, end});
    }
  }
  if (restricted) {
    rules.protected_spans.insert(rules.protected_spans.end(), formulas.begin(),
                                 formulas.end());
  }
  return rules;
}

std::vector<CodeScope> calc_scopes(const CalcLayout& layout) {
  return {{layout.document, "m", CodeStyle::kAngleHash},
          {{layout.document.end, layout.source.size()}, "t", CodeStyle::kHash}};
}

MaskedCalc mask_calc_task(const CalcTask& task, bool restricted, MaskMode mode,
                          double rate, std::uint64_t seed, MetaGenerator& generator,
                          const Tagger& tagger) {
  MaskedCalc out;
  out.layout = calc_layout(task);
  out.tokens = annotate(out.layout.source, tagger);
  out.rules = calc_rules(out.layout, restricted);
  MaskRequest req;
  req.mode = mode;
  req.rate = rate;
  req.seed = seed;
  req.rules = out.rules;
  req.scopes = calc_scopes(out.layout);
  out.result = mask_text(out.layout.source, out.tokens, req, generator);
  return out;
}

MskCalParts calc_parts(const MaskedCalc& masked) {
  const auto& doc = masked.result.doc;
  for (const auto& seg : doc.segments) {
    if (!seg.is_code) continue;
    for (const auto& p : masked.rules.protected_spans) {
      if (seg.span.intersects(p)) {
        throw SpanError("code " + seg.text + " covers protected span [" +
                        std::to_string(p.begin) + ", " + std::to_string(p.end) + ")");
      }
    }
    for (const auto& t : masked.tokens) {
      if (t.pos == Pos::kNumber && seg.span.intersects(t.span)) {
        throw SpanError("code " + seg.text + " covers numeric literal '" + t.surface + "'");
      }
    }
  }
  MskCalParts parts;
  parts.body = render(doc);
  for (const auto& c : doc.code_table) {
    (c.code.front() == 'm' ? parts.document_table : parts.simulation_table).push_back(c);
  }
  parts.params = doc.params;
  return parts;
}

PromptBundle build_mskcal_prompt(const CalcTask& task, const MskCalParts& parts,
                                 bool restricted) {
  (void)restricted;  // enforced when the parts were produced
  if (parts.body.empty()) {
    throw ValidationError("task '" + task.id + "': masked body is missing");
  }
  std::string shape;
  for (const auto& [name, _] : task.targets) {
    if (!shape.empty()) shape += ", ";
    shape += "\"" + canonical_variable_name(name) + "\": number";
  }
  std::string p = parts.body + "\n";
  p += "Fill in every blank in the simulation and respond in JSON format as {" +
       shape + "}\n";
  p += format_calc_meta_table(parts.document_table, "Document") + "\n";
  p += format_calc_meta_table(parts.simulation_table, "Conditions and Simulation");

  PromptBundle b;
  b.prompt_text = std::move(p);
  b.item_id = task.id;
  b.kind = TaskKind::kMskCal;
  for (const auto& [name, v] : task.targets) b.calc_key[canonical_variable_name(name)] = v;
  b.params = parts.params;
  return b;
}

void dump_prompts(const std::string& dir, const std::vector<PromptBundle>& bundles) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  fs::create_directories(root / "prompts");
  json keys = json::object();
  json manifest = json::object();
  for (const auto& b : bundles) {
    const auto id = prompt_id(b.item_id, b.params.mode, b.params.rate);
    write_file(root / "prompts" / (id + ".txt"), b.prompt_text);
    if (b.kind == TaskKind::kMskQa) {
      keys[id] = {{"answer_index", b.answer_index ? json(*b.answer_index) : json(nullptr)}};
    } else {
      keys[id] = {{"targets", b.calc_key}};
    }
    manifest[id] = {{"item_id", b.item_id},
                    {"kind", task_kind_name(b.kind)},
                    {"mode", mask_mode_name(b.params.mode)},
                    {"rate", b.params.rate},
                    {"seed", b.params.seed},
                    {"prompt", "prompts/" + id + ".txt"},
                    {"answer_key", "answer_keys.json#" + id}};
  }
  write_file(root / "answer_keys.json", keys.dump(2) + "\n");
  write_file(root / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace maskeval
