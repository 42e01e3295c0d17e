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

#include "maskeval/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "maskeval/error.hpp"

namespace maskeval {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kUqaPromptHead =
    "Based on the following text, create three simple multiple-choice "
    "questions that can be answered by a middle school student. Ensure that "
    "the questions do not require any background knowledge and can be "
    "answered using only the information provided in the text. Present the "
    "questions in the following format:\n"
    "[Question text]\n"
    "A) [Option A]\n"
    "B) [Option B]\n"
    "C) [Option C]\n"
    "Answer: [Correct option]\n"
    "Text: ";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open corpus file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

[[noreturn]] void fail_at(std::string_view origin, std::size_t line,
                          std::string_view what) {
  throw ValidationError(std::string(origin) + ":" + std::to_string(line) +
                        ": " + std::string(what));
}

const ordered_json& require(const ordered_json& record, const char* field,
                            std::string_view origin, std::size_t line) {
  if (!record.contains(field)) {
    fail_at(origin, line, std::string("missing field '") + field + "'");
  }
  return record[field];
}

std::string require_string(const ordered_json& record, const char* field,
                           std::string_view origin, std::size_t line) {
  const auto& v = require(record, field, origin, line);
  if (!v.is_string()) {
    fail_at(origin, line, std::string("field '") + field + "' must be a string");
  }
  return v.get<std::string>();
}

template <typename Fn>
void for_each_record(std::string_view contents, std::string_view origin,
                     Fn&& fn) {
  std::size_t line_no = 0;
  for (auto line : split_lines(contents)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto record = ordered_json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      fail_at(origin, line_no, "not a JSON object");
    }
    fn(record, line_no);
  }
}

bool is_ident_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
         (c >= '0' && c <= '9') || c == '_';
}

}  // namespace

std::string_view source_tag_name(SourceTag tag) {
  switch (tag) {
    case SourceTag::kRqa:
      return "RQA";
    case SourceTag::kUqa:
      return "UQA";
    case SourceTag::kAqa:
      return "AQA";
    case SourceTag::kOther:
      return "OTHER";
  }
  return "OTHER";
}

SourceTag parse_source_tag(std::string_view name) {
  if (name == "RQA") return SourceTag::kRqa;
  if (name == "UQA") return SourceTag::kUqa;
  if (name == "AQA") return SourceTag::kAqa;
  if (name == "OTHER") return SourceTag::kOther;
  throw ValidationError("unknown source tag '" + std::string(name) + "'");
}

std::string_view evidence_mode_name(EvidenceMode mode) {
  switch (mode) {
    case EvidenceMode::kCase1SameNumbersNoAnswer:
      return "case1";
    case EvidenceMode::kCase2DiffNumbersWithAnswer:
      return "case2";
    case EvidenceMode::kCase3NoRationale:
      return "case3";
  }
  return "case1";
}

EvidenceMode parse_evidence_mode(std::string_view name) {
  const auto lower = to_lower(name);
  if (lower == "case1" || lower == "1") return EvidenceMode::kCase1SameNumbersNoAnswer;
  if (lower == "case2" || lower == "2") return EvidenceMode::kCase2DiffNumbersWithAnswer;
  if (lower == "case3" || lower == "3") return EvidenceMode::kCase3NoRationale;
  throw ValidationError("unknown evidence mode '" + std::string(name) + "'");
}

CorpusSchema parse_corpus_schema(std::string_view name) {
  if (name == "qa") return CorpusSchema::kQa;
  if (name == "calc") return CorpusSchema::kCalc;
  throw ValidationError("unknown corpus schema '" + std::string(name) + "'");
}

void validate(const QAItem& item) {
  if (item.id.empty()) throw ValidationError("item has an empty id");
  auto fail = [&](const std::string& what) {
    throw ValidationError("item '" + item.id + "': " + what);
  };
  if (item.question.empty()) fail("question is empty");
  if (item.options.size() < 2) fail("needs at least two options");
  std::set<std::string> seen;
  for (const auto& o : item.options) {
    if (o.empty()) fail("option text is empty");
    if (!seen.insert(o).second) fail("duplicate option '" + o + "'");
  }
  if (item.answer_index < 1 ||
      item.answer_index > static_cast<int>(item.options.size())) {
    fail("answer " + std::to_string(item.answer_index) + " out of range 1.." +
         std::to_string(item.options.size()));
  }
}

CalcGround calc_ground(const CalcTask& task) {
  return calc_oracle(givens_from_map(task.givens));
}

void validate(const CalcTask& task) {
  if (task.id.empty()) throw ValidationError("task has an empty id");
  auto fail = [&](const std::string& what) {
    throw ValidationError("task '" + task.id + "': " + what);
  };
  CalcGround ground;
  try {
    ground = calc_ground(task);
  } catch (const ValidationError& e) {
    fail(e.what());
  }
  std::set<std::string> known;
  for (const auto& [name, _] : task.givens) known.insert(name);
  for (const auto& [name, value] : task.targets) {
    const auto canonical = canonical_variable_name(name);
    known.insert(canonical);
    auto truth = ground.value(canonical);
    if (!truth) fail("unknown target variable '" + name + "'");
    if (rational_from_double(value) != *truth) {
      fail("target " + name + " = " + format_number(value) +
           " disagrees with the oracle value " +
           format_number(to_double(*truth)));
    }
  }
  for (const auto& v : formula_variables(task.simulation)) {
    if (!known.contains(v)) {
      fail("simulation references '" + v + "' which is neither given nor a target");
    }
  }
}

std::vector<QAItem> parse_qa_corpus(std::string_view contents,
                                    std::string_view origin) {
  std::vector<QAItem> items;
  std::set<std::string> ids;
  for_each_record(contents, origin, [&](const ordered_json& r, std::size_t line) {
    QAItem item;
    item.id = require_string(r, "id", origin, line);
    item.question = require_string(r, "question", origin, line);
    const auto& options = require(r, "options", origin, line);
    if (!options.is_array()) fail_at(origin, line, "field 'options' must be an array");
    for (const auto& o : options) {
      if (!o.is_string()) fail_at(origin, line, "field 'options' must hold strings");
      item.options.push_back(o.get<std::string>());
    }
    const auto& answer = require(r, "answer", origin, line);
    if (!answer.is_number_integer()) {
      fail_at(origin, line, "field 'answer' must be an integer");
    }
    item.answer_index = answer.get<int>();
    item.evidence = require_string(r, "evidence", origin, line);
    if (r.contains("rationale") && !r["rationale"].is_null()) {
      if (!r["rationale"].is_string()) {
        fail_at(origin, line, "field 'rationale' must be a string");
      }
      item.rationale = r["rationale"].get<std::string>();
    }
    try {
      item.source = parse_source_tag(require_string(r, "source", origin, line));
      validate(item);
    } catch (const ValidationError& e) {
      fail_at(origin, line, e.what());
    }
    if (!ids.insert(item.id).second) {
      fail_at(origin, line, "duplicate id '" + item.id + "'");
    }
    items.push_back(std::move(item));
  });
  return items;
}

std::vector<CalcTask> parse_calc_corpus(std::string_view contents,
                                        std::string_view origin) {
  std::vector<CalcTask> tasks;
  std::set<std::string> ids;
  for_each_record(contents, origin, [&](const ordered_json& r, std::size_t line) {
    CalcTask task;
    task.id = require_string(r, "id", origin, line);
    task.document = require_string(r, "document", origin, line);
    task.conditions = require_string(r, "conditions", origin, line);
    task.simulation = require_string(r, "simulation", origin, line);
    const auto& givens = require(r, "givens", origin, line);
    if (!givens.is_object()) fail_at(origin, line, "field 'givens' must be an object");
    for (const auto& [k, v] : givens.items()) {
      if (!v.is_number()) fail_at(origin, line, "given '" + k + "' must be a number");
      task.givens[k] = v.get<double>();
    }
    const auto& targets = require(r, "targets", origin, line);
    if (!targets.is_object()) fail_at(origin, line, "field 'targets' must be an object");
    for (const auto& [k, v] : targets.items()) {
      if (!v.is_number()) fail_at(origin, line, "target '" + k + "' must be a number");
      task.targets.emplace_back(k, v.get<double>());
    }
    try {
      validate(task);
    } catch (const ValidationError& e) {
      fail_at(origin, line, e.what());
    }
    if (!ids.insert(task.id).second) {
      fail_at(origin, line, "duplicate id '" + task.id + "'");
    }
    tasks.push_back(std::move(task));
  });
  return tasks;
}

Corpus load_corpus(const std::string& path, CorpusSchema schema) {
  if (schema == CorpusSchema::kQa) return load_qa_corpus(path);
  return load_calc_corpus(path);
}

std::vector<QAItem> load_qa_corpus(const std::string& path) {
  return parse_qa_corpus(read_file(path), path);
}

std::vector<CalcTask> load_calc_corpus(const std::string& path) {
  return parse_calc_corpus(read_file(path), path);
}

std::string serialize_qa_corpus(const std::vector<QAItem>& items) {
  std::string out;
  for (const auto& item : items) {
    ordered_json r;
    r["id"] = item.id;
    r["question"] = item.question;
    r["options"] = item.options;
    r["answer"] = item.answer_index;
    r["evidence"] = item.evidence;
    if (item.rationale) r["rationale"] = *item.rationale;
    r["source"] = source_tag_name(item.source);
    out += r.dump() + "\n";
  }
  return out;
}

std::string serialize_calc_corpus(const std::vector<CalcTask>& tasks) {
  std::string out;
  for (const auto& t : tasks) {
    ordered_json r;
    r["id"] = t.id;
    r["document"] = t.document;
    r["conditions"] = t.conditions;
    r["simulation"] = t.simulation;
    r["givens"] = ordered_json::object();
    for (const auto& [k, v] : t.givens) r["givens"][k] = v;
    r["targets"] = ordered_json::object();
    for (const auto& [k, v] : t.targets) r["targets"][k] = v;
    out += r.dump() + "\n";
  }
  return out;
}

std::vector<Span> find_formula_spans(std::string_view text) {
  std::vector<Span> spans;
  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    auto line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();
    const auto line = text.substr(line_start, line_end - line_start);
    const auto last_eq = line.rfind('=');
    std::size_t pos = 0;
    while (last_eq != std::string_view::npos) {
      const auto eq = line.find('=', pos);
      if (eq == std::string_view::npos || eq >= last_eq) break;
      // Walk back over spaces, an optional prime, then the variable name.
      std::size_t k = eq;
      while (k > 0 && line[k - 1] == ' ') --k;
      if (k > 0 && line[k - 1] == '\'') --k;
      std::size_t name_end = k;
      while (k > 0 && line[k - 1] >= 'A' && line[k - 1] <= 'Z') --k;
      const bool boundary = k == 0 || !is_ident_char(line[k - 1]);
      if (k < name_end && boundary) {
        spans.push_back({line_start + k, line_start + last_eq + 1});
        break;
      }
      pos = eq + 1;
    }
    if (line_end == text.size()) break;
    line_start = line_end + 1;
  }
  return spans;
}

std::vector<std::string> formula_variables(std::string_view text) {
  std::vector<std::string> names;
  for (const auto& span : find_formula_spans(text)) {
    const auto f = text.substr(span.begin, span.size());
    std::size_t i = 0;
    while (i < f.size()) {
      if (f[i] >= 'A' && f[i] <= 'Z' && (i == 0 || !is_ident_char(f[i - 1]))) {
        std::size_t j = i;
        while (j < f.size() && f[j] >= 'A' && f[j] <= 'Z') ++j;
        if (j < f.size() && is_ident_char(f[j])) {
          i = j;
          continue;
        }
        if (j < f.size() && f[j] == '\'') ++j;
        auto name = canonical_variable_name(f.substr(i, j - i));
        if (std::find(names.begin(), names.end(), name) == names.end()) {
          names.push_back(std::move(name));
        }
        i = j;
      } else {
        ++i;
      }
    }
  }
  return names;
}

std::string build_uqa_generation_prompt(std::string_view document) {
  if (trim(document).empty()) {
    throw ValidationError("question generation needs a non-empty document");
  }
  return std::string(kUqaPromptHead) + std::string(document);
}

std::vector<QAItem> parse_generated_qa(std::string_view response,
                                       std::string_view document,
                                       std::string_view id_prefix) {
  std::vector<QAItem> items;
  std::vector<std::string> question_lines;
  std::vector<std::pair<char, std::string>> options;

  auto option_line = [](std::string_view line, char& letter, std::string& text) {
    std::size_t i = 0;
    const bool paren = !line.empty() && line[0] == '(';
    if (paren) ++i;
    if (i >= line.size() || line[i] < 'A' || line[i] > 'Z') return false;
    letter = line[i++];
    if (i >= line.size()) return false;
    if (line[i] != ')' && !(line[i] == '.' && !paren)) return false;
    ++i;
    text = std::string(trim(line.substr(i)));
    return !text.empty();
  };
  auto reset = [&] {
    question_lines.clear();
    options.clear();
  };

  for (auto raw : split_lines(response)) {
    const auto line = trim(raw);
    if (line.empty()) continue;
    if (starts_with_ci(line, "answer")) {
      auto rest = trim(line.substr(6));
      if (rest.empty() || rest.front() != ':') {
        throw ValidationError("malformed Answer line: '" + std::string(line) + "'");
      }
      rest = trim(rest.substr(1));
      if (!rest.empty() && rest.front() == '[') rest = trim(rest.substr(1));
      if (!rest.empty() && rest.front() == '(') rest = trim(rest.substr(1));
      if (rest.empty()) throw ValidationError("Answer line has no option letter");
      const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(rest.front())));
      if (question_lines.empty() || options.size() < 2) {
        throw ValidationError("Answer line without a preceding question and options");
      }
      auto hit = std::find_if(options.begin(), options.end(),
                              [&](const auto& o) { return o.first == letter; });
      if (hit == options.end()) {
        throw ValidationError(std::string("answer letter ") + letter +
                              " is not among the options");
      }
      QAItem item;
      item.id = std::string(id_prefix) + "-" + std::to_string(items.size() + 1);
      std::string q;
      for (const auto& l : question_lines) q += (q.empty() ? "" : " ") + l;
      item.question = std::move(q);
      for (auto& [_, text] : options) item.options.push_back(text);
      item.answer_index = static_cast<int>(hit - options.begin()) + 1;
      item.evidence = std::string(document);
      item.source = SourceTag::kUqa;
      validate(item);
      items.push_back(std::move(item));
      reset();
      continue;
    }
    char letter;
    std::string text;
    if (!question_lines.empty() && option_line(line, letter, text)) {
      const char expected = static_cast<char>('A' + options.size());
      if (letter != expected) {
        throw ValidationError(std::string("option ") + letter +
                              " out of sequence, expected " + expected);
      }
      options.emplace_back(letter, std::move(text));
      continue;
    }
    if (!options.empty()) {
      throw ValidationError("question block ended without an Answer line");
    }
    std::string_view q = line;
    if (starts_with_ci(q, "question")) {
      auto after = trim(q.substr(8));
      if (!after.empty() && after.front() == ':') q = trim(after.substr(1));
    } else {
      // Drop leading enumeration like "1." or "2)".
      std::size_t k = 0;
      while (k < q.size() && q[k] >= '0' && q[k] <= '9') ++k;
      if (k > 0 && k < q.size() && (q[k] == '.' || q[k] == ')')) q = trim(q.substr(k + 1));
    }
    question_lines.emplace_back(q);
  }
  if (!question_lines.empty() || !options.empty()) {
    throw ValidationError("question block ended without an Answer line");
  }
  if (items.empty()) throw ValidationError("response contains no questions");
  return items;
}

std::string render_generated_qa(const std::vector<QAItem>& items) {
  std::string out;
  for (const auto& item : items) {
    out += item.question + "\n";
    for (std::size_t i = 0; i < item.options.size(); ++i) {
      out += std::string(1, static_cast<char>('A' + i)) + ") " + item.options[i] + "\n";
    }
    out += "Answer: ";
    out += static_cast<char>('A' + item.answer_index - 1);
    out += "\n\n";
  }
  return out;
}

}  // namespace maskeval
