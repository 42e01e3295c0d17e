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

#include <gtest/gtest.h>

#include <regex>
#include <set>

#include "maskeval/error.hpp"
#include "test_support.hpp"

namespace maskeval {
namespace {

using testing::read_source;
using testing::source_path;

QAItem fixture(const std::string& name) {
  return load_qa_corpus(source_path("tests/fixtures/" + name))[0];
}

CalcTask sales_plan() { return load_calc_corpus(source_path("data/sales_plan.jsonl"))[0]; }

std::string qa_prompt(const QAItem& item, std::optional<EvidenceMode> ev, MaskMode mode,
                      double rate, std::uint64_t seed = 0) {
  FallbackMetaGenerator gen;
  const auto masked = mask_qa_item(item, ev, mode, rate, seed, gen);
  return build_mskqa_prompt(item, qa_parts(masked), ev).prompt_text;
}

std::string section(const std::string& prompt, const std::string& header) {
  const auto start = prompt.find(header + "\n");
  if (start == std::string::npos) return "";
  const auto body = start + header.size() + 1;
  const auto end = prompt.find("\n## ", body);
  return prompt.substr(body, end == std::string::npos ? std::string::npos : end - body);
}

TEST(Prompting, PromptId) {
  EXPECT_EQ(prompt_id("q1", MaskMode::kRegular, 0.05), "q1__regular__r0.05");
  EXPECT_EQ(prompt_id("q1", MaskMode::kPartialLifting, 1.0), "q1__partial__r1.00");
}

TEST(Prompting, PythonListRepr) {
  EXPECT_EQ(python_list_repr({}), "[]");
  EXPECT_EQ(python_list_repr({"1. a", "2. b"}), "['1. a', '2. b']");
  EXPECT_EQ(python_list_repr({"Nature's"}), "[\"Nature's\"]");
  EXPECT_EQ(python_list_repr({"it's \"x\""}), "['it\\'s \"x\"']");
  EXPECT_EQ(python_list_repr({"a\\b\nc\td"}), "['a\\\\b\\nc\\td']");
  EXPECT_EQ(python_list_repr({std::string("\x01")}), "['\\x01']");
  EXPECT_EQ(python_list_repr({"Hall & Oates"}), "['Hall & Oates']");
}

TEST(Prompting, QaLayoutSections) {
  const auto item = fixture("rqa_item.jsonl");
  const auto layout = qa_layout(item, std::nullopt);
  ASSERT_TRUE(layout.text.has_value());
  EXPECT_FALSE(layout.text_is_rationale);
  auto cut = [&](Span s) { return layout.source.substr(s.begin, s.size()); };
  EXPECT_EQ(cut(*layout.text), item.evidence);
  EXPECT_EQ(cut(layout.question), item.question);
  ASSERT_EQ(layout.options.size(), 4u);
  EXPECT_EQ(cut(layout.options[0]), "Hall & Oates");
  EXPECT_EQ(layout.source, item.evidence + "\n" + item.question + "\nHall & Oates\n"
                               "Simon & Garfunkel\nThe Righteous Brothers\nThe White Stripes");
}

TEST(Prompting, AqaEvidenceModes) {
  auto item = fixture("aqa_item.jsonl");
  const auto c1 = qa_layout(item, EvidenceMode::kCase1SameNumbersNoAnswer);
  EXPECT_TRUE(c1.text_is_rationale);
  EXPECT_EQ(c1.source.substr(c1.text->begin, c1.text->size()), *item.rationale);
  const auto c3 = qa_layout(item, EvidenceMode::kCase3NoRationale);
  EXPECT_FALSE(c3.text.has_value());

  auto revealing = item;
  revealing.rationale = *item.rationale + "\nAnswer: C)";
  EXPECT_THROW(qa_layout(revealing, EvidenceMode::kCase1SameNumbersNoAnswer), ValidationError);
  EXPECT_NO_THROW(qa_layout(revealing, EvidenceMode::kCase2DiffNumbersWithAnswer));
  auto wrong_letter = item;
  wrong_letter.rationale = "so B) is out and ABC) too";
  EXPECT_NO_THROW(qa_layout(wrong_letter, EvidenceMode::kCase1SameNumbersNoAnswer));
  auto bare = item;
  bare.rationale.reset();
  EXPECT_THROW(qa_layout(bare, EvidenceMode::kCase2DiffNumbersWithAnswer), ValidationError);
  EXPECT_NO_THROW(qa_layout(bare, EvidenceMode::kCase3NoRationale));

  const auto rules3 = qa_rules(item, c3, EvidenceMode::kCase3NoRationale);
  EXPECT_TRUE(rules3.exclude_math_symbols);
  EXPECT_TRUE(rules3.equals_is_math_symbol);
  EXPECT_TRUE(rules3.exclude_single_char_vars);
  EXPECT_EQ(rules3.protected_spans, c3.options);
  const auto rules_rqa = qa_rules(fixture("rqa_item.jsonl"),
                                  qa_layout(fixture("rqa_item.jsonl"), std::nullopt),
                                  std::nullopt);
  EXPECT_TRUE(rules_rqa.protected_spans.empty());
  EXPECT_TRUE(rules_rqa.exclude_numbers);
}

TEST(Prompting, FullMaskGolden) {
  const auto item = fixture("uqa_item.jsonl");
  const auto prompt = qa_prompt(item, std::nullopt, MaskMode::kRegular, 1.0);
  EXPECT_EQ(prompt, read_source("tests/golden/uqa_mr100_prompt.txt"));
  EXPECT_EQ(section(prompt, "## Question") + "\n",
            read_source("tests/golden/uqa_mr100_question.txt"));
  // Seed does not matter when everything maskable is masked.
  EXPECT_EQ(qa_prompt(item, std::nullopt, MaskMode::kRegular, 1.0, 991), prompt);
}

TEST(Prompting, QuestionWordsCodedOrFunction) {
  // Hand-made oracle for the fixture question: these five words are the only
  // function words, everything else is content.
  const std::set<std::string> function_words = {"What", "is", "the", "of", "to"};
  const auto prompt = qa_prompt(fixture("uqa_item.jsonl"), std::nullopt,
                                MaskMode::kRegular, 1.0);
  const auto question = section(prompt, "## Question");
  const std::regex word(R"(<r\d{3}>|[A-Za-z']+)");
  int codes = 0;
  for (auto it = std::sregex_iterator(question.begin(), question.end(), word);
       it != std::sregex_iterator(); ++it) {
    const auto w = it->str();
    if (w.front() == '<') {
      ++codes;
    } else {
      EXPECT_TRUE(function_words.contains(w)) << "literal content word " << w;
    }
  }
  EXPECT_EQ(codes, 6);  // main purpose Declaration Independence according text
}

TEST(Prompting, PromptSkeleton) {
  const auto item = fixture("rqa_item.jsonl");
  const auto prompt = qa_prompt(item, std::nullopt, MaskMode::kRegular, 0.0);
  EXPECT_EQ(prompt,
            "The following is a text and metadata related to the code terms within the text. "
            "Answer the question concisely according to the instructions.\n"
            "## Instructions\n"
            "- Choose the answer from the options and respond with the corresponding number.\n"
            "- Respond in JSON format as {'basis': str, 'answer': int}\n"
            "- Use only the text as a reference for the basis\n"
            "## Text\n" +
                item.evidence +
                "\n## Question\n" + item.question +
                "\n## Options\n['1. Hall & Oates', '2. Simon & Garfunkel', "
                "'3. The Righteous Brothers', '4. The White Stripes']\n"
                "## Metadata\npart_of_speech | category | meaning | code");
}

TEST(Prompting, AqaCase1AndCase3Prompts) {
  const auto item = fixture("aqa_item.jsonl");
  const auto c1 = qa_prompt(item, EvidenceMode::kCase1SameNumbersNoAnswer, MaskMode::kRegular, 1.0);
  EXPECT_NE(c1.find("## Text (Rationale)\n"), std::string::npos);
  EXPECT_NE(c1.find("## Options\n['1. 31', '2. 33', '3. 35', '4. 37', '5. 39']\n"),
            std::string::npos);
  const auto c3 = qa_prompt(item, EvidenceMode::kCase3NoRationale, MaskMode::kRegular, 1.0);
  EXPECT_EQ(c3.find("## Text"), std::string::npos);
  const auto q = section(c3, "## Question");
  EXPECT_NE(q.find(" y "), std::string::npos);  // single-char variable stays
  EXPECT_NE(q.find("25"), std::string::npos);
  EXPECT_EQ(q.find("weight"), std::string::npos);
}

TEST(Prompting, BuildRejectsInconsistentParts) {
  const auto item = fixture("rqa_item.jsonl");
  FallbackMetaGenerator gen;
  auto parts = qa_parts(mask_qa_item(item, std::nullopt, MaskMode::kRegular, 0.5, 1, gen));
  auto fewer = parts;
  fewer.options.pop_back();
  EXPECT_THROW(build_mskqa_prompt(item, fewer, std::nullopt), ValidationError);
  auto blank = parts;
  blank.question.clear();
  EXPECT_THROW(build_mskqa_prompt(item, blank, std::nullopt), ValidationError);
  const auto aqa = fixture("aqa_item.jsonl");
  auto aqa_parts = qa_parts(
      mask_qa_item(aqa, EvidenceMode::kCase3NoRationale, MaskMode::kRegular, 0.5, 1, gen));
  EXPECT_THROW(build_mskqa_prompt(aqa, aqa_parts, EvidenceMode::kCase1SameNumbersNoAnswer),
               ValidationError);
  const auto bundle = build_mskqa_prompt(item, parts, std::nullopt);
  EXPECT_EQ(bundle.answer_index, 1);
  EXPECT_EQ(bundle.kind, TaskKind::kMskQa);
  EXPECT_EQ(bundle.params.rate, 0.5);
}

TEST(Prompting, CalcLayoutAndScopes) {
  const auto task = sales_plan();
  const auto layout = calc_layout(task);
  EXPECT_EQ(layout.source, task.document + "\n#Conditions\n" + task.conditions +
                               "\n#Simulation\n" + task.simulation);
  EXPECT_EQ(layout.source.substr(layout.conditions.begin, 12), "#Conditions\n");
  EXPECT_EQ(layout.source.substr(layout.simulation.begin, 12), "#Simulation\n");
  const auto scopes = calc_scopes(layout);
  ASSERT_EQ(scopes.size(), 2u);
  EXPECT_EQ(scopes[0].ns, "m");
  EXPECT_EQ(scopes[0].style, CodeStyle::kAngleHash);
  EXPECT_EQ(scopes[1].ns, "t");
  EXPECT_EQ(scopes[1].style, CodeStyle::kHash);
  EXPECT_EQ(scopes[1].span.end, layout.source.size());
}

TEST(Prompting, CalcMaskingKeepsFormulasAndNumbers) {
  const auto task = sales_plan();
  FallbackMetaGenerator gen;
  for (bool restricted : {false, true}) {
    const auto masked = mask_calc_task(task, restricted, MaskMode::kRegular, 1.0, 3, gen);
    const auto parts = calc_parts(masked);
    const auto& body = parts.body;
    for (const char* literal :
         {"15,840.00", "27,720.00", "8,000", "#Document", "#Conditions", "#Simulation",
          " N ", "NR = A - C =", "P = E / (B + C) =", "X = 8,000 * NR =", "E' = E - L =",
          "D' = D - L =", "Y = P * (B + C) * 0.25 ="}) {
      EXPECT_NE(body.find(literal), std::string::npos) << literal << " restricted=" << restricted;
    }
    const auto split = body.find("\n#Conditions\n");
    ASSERT_NE(split, std::string::npos);
    const std::string doc = body.substr(0, split), rest = body.substr(split);
    EXPECT_EQ(std::regex_search(rest, std::regex("<#m")), false);
    EXPECT_EQ(std::regex_search(doc, std::regex("(^|[^<])#t\\d")), false);
    EXPECT_TRUE(std::regex_search(doc, std::regex("<#m\\d{3}>")));
    EXPECT_TRUE(std::regex_search(rest, std::regex("#t\\d{3}")));
    for (const auto& c : parts.document_table) EXPECT_EQ(c.code.front(), 'm');
    for (const auto& c : parts.simulation_table) EXPECT_EQ(c.code.front(), 't');
  }
}

TEST(Prompting, CalcPromptShape) {
  const auto task = sales_plan();
  FallbackMetaGenerator gen;
  const auto masked = mask_calc_task(task, false, MaskMode::kRegular, 0.2, 0, gen);
  const auto bundle = build_mskcal_prompt(task, calc_parts(masked), false);
  const auto& p = bundle.prompt_text;
  EXPECT_NE(p.find("\nFill in every blank in the simulation and respond in JSON format as "
                   "{\"NR\": number, \"P\": number, \"X\": number, \"N\": number, \"Y\": number, "
                   "\"L\": number, \"E_prime\": number, \"D_prime\": number}\n"
                   "<Meta Information: Document>\nNumber Part of Speech Category Meaning"),
            std::string::npos);
  EXPECT_NE(p.find("\n<Meta Information: Conditions and Simulation>\n"
                   "Number Part of Speech Category Meaning"),
            std::string::npos);
  EXPECT_EQ(bundle.calc_key.at("P"), 62500);
  EXPECT_EQ(bundle.calc_key.at("D_prime"), 2181960000);
  EXPECT_EQ(bundle.kind, TaskKind::kMskCal);
  // About a fifth of the maskable words are coded.
  const auto& doc = masked.result.doc;
  EXPECT_EQ(doc.masked_count, round_half_up_count(0.2, doc.maskable_count));
}

TEST(Prompting, CalcPartsRejectsProtectedCodes) {
  const auto task = sales_plan();
  FallbackMetaGenerator gen;
  auto masked = mask_calc_task(task, false, MaskMode::kRegular, 1.0, 0, gen);
  EXPECT_NO_THROW(calc_parts(masked));
  const auto first_code = std::find_if(masked.result.doc.segments.begin(),
                                       masked.result.doc.segments.end(),
                                       [](const Segment& s) { return s.is_code; });
  ASSERT_NE(first_code, masked.result.doc.segments.end());
  masked.rules.protected_spans.push_back(first_code->span);
  EXPECT_THROW(calc_parts(masked), SpanError);
}

TEST(Prompting, DumpPrompts) {
  testing::TempDir dir("dump");
  const auto item = fixture("uqa_item.jsonl");
  FallbackMetaGenerator gen;
  std::vector<PromptBundle> bundles;
  for (double r : {0.0, 0.5}) {
    bundles.push_back(build_mskqa_prompt(
        item, qa_parts(mask_qa_item(item, std::nullopt, MaskMode::kRegular, r, 0, gen)),
        std::nullopt));
  }
  dump_prompts(dir.path().string(), bundles);
  EXPECT_EQ(testing::read_file(dir.file("prompts/uqa-declaration-1__regular__r0.50.txt")),
            bundles[1].prompt_text);
  const auto keys = nlohmann::json::parse(testing::read_file(dir.file("answer_keys.json")));
  EXPECT_EQ(keys["uqa-declaration-1__regular__r0.00"]["answer_index"], 3);
  const auto manifest = nlohmann::json::parse(testing::read_file(dir.file("manifest.json")));
  EXPECT_EQ(manifest["uqa-declaration-1__regular__r0.50"]["rate"], 0.5);
  EXPECT_EQ(manifest["uqa-declaration-1__regular__r0.50"]["kind"], "mskqa");
}

}  // namespace
}  // namespace maskeval
