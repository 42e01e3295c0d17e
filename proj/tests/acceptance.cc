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


// Acceptance checks, one PASS/FAIL line each. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <regex>
#include <set>
#include <string>

#include "maskeval/calc.hpp"
#include "maskeval/corpus.hpp"
#include "maskeval/masking.hpp"
#include "maskeval/metrics.hpp"
#include "maskeval/prompting.hpp"
#include "maskeval/runner.hpp"
#include "test_support.hpp"

namespace maskeval {
namespace {

using Clock = std::chrono::steady_clock;
using testing::read_source;
using testing::source_path;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects the first few problems of a criterion.
struct Check {
  std::string detail;
  int failures = 0;
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (++failures <= 3) detail += (detail.empty() ? "" : "; ") + what;
  }
};

QAItem fixture(const std::string& name) {
  return load_qa_corpus(source_path("tests/fixtures/" + name))[0];
}

CalcTask sales_task() {
  return load_calc_corpus(source_path("data/sales_plan.jsonl"))[0];
}

std::vector<QAItem> random_items(int n, std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<QAItem> out;
  for (int i = 0; i < n; ++i) out.push_back(testing::random_qa_item(rng, "s" + std::to_string(i)));
  return out;
}

// --- 1 ---------------------------------------------------------------------

Check calc_oracle_exact() {
  Check c;
  const auto givens = givens_from_map({{"A", 15840},
                                       {"B", 27720},
                                       {"C", 3960},
                                       {"D", 2772000000},
                                       {"E", 1980000000},
                                       {"unit_cost", 8000},
                                       {"reduction_rate", 0.25}});
  const auto t0 = Clock::now();
  const auto g = calc_oracle(givens);
  const double took = seconds_since(t0);
  c.expect(g.p == Rational(62500), "P");
  c.expect(g.n == Rational(23760), "N");
  c.expect(g.y == Rational(495000000), "Y");
  c.expect(g.e_prime == Rational(1389960000), "E'");
  c.expect(g.d_prime == Rational(2181960000), "D'");
  const double l = to_double(g.l);
  c.expect(std::abs(to_double(g.d_prime - g.givens.d) + l) <= 1e-9 * l, "D' - D != -L");
  c.expect(std::abs(to_double(g.e_prime - g.givens.e) + l) <= 1e-9 * l, "E' - E != -L");
  c.expect(took < 1e-3, "took " + std::to_string(took * 1e3) + " ms");
  if (!c.failures) c.detail = "exact, oracle took " + std::to_string(took * 1e6) + " us";
  return c;
}

// --- 2, 3 --------------------------------------------------------------------

// One regular-mode log with `hits[r]` correct answers out of n per rate.
std::vector<TrialRecord> synthetic_log(const std::map<double, int>& hits, int n) {
  std::vector<TrialRecord> out;
  for (const auto& [rate, h] : hits) {
    for (int i = 0; i < n; ++i) {
      TrialRecord r;
      r.dataset = "SYN";
      r.item_id = "i" + std::to_string(i / 10);
      r.trial = i % 10;
      r.rate = rate;
      r.answer_index = 1;
      r.choice = i < h ? 1 : 2;
      r.correct = i < h;
      r.missing = false;
      out.push_back(r);
    }
  }
  return out;
}

Check ea_self_baseline() {
  Check c;
  // 500 items x 10 trials. Unmasked 4604/5000 = 92.08%; every masked rate at
  // 3725/5000 except one extra hit at 0.05 and 1.0, so X1(Acc) = 0.74502.
  std::map<double, int> hits;
  for (double r : default_rates()) hits[r] = 3725;
  hits[0.0] = 4604;
  hits[0.05] += 1;
  hits[1.0] += 1;
  const auto log = synthetic_log(hits, 5000);
  const auto rows = summarize(compute_metrics(log, &log));
  const auto& x1 = rows.at(0);
  c.expect(std::abs(*x1.acc0 - 0.9208) < 1e-12, "Acc(U0)");
  c.expect(std::abs(*x1.na - 0.8091) <= 0.00005, "X1(NA) " + std::to_string(*x1.na));
  c.expect(std::abs(*x1.ea * 100 - 74.50) <= 0.01, "X1(EA) " + std::to_string(*x1.ea * 100));
  c.expect(std::abs(*x1.ea - *x1.acc.at(MaskMode::kRegular)) < 1e-12, "EA != Acc");
  char buf[128];
  std::snprintf(buf, sizeof buf, "X1(NA)=%.4f X1(EA)=%.2f", *x1.na, *x1.ea * 100);
  if (!c.failures) c.detail = buf;
  return c;
}

Check linearity() {
  Check c;
  SeededRng rng(2024);
  for (int f = 0; f < 50; ++f) {
    std::map<double, int> hits;
    for (double r : default_rates()) hits[r] = 1 + static_cast<int>(rng.below(400));
    const auto cells = compute_metrics(synthetic_log(hits, 400));
    std::map<double, double> accs, nas;
    for (const auto& cell : cells) {
      accs[cell.rate] = *cell.acc;
      nas[cell.rate] = *cell.na;
    }
    const double lhs = weighted_index(accs, WeightedIndex::kX1) / accs.at(0.0);
    const double rhs = weighted_index(nas, WeightedIndex::kX1);
    c.expect(std::abs(lhs - rhs) <= 1e-12, "fixture " + std::to_string(f));
  }
  // RQA row: Acc(D0) 89.84, X1(Acc) 64.67.
  std::map<double, int> hits;
  for (double r : default_rates()) hits[r] = 6467;
  hits[0.0] = 8984;
  const auto rows = summarize(compute_metrics(synthetic_log(hits, 10000)));
  const double spot = *rows.at(0).na;
  c.expect(std::abs(64.67 / 89.84 - 0.7198) <= 0.0005, "64.67/89.84");
  c.expect(std::abs(spot - 0.7198) <= 0.0005, "X1(NA) " + std::to_string(spot));
  if (!c.failures) c.detail = "50 random series; RQA X1(NA)=" + std::to_string(spot);
  return c;
}

// --- 4 -------------------------------------------------------------------------

Check masking_round_trip() {
  Check c;
  constexpr MaskMode kModes[] = {MaskMode::kRegular, MaskMode::kPartialLifting,
                                 MaskMode::kStrict, MaskMode::kLenient};
  const auto t0 = Clock::now();
  SeededRng rng(77);
  std::size_t docs = 0;
  for (int f = 0; f < 200; ++f) {
    const auto text = testing::random_text(rng, 10 + rng.below(120));
    const auto tokens = annotate(text);
    for (auto mode : kModes) {
      const auto maskable = maskable_tokens(tokens, mode, ExclusionRules{}).size();
      for (int k = 0; k <= 20; ++k) {
        MaskRequest req;
        req.mode = mode;
        req.rate = k / 20.0;
        req.seed = 1000 + f;
        FallbackMetaGenerator g1(0.3, 5), g2(0.3, 5);
        const auto a = mask_text(text, tokens, req, g1).doc;
        const auto b = mask_text(text, tokens, req, g2).doc;
        ++docs;
        const std::string where = "fixture " + std::to_string(f) + " " +
                                  std::string(mask_mode_name(mode)) + " k=" + std::to_string(k);
        c.expect(unmask(a) == text, "round trip " + where);
        // round half up of k*n/20 in integers
        c.expect(a.masked_count == (2 * k * maskable + 20) / 40, "count " + where);
        c.expect(a.maskable_count == maskable, "maskable " + where);
        c.expect(a == b && render(a) == render(b) &&
                     to_json(a).dump() == to_json(b).dump(),
                 "nondeterministic " + where);
      }
    }
  }
  const double took = seconds_since(t0);
  c.expect(took < 10.0, "took " + std::to_string(took) + " s");
  if (!c.failures) {
    c.detail = std::to_string(docs) + " masked documents in " + std::to_string(took) + " s";
  }
  return c;
}

// --- 5 -------------------------------------------------------------------------

struct LawStats {
  std::size_t strict_codes = 0, lenient_tokens = 0, partial_codes = 0;
  std::size_t regular_solid = 0, protected_scans = 0;
};

std::vector<std::size_t> coded_tokens(const MaskedDocument& doc,
                                      const std::vector<AnnotatedToken>& tokens) {
  std::vector<std::size_t> out;
  for (const auto& s : doc.segments) {
    if (!s.is_code) continue;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (s.span.contains(tokens[i].span)) out.push_back(i);
    }
  }
  return out;
}

bool has_math_char(std::string_view s, bool equals) {
  for (char ch : s) {
    if (ch == '+' || ch == '-' || ch == '/' || ch == '*' || (equals && ch == '=')) return true;
  }
  return false;
}

void scan_laws(Check& c, LawStats& st, MaskMode mode, const MaskedDocument& doc,
               const std::vector<AnnotatedToken>& tokens, const ExclusionRules& rules,
               const std::set<std::string>& never, const std::string& where) {
  std::set<std::string> verb_lemmas;
  for (const auto& t : tokens) {
    if (t.pos == Pos::kVerb) verb_lemmas.insert(t.lemma);
  }
  std::map<std::string, bool> solid;
  for (const auto& code : doc.code_table) solid[code.code] = code.solid();
  if (mode == MaskMode::kStrict) {
    for (const auto& code : doc.code_table) {
      c.expect(code.meaning.empty(), "strict meaning " + where);
      ++st.strict_codes;
    }
  }
  if (mode == MaskMode::kPartialLifting) {
    for (const auto& s : doc.segments) {
      if (!s.is_code) continue;
      c.expect(!solid.at(s.text), "solid code after lifting " + where);
      ++st.partial_codes;
    }
    for (const auto& code : doc.code_table) c.expect(!code.solid(), "solid row " + where);
  }
  if (mode == MaskMode::kRegular) {
    for (const auto& [_, is_solid] : solid) st.regular_solid += is_solid;
  }
  for (auto i : coded_tokens(doc, tokens)) {
    const auto& t = tokens[i];
    if (mode == MaskMode::kLenient) {
      c.expect(!verb_lemmas.contains(t.lemma), "verb lemma '" + t.lemma + "' " + where);
      ++st.lenient_tokens;
    }
    ++st.protected_scans;
    for (const auto& p : rules.protected_spans) {
      c.expect(!p.intersects(t.span), "protected span masked '" + t.surface + "' " + where);
    }
    c.expect(!std::isdigit(static_cast<unsigned char>(t.surface[0])), "numeral " + where);
    if (rules.exclude_math_symbols) {
      c.expect(!has_math_char(t.surface, rules.equals_is_math_symbol), "math " + where);
    }
    if (rules.exclude_single_char_vars) {
      c.expect(!(t.surface.size() == 1 && std::isalpha(static_cast<unsigned char>(t.surface[0]))),
               "single-char variable " + where);
    }
    c.expect(!never.contains(t.surface), "formula variable '" + t.surface + "' " + where);
  }
}

Check mode_laws() {
  Check c;
  LawStats st;
  constexpr MaskMode kModes[] = {MaskMode::kRegular, MaskMode::kPartialLifting,
                                 MaskMode::kStrict, MaskMode::kLenient};
  struct QaCase {
    QAItem item;
    std::optional<EvidenceMode> ev;
  };
  std::vector<QaCase> qa = {{fixture("uqa_item.jsonl"), std::nullopt},
                            {fixture("rqa_item.jsonl"), std::nullopt},
                            {fixture("aqa_item.jsonl"), EvidenceMode::kCase1SameNumbersNoAnswer},
                            {fixture("aqa_item.jsonl"), EvidenceMode::kCase3NoRationale}};
  auto randoms = random_items(200, 31);
  for (std::size_t i = 0; i < randoms.size(); ++i) {
    if (i % 2) {
      randoms[i].source = SourceTag::kAqa;
      qa.push_back({randoms[i], EvidenceMode::kCase3NoRationale});
    } else {
      qa.push_back({randoms[i], std::nullopt});
    }
  }
  for (std::size_t q = 0; q < qa.size(); ++q) {
    const auto& [item, ev] = qa[q];
    for (auto mode : kModes) {
      for (double rate : default_rates()) {
        FallbackMetaGenerator gen(0.3, q);
        const auto m = mask_qa_item(item, ev, mode, rate, 17 + q, gen);
        const auto rules = qa_rules(item, m.layout, ev);
        scan_laws(c, st, mode, m.result.doc, m.tokens, rules, {},
                  item.id + " " + std::string(mask_mode_name(mode)) + " " + format_number(rate));
      }
    }
  }
  const auto task = sales_task();
  const auto vars = formula_variables(task.simulation);
  const std::set<std::string> never(vars.begin(), vars.end());
  for (bool restricted : {false, true}) {
    for (auto mode : kModes) {
      for (double rate : default_rates()) {
        FallbackMetaGenerator gen(0.3, 9);
        const auto m = mask_calc_task(task, restricted, mode, rate, 23, gen);
        scan_laws(c, st, mode, m.result.doc, m.tokens, m.rules, never,
                  "calc " + std::string(mask_mode_name(mode)) + " " + format_number(rate));
        try {
          calc_parts(m);
        } catch (const std::exception& e) {
          c.expect(false, e.what());
        }
      }
    }
  }
  // The laws must not hold vacuously.
  c.expect(st.strict_codes > 0 && st.lenient_tokens > 0 && st.partial_codes > 0 &&
               st.regular_solid > 0,
           "a law was never exercised");
  if (!c.failures) {
    c.detail = std::to_string(st.strict_codes) + " strict rows, " +
               std::to_string(st.lenient_tokens) + " lenient tokens, " +
               std::to_string(st.partial_codes) + " lifted-mode codes, " +
               std::to_string(st.protected_scans) + " masked tokens scanned";
  }
  return c;
}

// --- 6 -------------------------------------------------------------------------

Check mock_campaigns() {
  Check c;
  const auto t0 = Clock::now();
  const Corpus corpus = random_items(100, 8);
  RunPlan plan;
  plan.dataset = "SYN";
  plan.modes = {MaskMode::kRegular};
  plan.rates = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  plan.trials = 10;
  plan.seed = 4;
  plan.max_parallel = 8;
  auto run = [&](OracleKind kind) {
    auto p = plan;
    p.oracle = OracleConfig{kind, 99};
    p.normalize_and_validate();
    MockOracle oracle(*p.oracle);
    const auto log = run_campaign(corpus, p, oracle);
    c.expect(log.size() == 6000u, "log size");
    return compute_metrics(log, &log);
  };
  for (const auto& cell : run(OracleKind::kPerfect)) {
    c.expect(*cell.acc == 1.0 && *cell.ki == 0.0, "perfect at " + format_number(cell.rate));
  }
  for (const auto& cell : run(OracleKind::kSilent)) {
    c.expect(*cell.nar == 1.0 && *cell.acc == 0.0, "silent at " + format_number(cell.rate));
  }
  const double band = 3 * std::sqrt(0.25 * 0.75 / 1000);
  for (const auto& cell : run(OracleKind::kUniformRandom)) {
    c.expect(std::abs(*cell.acc - 0.25) <= band,
             "uniform acc " + std::to_string(*cell.acc) + " at " + format_number(cell.rate));
  }
  // Calculation task: silent gives NAR 1 and every success indicator 0.
  auto calc = plan;
  calc.corpus = source_path("data/sales_plan.jsonl");
  calc.schema = CorpusSchema::kCalc;
  calc.oracle = OracleConfig{OracleKind::kSilent};
  calc.normalize_and_validate();
  for (const auto& cell : compute_metrics(run_campaign(calc))) {
    c.expect(*cell.nar == 1.0 && *cell.p_delta_trimmed == 0.0 && *cell.p_sigma == 0.0 &&
                 *cell.p_half_sigma == 0.0,
             "silent calc at " + format_number(cell.rate));
  }
  const double took = seconds_since(t0);
  c.expect(took < 60.0, "took " + std::to_string(took) + " s");
  if (!c.failures) c.detail = "3 x 6000 trials in " + std::to_string(took) + " s";
  return c;
}

// --- 7 -------------------------------------------------------------------------

Check metric_identities() {
  Check c;
  const auto givens = calc_oracle(givens_from_map({{"A", 15840},
                                                   {"B", 27720},
                                                   {"C", 3960},
                                                   {"D", 2772000000},
                                                   {"E", 1980000000},
                                                   {"unit_cost", 8000},
                                                   {"reduction_rate", 0.25}}));
  std::size_t cells_checked = 0;
  for (int f = 0; f < 1000; ++f) {
    SeededRng rng(5000 + f);
    const std::string tag = "fixture " + std::to_string(f);
    std::vector<TrialRecord> log;
    const int n = 1 + static_cast<int>(rng.below(120));
    for (int i = 0; i < n; ++i) {
      TrialRecord r;
      r.dataset = "D";
      r.item_id = "i" + std::to_string(i);
      r.rate = rng.below(3) * 0.5;
      r.answer_index = 1 + static_cast<int>(rng.below(4));
      r.missing = rng.uniform() < 0.2;
      if (!r.missing) {
        r.choice = 1 + static_cast<int>(rng.below(4));
        r.correct = r.choice == r.answer_index;
      }
      log.push_back(r);
    }
    std::size_t hits = 0;
    for (const auto& r : log) hits += r.choice.has_value() && *r.choice == *r.answer_index;
    const double x = acc(log);
    c.expect(x == static_cast<double>(hits) / static_cast<double>(n), "acc recount " + tag);
    if (x > 0) c.expect(ki(x, x) == 0.0, "ki(x,x) " + tag);
    c.expect(pa_ea(x, x, 0.9).pa == x, "pa(x,x) " + tag);
    for (const auto& cell : compute_metrics(log, &log)) {
      if (cell.ki) c.expect(*cell.ki == 0.0, "self ki " + tag);
      if (cell.pa) c.expect(*cell.pa == *cell.na, "self pa " + tag);
      ++cells_checked;
    }

    std::vector<TrialRecord> calc;
    const int m = 1 + static_cast<int>(rng.below(30));
    for (int i = 0; i < m; ++i) {
      TrialRecord r;
      r.dataset = "C";
      r.item_id = "sales";
      r.kind = TaskKind::kMskCal;
      r.trial = i;
      r.missing = rng.uniform() < 0.1;
      for (auto name : kScoredVariables) {
        const double truth = to_double(*givens.value(name));
        r.truth[std::string(name)] = truth;
        if (!r.missing && rng.uniform() < 0.9) {
          r.values[std::string(name)] = truth * (1 + 0.5 * rng.normal());
        }
      }
      r.missing = r.values.empty();
      calc.push_back(r);
    }
    const auto s = calc_scores(calc, givens);
    c.expect(s.p_half_sigma <= s.p_sigma, "p_half_sigma " + tag);
    for (const auto& v : s.variables) {
      if (v.p_sigma) c.expect(*v.p_half_sigma <= *v.p_sigma, v.name + " " + tag);
    }
  }
  if (!c.failures) c.detail = "1000 fixtures, " + std::to_string(cells_checked) + " cells";
  return c;
}

// --- 8 -------------------------------------------------------------------------

Check prompt_fidelity() {
  Check c;
  const auto item = fixture("uqa_item.jsonl");
  FallbackMetaGenerator gen;
  const auto masked = mask_qa_item(item, std::nullopt, MaskMode::kRegular, 1.0, 0, gen);
  const auto prompt = build_mskqa_prompt(item, qa_parts(masked), std::nullopt).prompt_text;
  c.expect(prompt.find("\npart_of_speech | category | meaning | code\n") != std::string::npos,
           "metadata header");
  c.expect(prompt == read_source("tests/golden/uqa_mr100_prompt.txt"), "golden prompt");
  const auto golden_q = read_source("tests/golden/uqa_mr100_question.txt");
  c.expect(prompt.find("\n" + golden_q) != std::string::npos, "golden question");

  // Hand oracle: the only function words in the question.
  const std::set<std::string> function_words = {"What", "is", "the", "of", "to"};
  const std::regex word(R"(<r\d{3}>|[A-Za-z']+)");
  int codes = 0;
  for (auto it = std::sregex_iterator(golden_q.begin(), golden_q.end(), word);
       it != std::sregex_iterator(); ++it) {
    const auto w = it->str();
    if (w.front() == '<') {
      ++codes;
    } else {
      c.expect(function_words.contains(w), "literal content word " + w);
    }
  }
  c.expect(codes == 6, "expected 6 coded question words, got " + std::to_string(codes));
  if (!c.failures) c.detail = "header, golden prompt and question match";
  return c;
}

}  // namespace
}  // namespace maskeval

int main() {
  using namespace maskeval;
  const std::pair<const char*, std::function<Check()>> criteria[] = {
      {"calculation oracle exact", calc_oracle_exact},
      {"EA self-baseline identity", ea_self_baseline},
      {"X1 linearity", linearity},
      {"masking round trip and determinism", masking_round_trip},
      {"mode laws and protection", mode_laws},
      {"mock campaigns", mock_campaigns},
      {"metric identities", metric_identities},
      {"prompt byte fidelity", prompt_fidelity},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, run] : criteria) {
    ++n;
    Check c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.failures = 1;
      c.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %d %s: %s (%s)\n", n, name, c.failures ? "FAIL" : "PASS",
                c.detail.c_str());
    std::fflush(stdout);
    failed += c.failures ? 1 : 0;
  }
  return failed;
}
