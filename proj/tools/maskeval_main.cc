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

// maskeval command line: mask, gen-uqa, prompts, run, score, report.
//
// Exit codes: 0 success, 1 usage, 2 invalid input or configuration,
// 3 endpoint rejected credentials, 4 other failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "maskeval/corpus.hpp"
#include "maskeval/error.hpp"
#include "maskeval/llm_client.hpp"
#include "maskeval/masking.hpp"
#include "maskeval/metrics.hpp"
#include "maskeval/prompting.hpp"
#include "maskeval/report.hpp"
#include "maskeval/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace maskeval;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << contents;
}

std::vector<double> parse_rates(const std::string& csv) {
  std::vector<double> rates;
  std::stringstream ss(csv);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      rates.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw ValidationError("bad rate '" + part + "'");
    }
  }
  return rates;
}

// --- mask ---------------------------------------------------------------------

struct MaskArgs {
  std::string corpus;
  std::string schema = "qa";
  std::vector<std::string> modes = {"regular"};
  std::string rates = "0,0.5,1";
  std::uint64_t seed = 0;
  std::string evidence_mode;
  bool restricted = false;
  double solid_probability = 0.0;
  std::string out = "masked";
};

int cmd_mask(const MaskArgs& a) {
  const auto rates = parse_rates(a.rates);
  std::optional<EvidenceMode> ev;
  if (!a.evidence_mode.empty()) ev = parse_evidence_mode(a.evidence_mode);
  FallbackMetaGenerator gen(a.solid_probability, a.seed);
  json report = json::array();
  const fs::path out(a.out);
  fs::create_directories(out);
  auto emit = [&](const std::string& id, MaskMode mode, double rate, const MaskResult& res) {
    const auto stem = prompt_id(id, mode, rate);
    spit(out / (stem + ".json"), to_json(res.doc).dump(2) + "\n");
    report.push_back({{"item_id", id},
                      {"mode", mask_mode_name(mode)},
                      {"rate", rate},
                      {"maskable_count", res.doc.maskable_count},
                      {"masked_count", res.doc.masked_count},
                      {"codes", res.report.codes},
                      {"solid", res.report.solid},
                      {"failed", res.report.failed}});
  };
  const auto corpus = load_corpus(a.corpus, parse_corpus_schema(a.schema));
  for (const auto& m : a.modes) {
    const auto mode = parse_mask_mode(m);
    for (double rate : rates) {
      if (const auto* qa = std::get_if<std::vector<QAItem>>(&corpus)) {
        for (const auto& item : *qa) {
          const auto seed = hash_combine(a.seed, fnv1a64(item.id));
          emit(item.id, mode, rate, mask_qa_item(item, ev, mode, rate, seed, gen).result);
        }
      } else {
        for (const auto& task : std::get<std::vector<CalcTask>>(corpus)) {
          const auto seed = hash_combine(a.seed, fnv1a64(task.id));
          auto masked = mask_calc_task(task, a.restricted, mode, rate, seed, gen);
          calc_parts(masked);  // protection check
          emit(task.id, mode, rate, masked.result);
        }
      }
    }
  }
  spit(out / "generation_report.json", report.dump(2) + "\n");
  return 0;
}

// --- gen-uqa ------------------------------------------------------------------

struct GenArgs {
  std::string document;
  std::string response;
  std::string config;
  std::string id_prefix = "uqa";
  std::string out;
};

int cmd_gen_uqa(const GenArgs& a) {
  const auto document = slurp(a.document);
  const auto prompt = build_uqa_generation_prompt(document);
  std::string response;
  if (!a.response.empty()) {
    response = slurp(a.response);
  } else if (!a.config.empty()) {
    EndpointConfig ec;
    apply_endpoint_settings(endpoint_settings_from_env(), ec);
    apply_endpoint_settings(read_settings_file(a.config), ec);
    HttpCompleter client(ec);
    response = client.complete(prompt, CompletionContext{});
  } else {
    std::cout << prompt;
    return 0;
  }
  const auto items = parse_generated_qa(response, document, a.id_prefix);
  const auto jsonl = serialize_qa_corpus(items);
  if (a.out.empty()) {
    std::cout << jsonl;
  } else {
    spit(a.out, jsonl);
  }
  return 0;
}

// --- prompts / run ------------------------------------------------------------

struct PlanArgs {
  std::string plan;
  std::string config;
  std::string base_url;
  std::string model;
  int max_parallel = 0;
  std::string oracle;
};

RunPlan resolve_plan(const PlanArgs& a) {
  auto plan = load_run_plan(a.plan, endpoint_settings_from_env());
  std::map<std::string, std::string> flags;
  if (!a.base_url.empty()) flags["base_url"] = a.base_url;
  if (!a.model.empty()) flags["model"] = a.model;
  if (!a.config.empty() || !flags.empty()) {
    if (!plan.endpoint) {
      plan.endpoint = EndpointConfig{};
      apply_endpoint_settings(endpoint_settings_from_env(), *plan.endpoint);
      plan.oracle.reset();
    }
    if (!a.config.empty()) apply_endpoint_settings(read_settings_file(a.config), *plan.endpoint);
    apply_endpoint_settings(flags, *plan.endpoint);
  }
  if (!a.oracle.empty()) {
    plan.endpoint.reset();
    plan.oracle = OracleConfig{parse_oracle_kind(a.oracle)};
  }
  if (a.max_parallel > 0) {
    plan.max_parallel = a.max_parallel;
    if (plan.endpoint) plan.endpoint->max_parallel = a.max_parallel;
  }
  plan.normalize_and_validate();
  return plan;
}

int cmd_prompts(const PlanArgs& a, const std::string& out) {
  const auto plan = resolve_plan(a);
  const auto corpus = load_corpus(plan.corpus, plan.schema);
  FallbackMetaGenerator gen(plan.solid_probability, plan.seed);
  dump_prompts(out, build_campaign_prompts(corpus, plan, gen));
  spit(fs::path(out) / "plan.json", to_json(plan).dump(2) + "\n");
  return 0;
}

int cmd_run(const PlanArgs& a, const std::string& log, bool fresh, std::optional<std::size_t> limit) {
  const auto plan = resolve_plan(a);
  CampaignOptions opt;
  opt.log_path = log;
  opt.resume = !fresh;
  opt.limit = limit;
  const auto records = run_campaign(plan, opt);
  std::size_t missing = 0;
  for (const auto& r : records) missing += r.missing ? 1 : 0;
  std::cerr << records.size() << " records, " << missing << " missing -> " << log << "\n";
  return 0;
}

// --- score / report -----------------------------------------------------------

std::vector<TrialRecord> read_logs(const std::vector<std::string>& paths) {
  std::vector<TrialRecord> all;
  for (const auto& p : paths) {
    auto part = read_trial_log(p);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

struct ScoreArgs {
  std::vector<std::string> logs;
  std::string baseline;
  std::string corpus;
  std::string schema = "qa";
  double trim = kDefaultTrim;
  std::string out = "metrics";
};

int cmd_score(const ScoreArgs& a) {
  auto records = read_logs(a.logs);
  if (!a.corpus.empty()) rescore(records, load_corpus(a.corpus, parse_corpus_schema(a.schema)));
  std::optional<std::vector<TrialRecord>> baseline;
  if (!a.baseline.empty()) baseline = read_trial_log(a.baseline);
  MetricsOptions opt;
  opt.calc.trim = a.trim;
  std::vector<std::string> warnings;
  const auto cells = compute_metrics(records, baseline ? &*baseline : nullptr, opt, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  spit(a.out + ".csv", metrics_to_csv(cells));
  spit(a.out + ".json", metrics_to_json(cells).dump(2) + "\n");
  return 0;
}

struct ReportArgs {
  std::vector<std::string> logs;
  std::string baseline;
  std::vector<std::string> formats = {"csv", "json", "svg"};
  std::vector<std::string> metrics = {"acc"};
  std::vector<std::string> datasets;
  std::vector<std::string> modes;
  double trim = kDefaultTrim;
  std::string out = "report";
};

int cmd_report(const ReportArgs& a) {
  const auto records = read_logs(a.logs);
  std::optional<std::vector<TrialRecord>> baseline;
  if (!a.baseline.empty()) baseline = read_trial_log(a.baseline);
  ReportSpec spec;
  spec.formats = {a.formats.begin(), a.formats.end()};
  spec.metrics = a.metrics;
  spec.datasets = a.datasets;
  spec.modes = a.modes;
  spec.out_dir = a.out;
  MetricsOptions opt;
  opt.calc.trim = a.trim;
  const auto res = write_report(records, baseline ? &*baseline : nullptr, spec, opt);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << format_summary(res.summary);
  std::cerr << "trimmed mean drops " << a.trim * 100 << "% at each end\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Masked-text QA and calculation evaluation toolkit"};
  app.require_subcommand(1);

  MaskArgs mask;
  auto* c_mask = app.add_subcommand("mask", "Mask a corpus at one or more rates");
  c_mask->add_option("--corpus", mask.corpus, "Corpus JSONL file")->required();
  c_mask->add_option("--schema", mask.schema, "qa or calc");
  c_mask->add_option("--mode", mask.modes, "regular, partial, strict, lenient (repeatable)");
  c_mask->add_option("--rates", mask.rates, "Comma-separated rates");
  c_mask->add_option("--seed", mask.seed);
  c_mask->add_option("--evidence-mode", mask.evidence_mode, "case1, case2 or case3 (AQA)");
  c_mask->add_flag("--restricted", mask.restricted, "Keep calculation formulas unmasked");
  c_mask->add_option("--solid-probability", mask.solid_probability);
  c_mask->add_option("--out", mask.out, "Output directory");

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen-uqa", "Question generation prompt and response parsing");
  c_gen->add_option("--document", gen.document, "Source document text file")->required();
  c_gen->add_option("--response", gen.response, "Saved model response to parse");
  c_gen->add_option("--config", gen.config, "Endpoint config (.toml/.json) to query");
  c_gen->add_option("--id-prefix", gen.id_prefix);
  c_gen->add_option("--out", gen.out, "Corpus JSONL to write");

  PlanArgs plan_args;
  auto add_plan_opts = [&](CLI::App* c) {
    c->add_option("--plan", plan_args.plan, "Run plan JSON")->required();
    c->add_option("--config", plan_args.config, "Endpoint config (.toml/.json)");
    c->add_option("--base-url", plan_args.base_url);
    c->add_option("--model", plan_args.model);
    c->add_option("--max-parallel", plan_args.max_parallel);
    c->add_option("--oracle", plan_args.oracle, "Use a mock oracle instead of the plan backend");
  };
  std::string prompts_out = "prompts";
  auto* c_prompts = app.add_subcommand("prompts", "Write every prompt of a plan");
  add_plan_opts(c_prompts);
  c_prompts->add_option("--out", prompts_out);

  std::string log_path = "trials.jsonl";
  bool fresh = false;
  std::optional<std::size_t> limit;
  auto* c_run = app.add_subcommand("run", "Run a campaign");
  add_plan_opts(c_run);
  c_run->add_option("--log", log_path, "Trial log (JSONL)");
  c_run->add_flag("--fresh", fresh, "Ignore existing records in the log");
  c_run->add_option("--limit", limit, "Stop after this many new trials");

  ScoreArgs score;
  auto* c_score = app.add_subcommand("score", "Metrics table from trial logs");
  c_score->add_option("--log", score.logs)->required();
  c_score->add_option("--baseline", score.baseline, "Baseline (U) trial log");
  c_score->add_option("--corpus", score.corpus, "Re-parse raw responses against this corpus");
  c_score->add_option("--schema", score.schema);
  c_score->add_option("--trim", score.trim, "Trim fraction per end");
  c_score->add_option("--out", score.out, "Output stem (.csv and .json)");

  ReportArgs rep;
  auto* c_report = app.add_subcommand("report", "Curves, summary table and plots");
  c_report->add_option("--log", rep.logs)->required();
  c_report->add_option("--baseline", rep.baseline);
  c_report->add_option("--format", rep.formats)->delimiter(',');
  c_report->add_option("--metric", rep.metrics)->delimiter(',');
  c_report->add_option("--dataset", rep.datasets)->delimiter(',');
  c_report->add_option("--mode", rep.modes)->delimiter(',');
  c_report->add_option("--trim", rep.trim);
  c_report->add_option("--out", rep.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // help and version exit 0; every other parse problem is a usage error
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*c_mask) return cmd_mask(mask);
    if (*c_gen) return cmd_gen_uqa(gen);
    if (*c_prompts) return cmd_prompts(plan_args, prompts_out);
    if (*c_run) return cmd_run(plan_args, log_path, fresh, limit);
    if (*c_score) return cmd_score(score);
    if (*c_report) return cmd_report(rep);
  } catch (const AuthError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 1;
}
