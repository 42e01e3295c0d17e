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

#include "maskeval/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "maskeval/error.hpp"
#include "maskeval/text_util.hpp"

namespace maskeval {
namespace {

using nlohmann::json;

// Balanced {...} starting at `open`, honouring quoted strings.
std::optional<std::string_view> balanced_object(std::string_view s, std::size_t open) {
  int depth = 0;
  char quote = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (quote) {
      if (c == '\\') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}' && --depth == 0) {
      return s.substr(open, i - open + 1);
    }
  }
  return std::nullopt;
}

// {'basis': 'x', 'answer': 2} -> {"basis": "x", "answer": 2}
std::string requote(std::string_view s) {
  std::string out;
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quote == '"') {
      out += c;
      if (c == '\\' && i + 1 < s.size()) {
        out += s[++i];
      } else if (c == '"') {
        quote = 0;
      }
    } else if (quote == '\'') {
      if (c == '\\' && i + 1 < s.size() && s[i + 1] == '\'') {
        out += '\'';
        ++i;
      } else if (c == '\'') {
        out += '"';
        quote = 0;
      } else if (c == '"') {
        out += "\\\"";
      } else {
        out += c;
      }
    } else {
      if (c == '\'') {
        out += '"';
        quote = '\'';
      } else {
        if (c == '"') quote = '"';
        out += c;
      }
    }
  }
  return out;
}

std::optional<json> first_json_object(std::string_view raw) {
  for (auto pos = raw.find('{'); pos != std::string_view::npos;
       pos = raw.find('{', pos + 1)) {
    auto obj = balanced_object(raw, pos);
    if (!obj) continue;
    auto j = json::parse(*obj, nullptr, false);
    if (j.is_discarded()) j = json::parse(requote(*obj), nullptr, false);
    if (!j.is_discarded() && j.is_object()) return j;
  }
  return std::nullopt;
}

std::uint64_t document_seed(std::uint64_t seed, std::string_view item_id) {
  return hash_combine(seed, fnv1a64(item_id));
}

struct Job {
  std::size_t prompt = 0;  // index into prompts
  int trial = 0;
  std::string key;
};

struct ItemInfo {
  int n_options = 0;
  std::optional<int> answer_index;
  std::optional<CalcGivens> givens;
  std::map<std::string, double> calc_targets;
};

std::unordered_map<std::string, ItemInfo> item_info(const Corpus& corpus) {
  std::unordered_map<std::string, ItemInfo> out;
  if (const auto* qa = std::get_if<std::vector<QAItem>>(&corpus)) {
    for (const auto& item : *qa) {
      out[item.id] = {static_cast<int>(item.options.size()), item.answer_index, {}, {}};
    }
  } else {
    for (const auto& task : std::get<std::vector<CalcTask>>(corpus)) {
      ItemInfo info;
      info.givens = givens_from_map(task.givens);
      for (const auto& [k, v] : task.targets) {
        info.calc_targets[canonical_variable_name(k)] = v;
      }
      out[task.id] = std::move(info);
    }
  }
  return out;
}

void score_record(TrialRecord& r, const ItemInfo& info) {
  if (r.kind == TaskKind::kMskQa) {
    r.answer_index = info.answer_index;
    r.choice = parse_mskqa_response(r.raw_response, info.n_options);
    r.missing = !r.choice.has_value();
    r.correct = !r.missing && r.answer_index && *r.choice == *r.answer_index;
    return;
  }
  std::vector<std::string> names;
  for (const auto& [k, _] : info.calc_targets) names.push_back(k);
  auto parsed = parse_mskcal_response(r.raw_response, names);
  r.values = std::move(parsed.values);
  r.notes = std::move(parsed.notes);
  r.missing = parsed.missing;
  r.truth = info.calc_targets;
  r.rel_errors.clear();
  for (const auto& [k, v] : r.values) {
    auto t = r.truth.find(k);
    if (t != r.truth.end() && t->second != 0.0) {
      r.rel_errors[k] = std::abs(v - t->second) / std::abs(t->second);
    }
  }
}

std::string dir_of(const std::string& path) {
  auto p = std::filesystem::path(path).parent_path();
  return p.empty() ? "." : p.string();
}

}  // namespace

std::vector<double> default_rates() {
  std::vector<double> rates;
  for (int i = 0; i <= 20; ++i) rates.push_back(i / 20.0);
  return rates;
}

void RunPlan::normalize_and_validate() {
  if (rates.empty() || rate_key(rates.front()) != 0) rates.insert(rates.begin(), 0.0);
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (rates[i] < 0.0 || rates[i] > 1.0) {
      throw ValidationError("rate " + format_number(rates[i]) + " outside [0, 1]");
    }
    if (i > 0 && rate_key(rates[i]) <= rate_key(rates[i - 1])) {
      throw ValidationError("rates must be strictly increasing");
    }
  }
  if (trials < 1) throw ValidationError("trials must be >= 1");
  if (modes.empty()) throw ValidationError("plan needs at least one mode");
  if (oracle.has_value() == endpoint.has_value()) {
    throw ValidationError("plan needs exactly one of 'oracle' or 'endpoint'");
  }
  if (endpoint) endpoint->validate();
  if (max_parallel < 1) throw ValidationError("max_parallel must be >= 1");
  if (solid_probability < 0.0 || solid_probability > 1.0) {
    throw ValidationError("solid_probability must be in [0, 1]");
  }
  if (meta == MetaSource::kEndpoint && !endpoint) {
    throw ValidationError("meta_generator 'endpoint' needs an endpoint backend");
  }
  if (dataset.empty()) {
    dataset = corpus.empty() ? "dataset" : std::filesystem::path(corpus).stem().string();
  }
}

RunPlan parse_run_plan(const json& j, const std::string& base_dir,
                       const std::map<std::string, std::string>& endpoint_defaults) {
  if (!j.is_object()) throw ValidationError("run plan must be a JSON object");
  RunPlan plan;
  try {
    if (j.contains("corpus")) {
      std::filesystem::path p(j["corpus"].get<std::string>());
      plan.corpus = p.is_absolute() ? p.string() : (std::filesystem::path(base_dir) / p).string();
    }
    if (j.contains("schema")) plan.schema = parse_corpus_schema(j["schema"].get<std::string>());
    if (j.contains("dataset")) plan.dataset = j["dataset"].get<std::string>();
    if (j.contains("modes")) {
      plan.modes.clear();
      for (const auto& m : j["modes"]) plan.modes.push_back(parse_mask_mode(m.get<std::string>()));
    }
    if (j.contains("rates")) plan.rates = j["rates"].get<std::vector<double>>();
    if (j.contains("trials")) plan.trials = j["trials"].get<int>();
    if (j.contains("seed")) plan.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("evidence_mode") && !j["evidence_mode"].is_null()) {
      plan.evidence_mode = parse_evidence_mode(j["evidence_mode"].get<std::string>());
    }
    if (j.contains("restricted")) plan.restricted = j["restricted"].get<bool>();
    if (j.contains("oracle")) {
      const auto& o = j["oracle"];
      OracleConfig oc;
      if (o.is_string()) {
        oc.kind = parse_oracle_kind(o.get<std::string>());
      } else {
        oc.kind = parse_oracle_kind(o.at("kind").get<std::string>());
        oc.seed = o.value("seed", std::uint64_t{0});
        oc.relative_noise = o.value("relative_noise", 0.0);
        oc.digit_drop_probability = o.value("digit_drop_probability", 0.0);
      }
      plan.oracle = oc;
    }
    if (j.contains("endpoint_config") || j.contains("endpoint")) {
      auto kv = endpoint_defaults;
      if (j.contains("endpoint_config")) {
        std::filesystem::path p(j["endpoint_config"].get<std::string>());
        if (!p.is_absolute()) p = std::filesystem::path(base_dir) / p;
        for (auto& [k, v] : read_settings_file(p.string())) kv[k] = v;
      }
      if (j.contains("endpoint")) {
        for (const auto& [k, v] : j["endpoint"].items()) {
          kv[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
      }
      EndpointConfig ec;
      apply_endpoint_settings(kv, ec);
      plan.endpoint = ec;
    }
    if (j.contains("meta_generator")) {
      const auto m = j["meta_generator"].get<std::string>();
      if (m == "fallback") {
        plan.meta = MetaSource::kFallback;
      } else if (m == "endpoint") {
        plan.meta = MetaSource::kEndpoint;
      } else {
        throw ValidationError("unknown meta_generator '" + m + "'");
      }
    }
    if (j.contains("solid_probability")) plan.solid_probability = j["solid_probability"].get<double>();
    if (j.contains("max_parallel")) plan.max_parallel = j["max_parallel"].get<int>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("run plan: ") + e.what());
  }
  plan.normalize_and_validate();
  return plan;
}

RunPlan load_run_plan(const std::string& path,
                      const std::map<std::string, std::string>& endpoint_defaults) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open run plan '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  auto j = json::parse(os.str(), nullptr, false);
  if (j.is_discarded()) throw ValidationError("run plan '" + path + "' is not valid JSON");
  return parse_run_plan(j, dir_of(path), endpoint_defaults);
}

json to_json(const RunPlan& plan) {
  json j;
  j["corpus"] = plan.corpus;
  j["schema"] = plan.schema == CorpusSchema::kQa ? "qa" : "calc";
  j["dataset"] = plan.dataset;
  j["modes"] = json::array();
  for (auto m : plan.modes) j["modes"].push_back(mask_mode_name(m));
  j["rates"] = plan.rates;
  j["trials"] = plan.trials;
  j["seed"] = plan.seed;
  j["evidence_mode"] = plan.evidence_mode ? json(evidence_mode_name(*plan.evidence_mode)) : json(nullptr);
  j["restricted"] = plan.restricted;
  if (plan.oracle) {
    j["oracle"] = {{"kind", oracle_kind_name(plan.oracle->kind)},
                   {"seed", plan.oracle->seed},
                   {"relative_noise", plan.oracle->relative_noise},
                   {"digit_drop_probability", plan.oracle->digit_drop_probability}};
  }
  if (plan.endpoint) {
    j["endpoint"] = {{"base_url", plan.endpoint->base_url},
                     {"model", plan.endpoint->model_name},
                     {"api_key_env", plan.endpoint->api_key_env},
                     {"temperature", plan.endpoint->temperature},
                     {"max_retries", plan.endpoint->max_retries},
                     {"timeout_ms", plan.endpoint->timeout.count()},
                     {"max_parallel", plan.endpoint->max_parallel},
                     {"backoff_ms", plan.endpoint->initial_backoff.count()}};
  }
  j["meta_generator"] = plan.meta == MetaSource::kFallback ? "fallback" : "endpoint";
  j["solid_probability"] = plan.solid_probability;
  j["max_parallel"] = plan.max_parallel;
  // Choices this toolkit makes where the method leaves room.
  j["sampling"] = "nested";
  j["rate_denominator"] = "maskable tokens after mode and rule exclusions";
  j["calc_answer_format"] = "json map of variable names";
  return j;
}

std::optional<int> parse_mskqa_response(std::string_view raw, int n_options) {
  auto obj = first_json_object(raw);
  if (!obj || !obj->contains("answer")) return std::nullopt;
  const auto& a = (*obj)["answer"];
  std::optional<long long> v;
  if (a.is_number_integer()) {
    v = a.get<long long>();
  } else if (a.is_number_float()) {
    const double d = a.get<double>();
    if (std::floor(d) == d) v = static_cast<long long>(d);
  } else if (a.is_string()) {
    const auto s = trim(a.get_ref<const std::string&>());
    if (!s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
        s.size() < 10) {
      v = std::stoll(std::string(s));
    }
  }
  if (!v || *v < 1 || *v > n_options) return std::nullopt;
  return static_cast<int>(*v);
}

std::optional<double> normalize_number(std::string_view text, std::vector<std::string>* notes) {
  auto note = [&](std::string n) {
    if (notes) notes->push_back(std::move(n));
  };
  std::string s = to_lower(trim(text));
  // Multiplication sign and currency symbols.
  for (auto [from, to] : {std::pair<std::string, std::string>{"\xc3\x97", "x"},
                          {"\xc2\xa5", ""}, {"$", ""}}) {
    for (auto p = s.find(from); p != std::string::npos; p = s.find(from)) {
      s.replace(p, from.size(), to);
      if (!to.empty()) continue;
      note("stripped currency symbol");
    }
  }
  static const std::regex number_re(R"(^\s*([-+]?(?:\d[\d,]*)?\.?\d+(?:e[-+]?\d+)?)(.*)$)");
  std::smatch m;
  if (!std::regex_match(s, m, number_re)) return std::nullopt;
  std::string num = m[1].str();
  std::string rest = m[2].str();
  if (num.find(',') != std::string::npos) {
    num.erase(std::remove(num.begin(), num.end(), ','), num.end());
    note("removed thousands separators");
  }
  char* end = nullptr;
  double value = std::strtod(num.c_str(), &end);
  if (end != num.c_str() + num.size()) return std::nullopt;

  static const std::regex power_re(R"(^\s*[x*]\s*10\s*\^\s*([-+]?\d+)(.*)$)");
  if (std::regex_match(rest, m, power_re)) {
    value *= std::pow(10.0, std::stoi(m[1].str()));
    note("applied power of ten");
    rest = m[2].str();
  }
  static const std::map<std::string, double> scales = {
      {"thousand", 1e3}, {"million", 1e6}, {"billion", 1e9}, {"trillion", 1e12}};
  static const std::vector<std::string> units = {"yen", "jpy", "units", "unit",
                                                 "dollars", "usd", "pieces"};
  std::string word;
  std::istringstream words(rest);
  while (words >> word) {
    while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.back()))) word.pop_back();
    if (word.empty()) continue;
    if (auto it = scales.find(word); it != scales.end()) {
      value *= it->second;
      note("applied scale '" + word + "'");
    } else if (std::find(units.begin(), units.end(), word) != units.end()) {
      note("stripped unit '" + word + "'");
    } else {
      note("ignored trailing '" + word + "'");
    }
  }
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

CalcParse parse_mskcal_response(std::string_view raw, const std::vector<std::string>& targets) {
  CalcParse out;
  auto obj = first_json_object(raw);
  if (!obj) return out;
  std::map<std::string, json> by_name;
  for (const auto& [k, v] : obj->items()) by_name[canonical_variable_name(k)] = v;
  for (const auto& t : targets) {
    const auto name = canonical_variable_name(t);
    auto it = by_name.find(name);
    if (it == by_name.end()) continue;
    const auto& v = it->second;
    std::optional<double> value;
    if (v.is_number()) {
      value = v.get<double>();
    } else if (v.is_string()) {
      std::vector<std::string> notes;
      value = normalize_number(v.get<std::string>(), &notes);
      for (auto& n : notes) out.notes.push_back(name + ": " + n);
    }
    if (value) out.values[name] = *value;
  }
  out.missing = out.values.empty();
  return out;
}

std::vector<PromptBundle> build_campaign_prompts(const Corpus& corpus, const RunPlan& plan,
                                                 MetaGenerator& generator) {
  std::vector<PromptBundle> out;
  if (const auto* qa = std::get_if<std::vector<QAItem>>(&corpus)) {
    for (const auto& item : *qa) {
      const auto seed = document_seed(plan.seed, item.id);
      for (auto mode : plan.modes) {
        for (double rate : plan.rates) {
          auto masked = mask_qa_item(item, plan.evidence_mode, mode, rate, seed, generator);
          out.push_back(build_mskqa_prompt(item, qa_parts(masked), plan.evidence_mode));
        }
      }
    }
  } else {
    for (const auto& task : std::get<std::vector<CalcTask>>(corpus)) {
      const auto seed = document_seed(plan.seed, task.id);
      for (auto mode : plan.modes) {
        for (double rate : plan.rates) {
          auto masked = mask_calc_task(task, plan.restricted, mode, rate, seed, generator);
          out.push_back(build_mskcal_prompt(task, calc_parts(masked), plan.restricted));
        }
      }
    }
  }
  return out;
}

std::shared_ptr<Completer> make_completer(const RunPlan& plan, std::shared_ptr<AuditLog> audit) {
  if (plan.oracle) return std::make_shared<MockOracle>(*plan.oracle);
  if (plan.endpoint) return std::make_shared<HttpCompleter>(*plan.endpoint, std::move(audit));
  throw ValidationError("plan has no backend");
}

std::vector<TrialRecord> run_campaign(const Corpus& corpus, const RunPlan& plan,
                                      Completer& completer, const CampaignOptions& options) {
  const auto info = item_info(corpus);
  const TaskKind kind = std::holds_alternative<std::vector<QAItem>>(corpus)
                            ? TaskKind::kMskQa
                            : TaskKind::kMskCal;

  std::unique_ptr<MetaGenerator> generator;
  if (plan.meta == MetaSource::kEndpoint) {
    generator = std::make_unique<LlmMetaGenerator>(
        std::shared_ptr<Completer>(&completer, [](Completer*) {}));
  } else {
    generator = std::make_unique<FallbackMetaGenerator>(plan.solid_probability, plan.seed);
  }
  const auto prompts = build_campaign_prompts(corpus, plan, *generator);

  std::unordered_map<std::string, TrialRecord> done;
  if (!options.log_path.empty() && options.resume &&
      std::filesystem::exists(options.log_path)) {
    for (auto& r : read_trial_log(options.log_path)) {
      auto key = trial_key(r);
      done.emplace(std::move(key), std::move(r));
    }
  }

  std::vector<std::string> order;
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < prompts.size(); ++p) {
    const auto& b = prompts[p];
    for (int t = 0; t < plan.trials; ++t) {
      auto key = trial_key(plan.dataset, b.item_id, b.params.mode, b.params.rate, t);
      order.push_back(key);
      if (!done.contains(key)) jobs.push_back({p, t, std::move(key)});
    }
  }
  if (options.limit && jobs.size() > *options.limit) jobs.resize(*options.limit);

  std::unordered_map<std::string, TrialRecord> fresh;
  std::ofstream log;
  if (!options.log_path.empty()) {
    // Rewrite what is kept so a log from a different grid does not linger.
    std::vector<TrialRecord> kept;
    for (const auto& k : order) {
      if (auto it = done.find(k); it != done.end()) kept.push_back(it->second);
    }
    write_trial_log(options.log_path, kept);
    log.open(options.log_path, std::ios::app | std::ios::binary);
    if (!log) throw Error("cannot append to trial log '" + options.log_path + "'");
  }

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr failure;

  auto worker = [&] {
    while (!abort) {
      const auto i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const auto& job = jobs[i];
      const auto& b = prompts[job.prompt];
      const auto& meta = info.at(b.item_id);
      CompletionContext ctx;
      ctx.item_id = b.item_id;
      ctx.trial = job.trial;
      ctx.n_options = meta.n_options;
      ctx.answer_index = meta.answer_index;
      ctx.givens = meta.givens;
      ctx.calc_targets = meta.calc_targets;

      TrialRecord r;
      r.dataset = plan.dataset;
      r.item_id = b.item_id;
      r.kind = kind;
      r.mode = b.params.mode;
      r.rate = b.params.rate;
      r.trial = job.trial;
      try {
        r.raw_response = completer.complete(b.prompt_text, ctx);
      } catch (const TransportError& e) {
        r.error = e.what();
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        abort = true;
        return;
      }
      score_record(r, meta);
      std::lock_guard lock(mu);
      if (log.is_open()) {
        log << to_json(r).dump() << '\n';
        log.flush();
      }
      fresh.emplace(job.key, std::move(r));
    }
  };

  const int threads = std::max(1, std::min<int>(plan.max_parallel, static_cast<int>(jobs.size())));
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (log.is_open()) log.close();
  if (failure) std::rethrow_exception(failure);

  std::vector<TrialRecord> out;
  out.reserve(order.size());
  for (const auto& k : order) {
    if (auto it = fresh.find(k); it != fresh.end()) {
      out.push_back(std::move(it->second));
    } else if (auto d = done.find(k); d != done.end()) {
      out.push_back(std::move(d->second));
    }
  }
  if (!options.log_path.empty()) write_trial_log(options.log_path, out);
  return out;
}

std::vector<TrialRecord> run_campaign(const RunPlan& plan, const CampaignOptions& options) {
  const auto corpus = load_corpus(plan.corpus, plan.schema);
  std::shared_ptr<AuditLog> audit;
  if (plan.endpoint && !options.log_path.empty()) {
    audit = std::make_shared<AuditLog>(options.log_path + ".audit.jsonl");
  }
  auto completer = make_completer(plan, audit);
  return run_campaign(corpus, plan, *completer, options);
}

void rescore(std::vector<TrialRecord>& records, const Corpus& corpus) {
  const auto info = item_info(corpus);
  for (auto& r : records) {
    auto it = info.find(r.item_id);
    if (it == info.end()) {
      throw ValidationError("record " + trial_key(r) + " refers to an unknown item");
    }
    score_record(r, it->second);
  }
}

}  // namespace maskeval
