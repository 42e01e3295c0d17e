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

#include "maskeval/llm_client.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"

#include "maskeval/error.hpp"
#include "maskeval/text_util.hpp"

namespace maskeval {
namespace {

using nlohmann::json;

std::uint64_t trial_hash(std::uint64_t seed, std::string_view prompt,
                         const CompletionContext& ctx) {
  auto h = hash_combine(seed, fnv1a64(ctx.item_id));
  h = hash_combine(h, static_cast<std::uint64_t>(ctx.trial));
  return hash_combine(h, fnv1a64(prompt));
}

json calc_answer(const CompletionContext& ctx) {
  json out = json::object();
  if (ctx.givens) {
    const auto ground = calc_oracle(*ctx.givens);
    for (auto name : kCalcVariables) {
      out[std::string(name)] = to_double(*ground.value(name));
    }
    return out;
  }
  if (ctx.calc_targets.empty()) {
    throw ValidationError("calculation oracle needs givens or an answer key");
  }
  for (const auto& [k, v] : ctx.calc_targets) out[k] = v;
  return out;
}

std::string unquote(std::string_view v, std::size_t line_no) {
  const char q = v.front();
  if (v.size() < 2 || v.back() != q) {
    throw ValidationError("config line " + std::to_string(line_no) +
                          ": unterminated string");
  }
  v = v.substr(1, v.size() - 2);
  if (q == '\'') return std::string(v);
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != '\\' || i + 1 == v.size()) {
      out += v[i];
      continue;
    }
    switch (v[++i]) {
      case 'n':
        out += '\n';
        break;
      case 't':
        out += '\t';
        break;
      default:
        out += v[i];
    }
  }
  return out;
}

void flatten_json(const json& j, const std::string& prefix,
                  std::map<std::string, std::string>& out) {
  for (const auto& [k, v] : j.items()) {
    const auto key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object()) {
      flatten_json(v, key, out);
    } else if (v.is_string()) {
      out[key] = v.get<std::string>();
    } else {
      out[key] = v.dump();
    }
  }
}

template <typename T>
T parse_setting(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    T out;
    if constexpr (std::is_same_v<T, double>) {
      out = std::stod(value, &used);
    } else {
      out = static_cast<T>(std::stoll(value, &used));
    }
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw ValidationError("setting '" + key + "' has invalid value '" + value + "'");
  }
}

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace

std::string_view oracle_kind_name(OracleKind kind) {
  switch (kind) {
    case OracleKind::kPerfect:
      return "perfect";
    case OracleKind::kUniformRandom:
      return "uniform_random";
    case OracleKind::kSilent:
      return "silent";
    case OracleKind::kCalcExact:
      return "calc_exact";
    case OracleKind::kCalcNoisy:
      return "calc_noisy";
  }
  return "perfect";
}

OracleKind parse_oracle_kind(std::string_view name) {
  auto lower = to_lower(name);
  for (auto& c : lower) {
    if (c == '-') c = '_';
  }
  for (auto k : {OracleKind::kPerfect, OracleKind::kUniformRandom,
                 OracleKind::kSilent, OracleKind::kCalcExact,
                 OracleKind::kCalcNoisy}) {
    if (lower == oracle_kind_name(k)) return k;
  }
  throw ValidationError("unknown oracle '" + std::string(name) + "'");
}

std::string MockOracle::complete(std::string_view prompt,
                                 const CompletionContext& context) {
  switch (config_.kind) {
    case OracleKind::kSilent:
      return "";
    case OracleKind::kPerfect: {
      if (context.answer_index) {
        return json{{"basis", "key"}, {"answer", *context.answer_index}}.dump();
      }
      if (context.givens || !context.calc_targets.empty()) {
        return calc_answer(context).dump();
      }
      throw ValidationError("perfect oracle needs the answer key for '" +
                            context.item_id + "'");
    }
    case OracleKind::kUniformRandom: {
      if (context.n_options < 1) {
        throw ValidationError("uniform oracle needs the option count");
      }
      SeededRng rng(trial_hash(config_.seed, prompt, context));
      const auto pick = static_cast<int>(rng.below(context.n_options)) + 1;
      return json{{"basis", "random"}, {"answer", pick}}.dump();
    }
    case OracleKind::kCalcExact:
      return calc_answer(context).dump();
    case OracleKind::kCalcNoisy: {
      auto answer = calc_answer(context);
      SeededRng rng(trial_hash(config_.seed, prompt, context));
      for (auto& [_, v] : answer.items()) {
        double x = v.get<double>();
        x *= 1.0 + config_.relative_noise * rng.normal();
        if (rng.uniform() < config_.digit_drop_probability) x /= 10.0;
        v = x;
      }
      return answer.dump();
    }
  }
  return "";
}

void EndpointConfig::validate() const {
  if (max_retries < 0) throw ValidationError("max_retries must be >= 0");
  if (max_parallel < 1) throw ValidationError("max_parallel must be >= 1");
  if (max_parallel > 1024) throw ValidationError("max_parallel must be <= 1024");
  if (timeout.count() <= 0) throw ValidationError("timeout must be positive");
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
    throw ValidationError("base_url must start with http:// or https://");
  }
}

std::map<std::string, std::string> parse_flat_toml(std::string_view text) {
  std::map<std::string, std::string> out;
  std::string table;
  std::size_t line_no = 0;
  for (auto raw : split_lines(text)) {
    ++line_no;
    // Cut comments that are not inside a quoted value.
    char quote = 0;
    std::size_t cut = raw.size();
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const char c = raw[i];
      if (quote) {
        if (c == '\\' && quote == '"') {
          ++i;
        } else if (c == quote) {
          quote = 0;
        }
      } else if (c == '"' || c == '\'') {
        quote = c;
      } else if (c == '#') {
        cut = i;
        break;
      }
    }
    const auto line = trim(raw.substr(0, cut));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ValidationError("config line " + std::to_string(line_no) +
                              ": malformed table header");
      }
      table = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": expected key = value");
    }
    const auto key = std::string(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": expected key = value");
    }
    const auto full = table.empty() ? key : table + "." + key;
    out[full] = (value.front() == '"' || value.front() == '\'')
                    ? unquote(value, line_no)
                    : std::string(value);
  }
  return out;
}

void apply_endpoint_settings(const std::map<std::string, std::string>& kv,
                             EndpointConfig& config) {
  for (const auto& [raw_key, value] : kv) {
    std::string_view key = raw_key;
    if (key.rfind("endpoint.", 0) == 0) key.remove_prefix(9);
    const std::string k(key);
    if (k == "base_url") {
      config.base_url = value;
    } else if (k == "model" || k == "model_name") {
      config.model_name = value;
    } else if (k == "api_key_env") {
      config.api_key_env = value;
    } else if (k == "temperature") {
      config.temperature = parse_setting<double>(k, value);
    } else if (k == "max_retries") {
      config.max_retries = parse_setting<int>(k, value);
    } else if (k == "timeout_ms") {
      config.timeout = std::chrono::milliseconds(parse_setting<std::int64_t>(k, value));
    } else if (k == "max_parallel") {
      config.max_parallel = parse_setting<int>(k, value);
    } else if (k == "backoff_ms") {
      config.initial_backoff =
          std::chrono::milliseconds(parse_setting<std::int64_t>(k, value));
    }
  }
}

std::map<std::string, std::string> read_settings_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  std::map<std::string, std::string> kv;
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    auto j = json::parse(os.str(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw ValidationError("config file '" + path + "' is not a JSON object");
    }
    flatten_json(j, "", kv);
  } else {
    kv = parse_flat_toml(os.str());
  }
  return kv;
}

std::map<std::string, std::string> endpoint_settings_from_env() {
  std::map<std::string, std::string> kv;
  for (auto [env, key] : {std::pair{"MASKEVAL_BASE_URL", "base_url"},
                          {"MASKEVAL_MODEL", "model"},
                          {"MASKEVAL_MAX_PARALLEL", "max_parallel"},
                          {"MASKEVAL_TIMEOUT_MS", "timeout_ms"}}) {
    if (const char* v = std::getenv(env)) kv[key] = v;
  }
  return kv;
}

EndpointConfig load_endpoint_config(const std::string& path) {
  EndpointConfig config;
  apply_endpoint_settings(read_settings_file(path), config);
  config.validate();
  return config;
}

void AuditLog::append(const json& record) {
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw Error("cannot append to audit log '" + path_ + "'");
  out << record.dump() << '\n';
}

HttpCompleter::HttpCompleter(EndpointConfig config,
                             std::shared_ptr<AuditLog> audit)
    : config_(std::move(config)),
      audit_(std::move(audit)),
      // validate before the semaphore sees max_parallel
      in_flight_((config_.validate(), config_.max_parallel)) {
  if (config_.api_key.empty() && !config_.api_key_env.empty()) {
    if (const char* v = std::getenv(config_.api_key_env.c_str())) {
      config_.api_key = v;
    }
  }
  auto url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  const auto scheme_end = url.find("://") + 3;
  const auto slash = url.find('/', scheme_end);
  host_ = url.substr(0, slash);
  path_ = (slash == std::string::npos ? "" : url.substr(slash)) + "/chat/completions";
}

json HttpCompleter::request_body(const EndpointConfig& config,
                                 std::string_view prompt) {
  return json{{"model", config.model_name},
              {"temperature", config.temperature},
              {"messages",
               json::array({json{{"role", "user"}, {"content", std::string(prompt)}}})}};
}

std::string HttpCompleter::post_once(const std::string& body, int& status,
                                     std::string& error) {
  httplib::Client client(host_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
      config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  in_flight_.acquire();
  auto res = client.Post(path_, headers, body, "application/json");
  in_flight_.release();
  if (!res) {
    status = 0;
    error = httplib::to_string(res.error());
    return "";
  }
  status = res->status;
  return res->body;
}

std::string HttpCompleter::complete(std::string_view prompt,
                                    const CompletionContext& context) {
  const auto body = request_body(config_, prompt).dump();
  auto backoff = config_.initial_backoff;
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    int status = 0;
    std::string error;
    const auto response = post_once(body, status, error);
    if (audit_) {
      audit_->append(json{{"time_ms", now_ms()},
                          {"item_id", context.item_id},
                          {"trial", context.trial},
                          {"attempt", attempt},
                          {"url", host_ + path_},
                          {"request", json::parse(body)},
                          {"status", status},
                          {"response", response},
                          {"error", error}});
    }
    if (status == 401 || status == 403) {
      throw AuthError("endpoint rejected credentials (HTTP " +
                      std::to_string(status) + ")");
    }
    if (status >= 200 && status < 300) {
      auto j = json::parse(response, nullptr, false);
      try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const json::exception&) {
        throw TransportError("response has no choices[0].message.content");
      }
    }
    const bool retryable = status == 0 || status == 429 || status >= 500;
    last_error = status == 0 ? error : "HTTP " + std::to_string(status);
    if (!retryable) throw TransportError("request failed: " + last_error);
    if (attempt < config_.max_retries) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw TransportError("request failed after " +
                       std::to_string(config_.max_retries + 1) +
                       " attempts: " + last_error);
}

}  // namespace maskeval
