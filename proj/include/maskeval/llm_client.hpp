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

// Completion backends: an OpenAI-compatible chat-completions client and
// deterministic mock oracles for offline campaigns.

#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "maskeval/calc.hpp"

namespace maskeval {

/// What the backend may know about the trial besides the prompt. HTTP
/// endpoints ignore it; mock oracles read the answer key from it.
struct CompletionContext {
  std::string item_id;
  std::int64_t trial = 0;
  int n_options = 0;
  std::optional<int> answer_index;                 // multiple choice key
  std::optional<CalcGivens> givens;                // calculation inputs
  std::map<std::string, double> calc_targets;      // calculation key
};

class Completer {
 public:
  virtual ~Completer() = default;
  /// Raw response text. Throws TransportError when the backend cannot be
  /// reached, AuthError when it rejects the credentials.
  virtual std::string complete(std::string_view prompt,
                               const CompletionContext& context) = 0;
};

enum class OracleKind { kPerfect, kUniformRandom, kSilent, kCalcExact, kCalcNoisy };

std::string_view oracle_kind_name(OracleKind kind);
OracleKind parse_oracle_kind(std::string_view name);

struct OracleConfig {
  OracleKind kind = OracleKind::kPerfect;
  std::uint64_t seed = 0;
  /// CALC_NOISY: relative standard deviation applied to every value.
  double relative_noise = 0.0;
  /// CALC_NOISY: chance that a value loses a trailing zero (divided by 10).
  double digit_drop_probability = 0.0;
};

/// Deterministic stand-in for a model. Output depends only on the config,
/// the prompt text and the context; no shared mutable state.
class MockOracle : public Completer {
 public:
  explicit MockOracle(OracleConfig config) : config_(config) {}
  std::string complete(std::string_view prompt,
                       const CompletionContext& context) override;

 private:
  OracleConfig config_;
};

/// Always returns the same text. Used to replay a canned response.
class FixedResponder : public Completer {
 public:
  explicit FixedResponder(std::string response)
      : response_(std::move(response)) {}
  std::string complete(std::string_view, const CompletionContext&) override {
    return response_;
  }

 private:
  std::string response_;
};

struct EndpointConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model_name = "gpt-4o-mini";
  std::string api_key;  // filled from api_key_env when empty
  std::string api_key_env = "OPENAI_API_KEY";
  double temperature = 0.0;
  int max_retries = 3;
  std::chrono::milliseconds timeout{60000};
  int max_parallel = 4;
  std::chrono::milliseconds initial_backoff{500};

  /// Throws ValidationError on max_retries < 0 or max_parallel < 1.
  void validate() const;
};

/// Flat TOML subset: `key = value` lines, quoted strings, numbers, booleans,
/// '#' comments. Table headers are accepted and prefix keys ("[endpoint]"
/// then "model" gives "endpoint.model").
std::map<std::string, std::string> parse_flat_toml(std::string_view text);

/// Applies recognised keys (base_url, model, api_key_env, temperature,
/// max_retries, timeout_ms, max_parallel, backoff_ms; optionally under an
/// [endpoint] table) on top of `config`.
void apply_endpoint_settings(const std::map<std::string, std::string>& kv,
                             EndpointConfig& config);
/// Raw settings of a .toml or .json config file (JSON objects are
/// flattened the same way TOML tables are).
std::map<std::string, std::string> read_settings_file(const std::string& path);
/// Settings from MASKEVAL_BASE_URL, MASKEVAL_MODEL, MASKEVAL_MAX_PARALLEL
/// and MASKEVAL_TIMEOUT_MS, when set.
std::map<std::string, std::string> endpoint_settings_from_env();
/// Reads a .toml or .json file into an EndpointConfig.
EndpointConfig load_endpoint_config(const std::string& path);

/// Append-only JSONL log of every request/response pair.
class AuditLog {
 public:
  explicit AuditLog(std::string path) : path_(std::move(path)) {}
  void append(const nlohmann::json& record);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::mutex mutex_;
};

/// POSTs {base_url}/chat/completions with a single user message and returns
/// choices[0].message.content. Retries transport failures, 429 and 5xx with
/// exponential backoff; 401/403 throw AuthError at once. At most
/// max_parallel requests are in flight across all threads using this
/// instance.
class HttpCompleter : public Completer {
 public:
  explicit HttpCompleter(EndpointConfig config,
                         std::shared_ptr<AuditLog> audit = nullptr);
  std::string complete(std::string_view prompt,
                       const CompletionContext& context) override;

  static nlohmann::json request_body(const EndpointConfig& config,
                                     std::string_view prompt);

 private:
  std::string post_once(const std::string& body, int& status,
                        std::string& error);

  EndpointConfig config_;
  std::shared_ptr<AuditLog> audit_;
  std::counting_semaphore<1024> in_flight_;
  std::string host_;  // scheme://host[:port]
  std::string path_;  // /v1/chat/completions
};

}  // namespace maskeval
