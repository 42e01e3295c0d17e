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

// Evaluation campaigns over the (item x mode x rate x trial) grid.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "maskeval/corpus.hpp"
#include "maskeval/llm_client.hpp"
#include "maskeval/masking.hpp"
#include "maskeval/prompting.hpp"
#include "maskeval/trial.hpp"

namespace maskeval {

/// 0.00, 0.05, ..., 1.00.
std::vector<double> default_rates();

enum class MetaSource { kFallback, kEndpoint };

struct RunPlan {
  std::string corpus;  // path; relative paths resolve against the plan file
  CorpusSchema schema = CorpusSchema::kQa;
  std::string dataset;  // label written into every record
  std::vector<MaskMode> modes = {MaskMode::kRegular};
  std::vector<double> rates = default_rates();
  int trials = 10;
  std::uint64_t seed = 0;
  std::optional<EvidenceMode> evidence_mode;
  bool restricted = false;
  std::optional<OracleConfig> oracle;      // exactly one of oracle/endpoint
  std::optional<EndpointConfig> endpoint;
  MetaSource meta = MetaSource::kFallback;
  double solid_probability = 0.0;
  int max_parallel = 4;  // worker threads; an endpoint's own bound also applies

  /// Inserts rate 0 when absent, then checks: rates in [0, 1] and strictly
  /// increasing, trials >= 1, at least one mode, exactly one backend.
  void normalize_and_validate();
};

/// Plan file: JSON object with the RunPlan fields. "endpoint" may be an
/// inline object of endpoint settings and/or "endpoint_config" a path to a
/// .toml/.json config file; inline settings win over the file, and both win
/// over `endpoint_defaults` (typically endpoint_settings_from_env()).
RunPlan parse_run_plan(const nlohmann::json& j, const std::string& base_dir = ".",
                       const std::map<std::string, std::string>& endpoint_defaults = {});
RunPlan load_run_plan(const std::string& path,
                      const std::map<std::string, std::string>& endpoint_defaults = {});
nlohmann::json to_json(const RunPlan& plan);

/// Index of the chosen option, or nullopt when no well-formed answer in
/// 1..n_options is present. Reads the first JSON object in `raw`; accepts
/// single-quoted pseudo-JSON.
std::optional<int> parse_mskqa_response(std::string_view raw, int n_options);

/// A number with thousands separators, units and scale words, e.g.
/// "2,772.00 million yen" -> 2.772e9. Normalizations applied are appended
/// to `notes`.
std::optional<double> normalize_number(std::string_view text,
                                       std::vector<std::string>* notes = nullptr);

struct CalcParse {
  std::map<std::string, double> values;  // canonical names
  std::vector<std::string> notes;
  bool missing = true;  // no target could be read
};

CalcParse parse_mskcal_response(std::string_view raw,
                                const std::vector<std::string>& targets);

struct CampaignOptions {
  std::string log_path;  // empty: keep records in memory only
  bool resume = true;    // reuse records already in the log
  /// Stop after this many new trials (simulates an interrupted run).
  std::optional<std::size_t> limit;
};

/// Prompts for every (item, mode, rate), in canonical order.
std::vector<PromptBundle> build_campaign_prompts(const Corpus& corpus,
                                                 const RunPlan& plan,
                                                 MetaGenerator& generator);

/// Runs the grid and returns every record of the plan's grid in canonical
/// order (item, mode, rate, trial). Per-trial transport failures become
/// missing records; AuthError and configuration errors abort.
std::vector<TrialRecord> run_campaign(const Corpus& corpus, const RunPlan& plan,
                                      Completer& completer,
                                      const CampaignOptions& options = {});

/// Loads the corpus and builds the backend named in the plan.
std::vector<TrialRecord> run_campaign(const RunPlan& plan,
                                      const CampaignOptions& options = {});

/// Backend for a plan: a MockOracle or an HttpCompleter.
std::shared_ptr<Completer> make_completer(const RunPlan& plan,
                                          std::shared_ptr<AuditLog> audit = nullptr);

/// Recomputes correctness / relative errors of records from their raw
/// responses (used by `score` to re-parse a log).
void rescore(std::vector<TrialRecord>& records, const Corpus& corpus);

}  // namespace maskeval
