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

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "maskeval/error.hpp"
#include "test_support.hpp"

namespace maskeval {
namespace {

using nlohmann::json;

CalcGivens sales_givens() {
  return givens_from_map({{"A", 15840},
                          {"B", 27720},
                          {"C", 3960},
                          {"D", 2772000000},
                          {"E", 1980000000},
                          {"unit_cost", 8000},
                          {"reduction_rate", 0.25}});
}

TEST(LlmClient, OracleNames) {
  for (auto k : {OracleKind::kPerfect, OracleKind::kUniformRandom, OracleKind::kSilent,
                 OracleKind::kCalcExact, OracleKind::kCalcNoisy}) {
    EXPECT_EQ(parse_oracle_kind(oracle_kind_name(k)), k);
  }
  EXPECT_EQ(parse_oracle_kind("Uniform-Random"), OracleKind::kUniformRandom);
  EXPECT_THROW(parse_oracle_kind("psychic"), ValidationError);
}

TEST(LlmClient, PerfectAndSilent) {
  MockOracle perfect({OracleKind::kPerfect});
  CompletionContext ctx;
  ctx.item_id = "q";
  ctx.n_options = 4;
  ctx.answer_index = 3;
  const auto j = json::parse(perfect.complete("p", ctx));
  EXPECT_EQ(j["answer"], 3);
  MockOracle silent({OracleKind::kSilent});
  EXPECT_EQ(silent.complete("p", ctx), "");
  CompletionContext bare;
  EXPECT_THROW(perfect.complete("p", bare), ValidationError);
}

TEST(LlmClient, UniformIsReproducibleAndFlat) {
  MockOracle a({OracleKind::kUniformRandom, 7});
  MockOracle b({OracleKind::kUniformRandom, 7});
  std::array<int, 4> counts{};
  for (int t = 0; t < 4000; ++t) {
    CompletionContext ctx;
    ctx.item_id = "item" + std::to_string(t % 50);
    ctx.trial = t;
    ctx.n_options = 4;
    const auto x = a.complete("prompt", ctx);
    EXPECT_EQ(x, b.complete("prompt", ctx));
    const int pick = json::parse(x)["answer"];
    ASSERT_GE(pick, 1);
    ASSERT_LE(pick, 4);
    ++counts[pick - 1];
  }
  // 1000 expected per option, sd about 27.
  for (int c : counts) EXPECT_NEAR(c, 1000, 120);
  CompletionContext none;
  EXPECT_THROW(a.complete("p", none), ValidationError);
}

TEST(LlmClient, CalcOracles) {
  CompletionContext ctx;
  ctx.item_id = "sales";
  ctx.givens = sales_givens();
  MockOracle exact({OracleKind::kCalcExact});
  const auto j = json::parse(exact.complete("p", ctx));
  EXPECT_EQ(j.size(), 8u);
  EXPECT_EQ(j["P"].get<double>(), 62500);
  EXPECT_EQ(j["E_prime"].get<double>(), 1389960000);

  OracleConfig drop{OracleKind::kCalcNoisy, 1, 0.0, 1.0};
  const auto d = json::parse(MockOracle(drop).complete("p", ctx));
  EXPECT_DOUBLE_EQ(d["P"].get<double>(), 6250);
  EXPECT_DOUBLE_EQ(d["N"].get<double>(), 2376);

  OracleConfig noisy{OracleKind::kCalcNoisy, 1, 0.05, 0.0};
  MockOracle n1(noisy), n2(noisy);
  const auto x = n1.complete("p", ctx);
  EXPECT_EQ(x, n2.complete("p", ctx));
  const auto nj = json::parse(x);
  EXPECT_NE(nj["P"].get<double>(), 62500);
  EXPECT_NEAR(nj["P"].get<double>(), 62500, 62500 * 0.3);

  // Without givens the answer key is echoed.
  CompletionContext keyed;
  keyed.calc_targets = {{"P", 5.0}};
  EXPECT_EQ(json::parse(exact.complete("p", keyed))["P"], 5.0);
  EXPECT_THROW(exact.complete("p", CompletionContext{}), ValidationError);
}

TEST(LlmClient, FixedResponder) {
  FixedResponder r("hello");
  EXPECT_EQ(r.complete("x", {}), "hello");
}

TEST(LlmClient, EndpointValidation) {
  EndpointConfig c;
  EXPECT_NO_THROW(c.validate());
  auto bad = c;
  bad.max_retries = -1;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = c;
  bad.max_parallel = 0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = c;
  bad.max_parallel = 5000;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = c;
  bad.timeout = std::chrono::milliseconds(0);
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = c;
  bad.base_url = "ftp://x";
  EXPECT_THROW(bad.validate(), ValidationError);
  EXPECT_THROW(HttpCompleter{bad}, ValidationError);
}

TEST(LlmClient, FlatToml) {
  const auto kv = parse_flat_toml(
      "# top comment\n"
      "model = \"gpt-4o-mini\"  # trailing\n"
      "[endpoint]\n"
      "base_url = 'http://localhost:1/v1'\n"
      "max_parallel = 8\n"
      "note = \"has # inside\\n\"\n");
  EXPECT_EQ(kv.at("model"), "gpt-4o-mini");
  EXPECT_EQ(kv.at("endpoint.base_url"), "http://localhost:1/v1");
  EXPECT_EQ(kv.at("endpoint.max_parallel"), "8");
  EXPECT_EQ(kv.at("endpoint.note"), "has # inside\n");
  EXPECT_THROW(parse_flat_toml("novalue\n"), ValidationError);
  EXPECT_THROW(parse_flat_toml("[broken\n"), ValidationError);
  EXPECT_THROW(parse_flat_toml("k = \"open\n"), ValidationError);
  EXPECT_THROW(parse_flat_toml("k =\n"), ValidationError);
}

TEST(LlmClient, ApplySettings) {
  EndpointConfig c;
  apply_endpoint_settings({{"endpoint.base_url", "http://h:9/v1"},
                           {"model", "m"},
                           {"max_retries", "5"},
                           {"timeout_ms", "1500"},
                           {"max_parallel", "3"},
                           {"temperature", "0.5"},
                           {"backoff_ms", "10"},
                           {"api_key_env", "MY_KEY"},
                           {"unrelated", "ignored"}},
                          c);
  EXPECT_EQ(c.base_url, "http://h:9/v1");
  EXPECT_EQ(c.model_name, "m");
  EXPECT_EQ(c.max_retries, 5);
  EXPECT_EQ(c.timeout.count(), 1500);
  EXPECT_EQ(c.max_parallel, 3);
  EXPECT_EQ(c.temperature, 0.5);
  EXPECT_EQ(c.initial_backoff.count(), 10);
  EXPECT_EQ(c.api_key_env, "MY_KEY");
  EXPECT_THROW(apply_endpoint_settings({{"max_parallel", "many"}}, c), ValidationError);
  EXPECT_THROW(apply_endpoint_settings({{"max_parallel", "3x"}}, c), ValidationError);
}

TEST(LlmClient, SettingsFilesAndEnv) {
  testing::TempDir dir("settings");
  {
    std::ofstream(dir.file("c.toml")) << "[endpoint]\nmodel = \"a\"\nmax_parallel = 2\n";
    std::ofstream(dir.file("c.json")) << R"({"endpoint": {"model": "b", "max_parallel": 6}})";
    std::ofstream(dir.file("bad.json")) << "[1, 2]";
    std::ofstream(dir.file("zero.toml")) << "max_parallel = 0\n";
  }
  EXPECT_EQ(load_endpoint_config(dir.file("c.toml")).model_name, "a");
  const auto j = load_endpoint_config(dir.file("c.json"));
  EXPECT_EQ(j.model_name, "b");
  EXPECT_EQ(j.max_parallel, 6);
  EXPECT_THROW(read_settings_file(dir.file("bad.json")), ValidationError);
  EXPECT_THROW(read_settings_file(dir.file("missing.toml")), ValidationError);
  EXPECT_THROW(load_endpoint_config(dir.file("zero.toml")), ValidationError);

  ::setenv("MASKEVAL_MODEL", "env-model", 1);
  ::setenv("MASKEVAL_MAX_PARALLEL", "9", 1);
  const auto env = endpoint_settings_from_env();
  ::unsetenv("MASKEVAL_MODEL");
  ::unsetenv("MASKEVAL_MAX_PARALLEL");
  EXPECT_EQ(env.at("model"), "env-model");
  EXPECT_EQ(env.at("max_parallel"), "9");
  EXPECT_EQ(env.count("base_url"), 0u);
}

TEST(LlmClient, RequestBody) {
  EndpointConfig c;
  c.model_name = "m1";
  const auto body = HttpCompleter::request_body(c, "hi");
  EXPECT_EQ(body["model"], "m1");
  EXPECT_EQ(body["temperature"], 0.0);
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(body["messages"][0]["content"], "hi");
}

TEST(LlmClient, AuditLogAppends) {
  testing::TempDir dir("audit");
  AuditLog log(dir.file("a.jsonl"));
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 50; ++i) log.append(json{{"t", t}, {"i", i}});
    });
  }
  for (auto& th : threads) th.join();
  const auto text = testing::read_file(dir.file("a.jsonl"));
  int lines = 0;
  for (auto line : split_lines(text)) {
    if (line.empty()) continue;
    EXPECT_NO_THROW(json::parse(line));
    ++lines;
  }
  EXPECT_EQ(lines, 400);
}

// Local chat-completions stand-in. `script` maps the n-th request (0-based)
// to an HTTP status; anything past the end answers 200.
class FakeServer {
 public:
  FakeServer() {
    server_.new_task_queue = [] { return new httplib::ThreadPool(32); };
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
      const int n = requests_++;
      const int now = ++active_;
      int seen = peak_.load();
      while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
      }
      if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
      {
        std::lock_guard lock(mu_);
        last_auth_ = req.get_header_value("Authorization");
        last_body_ = req.body;
      }
      const int status = n < static_cast<int>(script_.size()) ? script_[n] : 200;
      res.status = status;
      if (status == 200) {
        const auto body = json::parse(req.body);
        res.set_content(
            malformed_ ? R"({"choices": []})"
                       : json{{"choices", json::array({json{{"message",
                                                              json{{"role", "assistant"},
                                                                   {"content", "echo:" + body["messages"][0]["content"].get<std::string>()}}}}})}}
                             .dump(),
            "application/json");
      } else {
        res.set_content("{\"error\": \"nope\"}", "application/json");
      }
      --active_;
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  EndpointConfig config() const {
    EndpointConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1/";
    c.api_key = "sk-test";
    c.initial_backoff = std::chrono::milliseconds(1);
    c.timeout = std::chrono::milliseconds(5000);
    return c;
  }
  std::vector<int> script_;
  int delay_ms_ = 0;
  bool malformed_ = false;
  std::atomic<int> requests_{0};
  std::atomic<int> active_{0};
  std::atomic<int> peak_{0};
  std::mutex mu_;
  std::string last_auth_;
  std::string last_body_;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(HttpCompleter, Success) {
  FakeServer srv;
  testing::TempDir dir("http");
  auto audit = std::make_shared<AuditLog>(dir.file("audit.jsonl"));
  HttpCompleter c(srv.config(), audit);
  CompletionContext ctx;
  ctx.item_id = "q7";
  ctx.trial = 2;
  EXPECT_EQ(c.complete("hello", ctx), "echo:hello");
  EXPECT_EQ(srv.last_auth_, "Bearer sk-test");
  EXPECT_EQ(json::parse(srv.last_body_)["temperature"], 0.0);
  const auto rec = json::parse(split_lines(testing::read_file(dir.file("audit.jsonl")))[0]);
  EXPECT_EQ(rec["item_id"], "q7");
  EXPECT_EQ(rec["trial"], 2);
  EXPECT_EQ(rec["status"], 200);
  EXPECT_EQ(rec["attempt"], 0);
}

TEST(HttpCompleter, ApiKeyFromEnvironment) {
  FakeServer srv;
  auto cfg = srv.config();
  cfg.api_key.clear();
  cfg.api_key_env = "MASKEVAL_TEST_KEY";
  ::setenv("MASKEVAL_TEST_KEY", "sk-env", 1);
  HttpCompleter c(cfg);
  ::unsetenv("MASKEVAL_TEST_KEY");
  c.complete("x", {});
  EXPECT_EQ(srv.last_auth_, "Bearer sk-env");
}

TEST(HttpCompleter, RetriesTransientFailures) {
  FakeServer srv;
  srv.script_ = {500, 429, 503};
  auto cfg = srv.config();
  cfg.max_retries = 3;
  HttpCompleter c(cfg);
  EXPECT_EQ(c.complete("p", {}), "echo:p");
  EXPECT_EQ(srv.requests_.load(), 4);
}

TEST(HttpCompleter, GivesUpAfterMaxRetries) {
  FakeServer srv;
  srv.script_ = {500, 500, 500, 500, 500};
  auto cfg = srv.config();
  cfg.max_retries = 2;
  HttpCompleter c(cfg);
  EXPECT_THROW(c.complete("p", {}), TransportError);
  EXPECT_EQ(srv.requests_.load(), 3);
}

TEST(HttpCompleter, AuthFailureIsNotRetried) {
  FakeServer srv;
  srv.script_ = {401};
  HttpCompleter c(srv.config());
  EXPECT_THROW(c.complete("p", {}), AuthError);
  EXPECT_EQ(srv.requests_.load(), 1);
  FakeServer srv2;
  srv2.script_ = {403};
  HttpCompleter c2(srv2.config());
  EXPECT_THROW(c2.complete("p", {}), AuthError);
}

TEST(HttpCompleter, ClientErrorsAndBadBodies) {
  FakeServer srv;
  srv.script_ = {400};
  HttpCompleter c(srv.config());
  EXPECT_THROW(c.complete("p", {}), TransportError);
  EXPECT_EQ(srv.requests_.load(), 1);
  FakeServer bad;
  bad.malformed_ = true;
  HttpCompleter c2(bad.config());
  EXPECT_THROW(c2.complete("p", {}), TransportError);
}

TEST(HttpCompleter, UnreachableHost) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }  // closed again, nothing listens there now
  EndpointConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  cfg.max_retries = 1;
  cfg.initial_backoff = std::chrono::milliseconds(1);
  cfg.timeout = std::chrono::milliseconds(500);
  HttpCompleter c(cfg);
  EXPECT_THROW(c.complete("p", {}), TransportError);
}

TEST(HttpCompleter, BoundsConcurrentRequests) {
  for (int bound : {2, 8}) {
    FakeServer srv;
    srv.delay_ms_ = 60;
    auto cfg = srv.config();
    cfg.max_parallel = bound;
    HttpCompleter c(cfg);
    std::vector<std::thread> threads;
    for (int i = 0; i < 16; ++i) {
      threads.emplace_back([&] { EXPECT_EQ(c.complete("p", {}), "echo:p"); });
    }
    for (auto& t : threads) t.join();
    EXPECT_LE(srv.peak_.load(), bound);
    EXPECT_GE(srv.peak_.load(), 2) << "requests never overlapped";
  }
}

}  // namespace
}  // namespace maskeval
