// Copyright 2026 The groundsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "groundsim/error.hpp"
#include "groundsim/gateway.hpp"
#include "groundsim/http_provider.hpp"
#include "groundsim/parallel.hpp"
#include "groundsim/structured.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <thread>

using namespace groundsim;

namespace {

ChatRequest hi_request() {
  ChatRequest r;
  r.messages = {{Role::system, "You are terse."}, {Role::user, "hi"}};
  r.model_name = "m";
  r.temperature = 0.0;
  return r;
}

ProviderConfig quick_config(int attempts = 3) {
  ProviderConfig c;
  c.retry.max_attempts = attempts;
  c.retry.base_backoff_ms = 1;
  return c;
}

class FlakyProvider : public Provider {
 public:
  explicit FlakyProvider(int failures, int status = 429) : failures_(failures), status_(status) {}
  ChatResponse send(const ChatRequest&, const ProviderConfig&) override {
    if (calls_++ < failures_) throw TransientError("rate limited", status_);
    return {"ok", FinishReason::complete, {}};
  }
  int calls() const { return calls_; }

 private:
  int failures_;
  int status_;
  int calls_ = 0;
};

}  // namespace

TEST(ChatRequest, ValidatesInvariants) {
  ChatRequest r;
  EXPECT_THROW(r.validate(), InvalidRequest);
  r.messages = {{Role::assistant, "x"}};
  EXPECT_THROW(r.validate(), InvalidRequest);
  r.messages = {{Role::user, "x"}};
  r.temperature = 2.5;
  EXPECT_THROW(r.validate(), InvalidRequest);
  r.temperature = 0.7;
  r.max_output = 0;
  EXPECT_THROW(r.validate(), InvalidRequest);
  r.max_output = 16;
  EXPECT_NO_THROW(r.validate());
}

TEST(Fingerprint, StableAndSensitive) {
  const auto a = hi_request();
  EXPECT_EQ(fingerprint(a), fingerprint(hi_request()));
  EXPECT_EQ(fingerprint(a).size(), 64u);

  auto swapped = a;
  std::swap(swapped.messages[0], swapped.messages[1]);
  EXPECT_NE(fingerprint(a), fingerprint(swapped));

  auto warm = a;
  warm.temperature = 0.7;
  EXPECT_NE(fingerprint(a), fingerprint(warm));

  auto other_model = a;
  other_model.model_name = "n";
  EXPECT_NE(fingerprint(a), fingerprint(other_model));

  auto role = a;
  role.messages[0].role = Role::user;
  EXPECT_NE(fingerprint(a), fingerprint(role));

  auto relabelled = a;
  relabelled.purpose = "judge";
  EXPECT_EQ(fingerprint(a), fingerprint(relabelled));
}

TEST(MockProvider, FixtureHitAndDeterminism) {
  TranscriptFixture fx;
  fx.add(hi_request(), "hello");
  Gateway gw(std::make_shared<MockProvider>(fx), quick_config());
  const auto r1 = gw.complete(hi_request());
  const auto r2 = gw.complete(hi_request());
  EXPECT_EQ(r1.content, "hello");
  EXPECT_EQ(r1.content, r2.content);
}

TEST(MockProvider, FallbackPolicies) {
  auto miss = hi_request();
  miss.messages[1].content = "unscripted";
  Gateway strict(std::make_shared<MockProvider>(TranscriptFixture(FallbackPolicy::error)), quick_config());
  EXPECT_THROW(strict.complete(miss), FixtureMiss);

  Gateway echo(std::make_shared<MockProvider>(TranscriptFixture(FallbackPolicy::echo)), quick_config());
  EXPECT_EQ(echo.complete(miss).content, "unscripted");

  Gateway canned(std::make_shared<MockProvider>(TranscriptFixture(FallbackPolicy::canned, "CANNED")), quick_config());
  EXPECT_EQ(canned.complete(miss).content, "CANNED");
}

TEST(TranscriptFixture, SaveLoadRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "groundsim_fixture_test.jsonl";
  TranscriptFixture fx;
  fx.add(hi_request(), "hello");
  fx.save(path);
  const auto loaded = TranscriptFixture::load(path);
  EXPECT_EQ(loaded.size(), 1u);
  EXPECT_EQ(loaded.lookup(hi_request()).value(), "hello");
  std::filesystem::remove(path);
}

TEST(Gateway, RetriesTransientThenSucceeds) {
  auto flaky = std::make_shared<FlakyProvider>(2);
  std::vector<std::chrono::milliseconds> sleeps;
  Gateway gw(flaky, quick_config(3), [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  EXPECT_EQ(gw.complete(hi_request()).content, "ok");
  EXPECT_EQ(flaky->calls(), 3);
  ASSERT_EQ(sleeps.size(), 2u);
  EXPECT_LE(sleeps[0], sleeps[1]);
}

TEST(Gateway, ExhaustedRetriesThrow) {
  auto flaky = std::make_shared<FlakyProvider>(10, 503);
  Gateway gw(flaky, quick_config(3), [](std::chrono::milliseconds) {});
  EXPECT_THROW(gw.complete(hi_request()), TimeoutExhausted);
  EXPECT_EQ(flaky->calls(), 3);
  EXPECT_EQ(gw.total_attempts(), 3u);
}

TEST(Gateway, BackoffNonDecreasing) {
  Gateway gw(std::make_shared<FlakyProvider>(0), quick_config(6));
  for (int i = 1; i < 6; ++i) EXPECT_LE(gw.backoff_delay(i), gw.backoff_delay(i + 1));
}

TEST(ProviderConfig, InvalidBoundsRejected) {
  ProviderConfig c;
  c.retry.max_attempts = 0;
  EXPECT_THROW(c.validate(), InvalidRequest);
  c.retry.max_attempts = 1;
  c.max_concurrent = 0;
  EXPECT_THROW(c.validate(), InvalidRequest);
}

TEST(Gateway, BoundedConcurrency) {
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
  auto provider = std::make_shared<ScriptedProvider>([&](const ChatRequest&) {
    const int now = ++in_flight;
    int prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    --in_flight;
    return std::string("x");
  });
  auto cfg = quick_config();
  cfg.max_concurrent = 3;
  Gateway gw(provider, cfg);
  parallel_for(24, 8, [&](std::size_t) { gw.complete(hi_request()); });
  EXPECT_LE(peak.load(), 3);
  EXPECT_GE(peak.load(), 1);
  EXPECT_EQ(provider->call_count(), 24u);
}

TEST(Structured, RepairRoundThenError) {
  int calls = 0;
  auto provider = std::make_shared<ScriptedProvider>([&](const ChatRequest&) {
    return ++calls == 1 ? std::string("not json") : std::string("{\"v\": 3}");
  });
  Gateway gw(provider, quick_config());
  const int v = complete_structured<TagParseError>(
      gw, hi_request(), [](const std::string& s) { return extract_json_object(s).at("v").get<int>(); }, "Reply in JSON.");
  EXPECT_EQ(v, 3);
  EXPECT_EQ(provider->requests().back().messages.size(), 4u);

  auto never = std::make_shared<ScriptedProvider>([](const ChatRequest&) { return std::string("nope"); });
  Gateway gw2(never, quick_config());
  EXPECT_THROW(complete_structured<TagParseError>(
                   gw2, hi_request(), [](const std::string& s) { return extract_json_object(s).dump(); }, "JSON."),
               TagParseError);
  EXPECT_EQ(never->call_count(), 2u);
}

TEST(Structured, ExtractsFromFencedReply) {
  const auto j = extract_json_object("Sure:\n```json\n{\"a\": {\"b\": \"}\"}}\n```\nDone.");
  EXPECT_EQ(j["a"]["b"], "}");
  EXPECT_THROW(extract_json_object("no object here"), ParseError);
}

TEST(HttpProvider, RequestBodyAndParse) {
  auto r = hi_request();
  r.seed = 11;
  const auto body = nlohmann::json::parse(HttpProvider::request_body(r));
  EXPECT_EQ(body["model"], "m");
  EXPECT_EQ(body["messages"][1]["content"], "hi");
  EXPECT_EQ(body["seed"], 11);
  const auto resp = HttpProvider::parse_body(
      R"({"choices":[{"message":{"content":"yo"},"finish_reason":"length"}],"usage":{"prompt_tokens":3,"completion_tokens":1}})");
  EXPECT_EQ(resp.content, "yo");
  EXPECT_EQ(resp.finish_reason, FinishReason::length);
  EXPECT_EQ(resp.usage.prompt_tokens, 3);
}

TEST(HttpProvider, LocalServerRetriesAfter429) {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string auth_seen;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    auth_seen = req.get_header_value("Authorization");
    if (++hits <= 2) {
      res.status = 429;
      res.set_content("{\"error\":\"slow down\"}", "application/json");
      return;
    }
    res.set_content(R"({"choices":[{"message":{"content":"hello"},"finish_reason":"stop"}],"usage":{}})",
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  auto cfg = quick_config(3);
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.auth_env = "GROUNDSIM_TEST_UNSET_KEY";
  cfg.api_key = "sk-test";
  Gateway gw(std::make_shared<HttpProvider>(), cfg, [](std::chrono::milliseconds) {});
  const auto resp = gw.complete(hi_request());
  server.stop();
  t.join();
  EXPECT_EQ(resp.content, "hello");
  EXPECT_EQ(hits.load(), 3);
  EXPECT_EQ(auth_seen, "Bearer sk-test");
}

TEST(HttpProvider, UnauthorizedIsNotRetried) {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/c", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 401;
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  auto cfg = quick_config(3);
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/c";
  cfg.auth_env = "GROUNDSIM_TEST_UNSET_KEY";
  cfg.api_key = "bad";
  Gateway gw(std::make_shared<HttpProvider>(), cfg, [](std::chrono::milliseconds) {});
  EXPECT_THROW(gw.complete(hi_request()), AuthError);
  server.stop();
  t.join();
  EXPECT_EQ(hits.load(), 1);
}
