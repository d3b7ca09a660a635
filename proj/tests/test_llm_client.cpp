#include <gtest/gtest.h>

#include "properties.hpp"
#include "robustapi/llm_client.hpp"
#include "support.hpp"

using namespace robustapi;
using robustapi::testing::read_text;
using robustapi::testing::ScopedEnv;
using robustapi::testing::StubServer;
using robustapi::testing::TempDir;

namespace {

constexpr const char* kKeyVar = "ROBUSTAPI_TEST_KEY";
constexpr const char* kKey = "sk-test-0123456789abcdef";

EndpointConfig config_for(const StubServer& server) {
  EndpointConfig cfg;
  cfg.base_url = server.base_url();
  cfg.model = "stub-model";
  cfg.api_key_env = kKeyVar;
  cfg.retry.attempts = 3;
  cfg.retry.backoff = std::chrono::milliseconds(1);
  cfg.timeout = std::chrono::seconds(5);
  return cfg;
}

std::vector<PromptRecord> three_prompts() {
  return {{"a", "first"}, {"b", "second"}, {"c", "third"}};
}

std::vector<std::string> ids_in(const std::string& jsonl) {
  std::vector<std::string> out;
  for (const auto& r : parse_responses(jsonl)) out.push_back(r.id);
  return out;
}

}  // namespace

TEST(Complete, EchoStub) {
  ScopedEnv key(kKeyVar, kKey);
  StubServer server([](const StubServer::Request&, std::size_t, int& status, std::string& body) {
    status = 200;
    body = StubServer::completion_body("OK");
  });
  EXPECT_EQ(complete("hello", config_for(server)), "OK");
  auto received = server.received();
  ASSERT_EQ(received.size(), 1u);
  EXPECT_EQ(received[0].authorization, std::string("Bearer ") + kKey);
  auto body = nlohmann::json::parse(received[0].body);
  EXPECT_EQ(body["model"], "stub-model");
  EXPECT_EQ(body["temperature"], 0.0);
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(body["messages"][0]["content"], "hello");
}

TEST(Complete, MissingKeyFailsBeforeNetwork) {
  ScopedEnv key(kKeyVar, nullptr);
  StubServer server;
  EXPECT_THROW(complete("hello", config_for(server)), AuthError);
  EXPECT_EQ(server.requests(), 0u);
}

TEST(Complete, RetriesRateLimit) {
  ScopedEnv key(kKeyVar, kKey);
  StubServer server([](const StubServer::Request&, std::size_t n, int& status, std::string& body) {
    status = n <= 2 ? 429 : 200;
    body = n <= 2 ? "{\"error\":\"slow down\"}" : StubServer::completion_body("done");
  });
  EXPECT_EQ(complete("x", config_for(server)), "done");
  EXPECT_EQ(server.requests(), 3u);
}

TEST(Complete, RateLimitSurfacesAfterLastAttempt) {
  ScopedEnv key(kKeyVar, kKey);
  StubServer server([](const StubServer::Request&, std::size_t, int& status, std::string& body) {
    status = 429;
    body = "{}";
  });
  EXPECT_THROW(complete("x", config_for(server)), RateLimited);
  EXPECT_EQ(server.requests(), 3u);
}

TEST(Complete, AuthFailuresAreNotRetried) {
  ScopedEnv key(kKeyVar, kKey);
  StubServer server([](const StubServer::Request&, std::size_t, int& status, std::string& body) {
    status = 401;
    body = "{}";
  });
  EXPECT_THROW(complete("x", config_for(server)), AuthError);
  EXPECT_EQ(server.requests(), 1u);
}

TEST(Complete, MalformedAndTransportErrors) {
  ScopedEnv key(kKeyVar, kKey);
  StubServer server([](const StubServer::Request&, std::size_t n, int& status, std::string& body) {
    status = n == 1 ? 200 : 400;
    body = n == 1 ? "{\"choices\":[]}" : "{}";
  });
  EndpointConfig cfg = config_for(server);
  EXPECT_THROW(complete("x", cfg), MalformedResponse);
  EXPECT_THROW(complete("x", cfg), TransportError);

  cfg.base_url = "http://127.0.0.1:1/v1";
  cfg.retry.attempts = 2;
  EXPECT_THROW(complete("x", cfg), TransportError);
}

TEST(Complete, InvalidConfig) {
  EndpointConfig cfg;
  cfg.base_url = "ftp://host";
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.max_parallel = 0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.temperature = -1;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
}

TEST(RunBatch, ThreePromptsInOrder) {
  ScopedEnv key(kKeyVar, kKey);
  StubServer server;
  TempDir dir;
  EndpointConfig cfg = config_for(server);
  cfg.max_parallel = 3;
  BatchResult r = run_batch(three_prompts(), cfg, dir.file("out.jsonl"));
  EXPECT_TRUE(r.failed.empty());
  EXPECT_EQ(r.completed, (std::vector<std::string>{"a", "b", "c"}));
  auto responses = parse_responses(read_text(dir.file("out.jsonl")));
  ASSERT_EQ(responses.size(), 3u);
  EXPECT_EQ(responses[1].id, "b");
  EXPECT_EQ(responses[1].response, "echo: second");
  EXPECT_EQ(responses[1].meta->at("model"), "stub-model");
}

TEST(RunBatch, ResumeIssuesOnlyMissingRequests) {
  ScopedEnv key(kKeyVar, kKey);
  StubServer server;
  TempDir dir;
  EndpointConfig cfg = config_for(server);
  BatchOptions stop;
  stop.stop_after = 2;
  BatchResult first = run_batch(three_prompts(), cfg, dir.file("out.jsonl"), stop);
  EXPECT_TRUE(first.interrupted);
  EXPECT_EQ(server.requests(), 2u);
  EXPECT_FALSE(std::filesystem::exists(dir.file("out.jsonl")));
  EXPECT_TRUE(std::filesystem::exists(checkpoint_path(dir.file("out.jsonl"))));

  BatchResult second = run_batch(three_prompts(), cfg, dir.file("out.jsonl"));
  EXPECT_EQ(second.requests_issued, 1u);
  EXPECT_EQ(server.requests(), 3u);
  EXPECT_EQ(ids_in(read_text(dir.file("out.jsonl"))), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(RunBatch, AllFail) {
  ScopedEnv key(kKeyVar, kKey);
  StubServer server([](const StubServer::Request&, std::size_t, int& status, std::string& body) {
    status = 500;
    body = "{}";
  });
  TempDir dir;
  BatchResult r = run_batch(three_prompts(), config_for(server), dir.file("out.jsonl"));
  EXPECT_TRUE(r.completed.empty());
  ASSERT_EQ(r.failed.size(), 3u);
  EXPECT_EQ(r.failed[0].id, "a");
  EXPECT_EQ(r.failed[2].id, "c");
  EXPECT_EQ(read_text(dir.file("out.jsonl")), "");
  auto report = nlohmann::json::parse(failure_report(r));
  EXPECT_EQ(report["failed"].size(), 3u);
}

TEST(RunBatch, CancelFlagStops) {
  ScopedEnv key(kKeyVar, kKey);
  StubServer server;
  TempDir dir;
  std::atomic<bool> cancel{true};
  BatchOptions options;
  options.cancel = &cancel;
  BatchResult r = run_batch(three_prompts(), config_for(server), dir.file("out.jsonl"), options);
  EXPECT_TRUE(r.interrupted);
  EXPECT_EQ(server.requests(), 0u);
}

TEST(RunBatch, KeyNeverWrittenOrReported) {
  ScopedEnv key(kKeyVar, kKey);
  StubServer server([](const StubServer::Request& req, std::size_t n, int& status,
                       std::string& body) {
    // Echoes the authorization header back, as a hostile endpoint might.
    status = n == 2 ? 401 : 200;
    body = n == 2 ? "{\"error\":\"" + req.authorization + "\"}"
                  : StubServer::completion_body("fine");
  });
  TempDir dir;
  EndpointConfig cfg = config_for(server);
  cfg.max_parallel = 1;
  BatchResult r = run_batch(three_prompts(), cfg, dir.file("out.jsonl"));
  ASSERT_EQ(r.failed.size(), 1u);
  std::string report = failure_report(r);
  EXPECT_EQ(report.find(kKey), std::string::npos);
  for (const auto& entry : std::filesystem::directory_iterator(dir.path())) {
    EXPECT_EQ(read_text(entry.path()).find(kKey), std::string::npos) << entry.path();
  }
  try {
    ScopedEnv other("ROBUSTAPI_TEST_KEY", kKey);
    StubServer deny([](const StubServer::Request& req, std::size_t, int& status,
                       std::string& body) {
      status = 403;
      body = req.authorization;
    });
    complete("x", config_for(deny));
    FAIL();
  } catch (const AuthError& e) {
    EXPECT_EQ(std::string(e.what()).find(kKey), std::string::npos);
  }
}

TEST(RunBatch, CorruptCheckpoint) {
  ScopedEnv key(kKeyVar, kKey);
  StubServer server;
  TempDir dir;
  robustapi::testing::write_text(checkpoint_path(dir.file("out.jsonl")), "{not json");
  EXPECT_THROW(run_batch(three_prompts(), config_for(server), dir.file("out.jsonl")), SchemaError);
}

TEST(Properties, ResumeIdempotence) {
  auto r = robustapi::testing::check_resume_idempotence(15, 31);
  EXPECT_TRUE(r.ok) << r.counterexample;
}

TEST(RunBatch, InFlightBoundedByMaxParallel) {
  ScopedEnv key(kKeyVar, kKey);
  std::atomic<int> in_flight{0}, peak{0};
  BatchOptions options;
  options.completer = [&](const std::string& prompt) {
    int now = ++in_flight;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    --in_flight;
    return "ok " + prompt;
  };
  std::vector<PromptRecord> prompts;
  for (int i = 0; i < 12; ++i) prompts.push_back({std::to_string(i), "p" + std::to_string(i)});
  TempDir dir;
  EndpointConfig cfg;
  cfg.api_key_env = kKeyVar;
  cfg.max_parallel = 3;
  BatchResult r = run_batch(prompts, cfg, dir.file("out.jsonl"), options);
  EXPECT_EQ(r.completed.size(), 12u);
  EXPECT_LE(peak.load(), 3);
  EXPECT_GE(peak.load(), 1);
}
