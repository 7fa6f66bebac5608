#include <doctest.h>

#include <atomic>
#include <fstream>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cotc/errors.hpp"
#include "cotc/gateway.hpp"
#include "cotc/mocks.hpp"
#include "cotc/parallel.hpp"
#include "test_support.hpp"

using namespace cotc;

namespace {

CompletionRequest make_request(const std::string& endpoint, const std::string& prompt,
                               int seed = 0) {
  CompletionRequest req;
  req.endpoint_id = endpoint;
  req.prompt = prompt;
  req.seed = seed;
  return req;
}

}  // namespace

TEST_CASE("echo mock returns the prompt") {
  Gateway gw;
  gw.register_endpoint(make_echo_endpoint("echo"));
  CHECK(gw.complete(make_request("echo", "ping")) == "ping");
}

TEST_CASE("unknown endpoints are rejected") {
  Gateway gw;
  CHECK_THROWS_AS(gw.complete(make_request("nope", "x")), UnknownEndpoint);
}

TEST_CASE("scripted endpoint matches rules in order and misses strictly") {
  Gateway gw;
  std::vector<ScriptRule> rules;
  rules.push_back({.prompt_contains = "alpha", .seed = 1, .text = "seeded"});
  rules.push_back({.prompt_contains = "alpha", .text = "any seed"});
  gw.register_endpoint(make_scripted_endpoint("gen", rules));

  CHECK(gw.complete(make_request("gen", "say alpha", 1)) == "seeded");
  CHECK(gw.complete(make_request("gen", "say alpha", 0)) == "any seed");
  CHECK_THROWS_AS(gw.complete(make_request("gen", "beta", 0)), MockMiss);
}

TEST_CASE("replay key is stable and field-sensitive") {
  auto a = make_request("e", "p", 0);
  CHECK(replay_key(a) == replay_key(a));
  auto b = a;
  b.seed = 1;
  CHECK(replay_key(a) != replay_key(b));
  auto c = a;
  c.temperature = 0.7;
  CHECK(replay_key(a) != replay_key(c));
  auto d = a;
  d.image_ref = "img://1";
  CHECK(replay_key(a) != replay_key(d));
}

TEST_CASE("replay cache serves repeats without live calls") {
  test::TempDir cache("replay");
  Gateway gw;
  gw.register_endpoint(make_echo_endpoint("echo"));
  gw.set_replay_cache(cache.path());

  auto req = make_request("echo", "cached once");
  CHECK(gw.complete(req) == "cached once");
  CHECK(gw.stats().live_calls == 1);

  CHECK(gw.complete(req) == "cached once");
  auto stats = gw.stats();
  CHECK(stats.live_calls == 1);
  CHECK(stats.cache_hits == 1);

  // A second gateway over the same directory replays with zero traffic.
  Gateway gw2;
  gw2.register_endpoint(make_down_endpoint("echo"));
  gw2.set_replay_cache(cache.path());
  CHECK(gw2.complete(req) == "cached once");
  CHECK(gw2.stats().live_calls == 0);
}

TEST_CASE("a hard-down endpoint exhausts retries") {
  Gateway gw;
  auto down = make_down_endpoint("down");
  gw.register_endpoint(std::move(down));
  CHECK_THROWS_AS(gw.complete(make_request("down", "x")), EndpointError);
  // max_attempts is 1 for mock specs; dispatched == attempts
  CHECK(gw.stats().per_endpoint.at("down").dispatched == 1);
}

TEST_CASE("a timing-out endpoint raises EndpointTimeout after three attempts") {
  Gateway gw;
  gw.register_endpoint(make_down_endpoint("flaky", /*status=*/0, /*max_attempts=*/3));
  CHECK_THROWS_AS(gw.complete(make_request("flaky", "x")), EndpointTimeout);
  CHECK(gw.stats().per_endpoint.at("flaky").dispatched == 3);
}

TEST_CASE("client errors are not retried") {
  Gateway gw;
  gw.register_endpoint(make_down_endpoint("bad", /*status=*/404, /*max_attempts=*/3));
  CHECK_THROWS_AS(gw.complete(make_request("bad", "x")), EndpointError);
  CHECK(gw.stats().per_endpoint.at("bad").dispatched == 1);
}

TEST_CASE("parallel_for_index visits every index once and propagates errors") {
  std::vector<std::atomic<int>> visits(100);
  parallel_for_index(100, 4, [&](std::size_t i) { ++visits[i]; });
  for (const auto& v : visits) CHECK(v.load() == 1);

  CHECK_THROWS_AS(parallel_for_index(
                      8, 4, [](std::size_t i) { if (i == 5) throw IoError("boom"); }),
                  IoError);
}

TEST_CASE("request budget caps live traffic") {
  Gateway gw;
  gw.register_endpoint(make_echo_endpoint("echo"));
  gw.set_request_budget(2);
  CHECK(gw.complete(make_request("echo", "a")) == "a");
  CHECK(gw.complete(make_request("echo", "b")) == "b");
  CHECK_THROWS_AS(gw.complete(make_request("echo", "c")), BudgetExceeded);
}

TEST_CASE("in-flight requests never exceed max_in_flight") {
  // Endpoint that records its own concurrency.
  struct SlowEndpoint final : Endpoint {
    EndpointSpec spec_;
    std::atomic<int> in_flight{0};
    std::atomic<int> peak{0};
    SlowEndpoint() {
      spec_.endpoint_id = "slow";
      spec_.base_url = "mock://slow";
      spec_.max_in_flight = 2;
      spec_.retry.max_attempts = 1;
    }
    std::string complete(const CompletionRequest& req) override {
      int now = ++in_flight;
      int seen = peak.load();
      while (now > seen && !peak.compare_exchange_weak(seen, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      --in_flight;
      return req.prompt;
    }
    const EndpointSpec& spec() const override { return spec_; }
  };

  auto owned = std::make_unique<SlowEndpoint>();
  auto* slow = owned.get();
  Gateway gw;
  gw.register_endpoint(std::move(owned));

  std::vector<std::thread> workers;
  for (int i = 0; i < 8; ++i) {
    workers.emplace_back([&gw, i] {
      (void)gw.complete(make_request("slow", "job " + std::to_string(i)));
    });
  }
  for (auto& w : workers) w.join();

  CHECK(slow->peak.load() <= 2);
  CHECK(gw.stats().per_endpoint.at("slow").dispatched == 8);
  CHECK(gw.stats().per_endpoint.at("slow").max_in_flight_seen <= 2);
}

TEST_CASE("rule verifier estimates accuracy from key segments") {
  Gateway gw;
  VerifierRule rule;
  rule.question_contains = "Solve 2x + 4 = 10";
  rule.answer = "A";
  rule.keys = {{.contains = "2x = 6", .seeds = {0, 1, 2}}};
  gw.register_endpoint(make_rule_verifier_endpoint("verifier", {rule}));

  Verifier verifier(gw, "verifier", test::templates());
  auto sample = test::make_sample();

  CHECK(verifier.estimate_accuracy(sample, "") == 0.0);
  CHECK(verifier.estimate_accuracy(sample, "subtract: 2x = 6") == 1.0);

  SUBCASE("accuracy flips exactly when the key segment enters the prefix") {
    CHECK(verifier.estimate_accuracy(sample, "some unrelated step") == 0.0);
    CHECK(verifier.estimate_accuracy(sample, "some unrelated step\n\n2x = 6") == 1.0);
  }
}

TEST_CASE("seed-conditioned verifier rules produce fractional accuracies") {
  Gateway gw;
  VerifierRule rule;
  rule.question_contains = "Solve";
  rule.answer = "A";
  rule.keys = {{.contains = "partial", .seeds = {0, 1}}};
  gw.register_endpoint(make_rule_verifier_endpoint("verifier", {rule}));

  Verifier verifier(gw, "verifier", test::templates());
  double acc = verifier.estimate_accuracy(test::make_sample(), "a partial clue");
  CHECK(acc == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("verifier accuracies are always multiples of one third") {
  Gateway gw;
  VerifierRule rule;
  rule.question_contains = "Solve";
  rule.answer = "A";
  rule.keys = {{.contains = "k0", .seeds = {0}},
               {.contains = "k1", .seeds = {0, 1}},
               {.contains = "k2", .seeds = {0, 1, 2}}};
  gw.register_endpoint(make_rule_verifier_endpoint("verifier", {rule}));
  Verifier verifier(gw, "verifier", test::templates());

  auto sample = test::make_sample();
  for (const std::string prefix : {"", "k0", "k1", "k2", "k0 k1", "noise"}) {
    double acc = verifier.estimate_accuracy(sample, prefix);
    double scaled = acc * 3.0;
    CHECK(std::abs(scaled - std::round(scaled)) < 1e-12);
  }
}

TEST_CASE("an unreachable verifier endpoint surfaces as VerifierUnavailable") {
  Gateway gw;
  gw.register_endpoint(make_down_endpoint("verifier", /*status=*/0, /*max_attempts=*/2));
  Verifier verifier(gw, "verifier", test::templates());
  CHECK_THROWS_AS(verifier.estimate_accuracy(test::make_sample(), "some prefix"),
                  VerifierUnavailable);
}

TEST_CASE("judge mock emits the strict score format") {
  Gateway gw;
  gw.register_endpoint(make_judge_endpoint("judge", {{.contains = "good", .score = 4}}, 2));
  std::string text = gw.complete(make_request("judge", "a good explanation"));
  CHECK(text.find("Score: \\boxed{4}") != std::string::npos);
  CHECK(text.rfind("Score: \\boxed{4}") == text.size() - std::string("Score: \\boxed{4}").size());
  CHECK(gw.complete(make_request("judge", "something else")).find("\\boxed{2}") !=
        std::string::npos);
}

TEST_CASE("mock fixtures install from a file and reject garbage") {
  test::TempDir dir("fixtures");
  {
    nlohmann::json doc;
    doc["endpoints"] = nlohmann::json::array(
        {{{"id", "echo1"}, {"kind", "echo"}},
         {{"id", "judge1"}, {"kind", "judge"}, {"default_score", 3}},
         {{"id", "gen1"},
          {"kind", "scripted"},
          {"script", nlohmann::json::array({{{"prompt_contains", "q"}, {"text", "cot text"}}})}}});
    std::ofstream out(dir / "mocks.json");
    out << doc.dump(2);
  }
  Gateway gw;
  install_mock_endpoints(gw, dir / "mocks.json");
  CHECK(gw.has_endpoint("echo1"));
  CHECK(gw.has_endpoint("judge1"));
  CHECK(gw.complete(make_request("gen1", "the q")) == "cot text");

  {
    std::ofstream out(dir / "bad.json");
    out << "{ not json";
  }
  Gateway gw2;
  CHECK_THROWS_AS(install_mock_endpoints(gw2, dir / "bad.json"), FixtureParseError);

  {
    nlohmann::json doc;
    doc["endpoints"] = nlohmann::json::array({{{"id", "x"}, {"kind", "wat"}}});
    std::ofstream out(dir / "unknown.json");
    out << doc.dump();
  }
  Gateway gw3;
  CHECK_THROWS_AS(install_mock_endpoints(gw3, dir / "unknown.json"), FixtureParseError);
}

TEST_CASE("http endpoint speaks the chat completion protocol") {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    auto body = nlohmann::json::parse(req.body);
    std::string prompt = body["messages"][0]["content"].get<std::string>();
    if (req.get_header_value("Authorization") != "Bearer sekrit") {
      res.status = 401;
      return;
    }
    if (hits == 1) {
      res.status = 503;  // first attempt fails; the gateway must retry
      return;
    }
    nlohmann::json reply = {
        {"choices",
         nlohmann::json::array({{{"message", {{"role", "assistant"},
                                              {"content", "pong: " + prompt}}}}})}};
    res.set_content(reply.dump(), "application/json");
  });

  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();

  EndpointSpec spec;
  spec.endpoint_id = "http";
  spec.base_url = "http://127.0.0.1:" + std::to_string(port);
  spec.model_name = "test-model";
  spec.bearer_token = "sekrit";
  spec.retry.max_attempts = 3;
  spec.retry.backoff = {std::chrono::milliseconds(0), std::chrono::milliseconds(0)};

  Gateway gw;
  gw.register_endpoint(make_http_endpoint(spec));
  CHECK(gw.complete(make_request("http", "ping")) == "pong: ping");
  CHECK(hits.load() == 2);

  server.stop();
  server_thread.join();
}
