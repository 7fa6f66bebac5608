#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cotc/gateway.hpp"

namespace cotc {

// Deterministic in-process endpoints for offline runs. All of them implement
// the same Endpoint interface the HTTP transport uses, so the rest of the
// pipeline cannot tell mocks from live models.

std::unique_ptr<Endpoint> make_echo_endpoint(std::string id);

std::unique_ptr<Endpoint> make_constant_endpoint(std::string id, std::string text);

// First matching rule wins. A rule matches when every present field matches:
// exact replay key, exact prompt, prompt substring, seed. Strict: a request
// no rule matches raises MockMiss.
struct ScriptRule {
  std::optional<std::string> replay_key_hex;
  std::optional<std::string> prompt_equals;
  std::optional<std::string> prompt_contains;
  std::optional<int> seed;
  std::string text;
};
std::unique_ptr<Endpoint> make_scripted_endpoint(std::string id, std::vector<ScriptRule> rules);

// Rule-based verifier: answers a sample's question correctly exactly when
// the prompt carries one of the designated key segments (and the request
// seed is among that key's seeds). Wrong answers use a sentinel that never
// matches a ground truth.
struct VerifierKey {
  std::string contains;
  std::vector<int> seeds = {0, 1, 2};
};
struct VerifierRule {
  std::string question_contains;
  std::string answer;
  std::vector<VerifierKey> keys;
  std::string wrong_text = "\\boxed{__wrong__}";
};
std::unique_ptr<Endpoint> make_rule_verifier_endpoint(std::string id,
                                                      std::vector<VerifierRule> rules);

// Scripted judge: emits a short analysis line followed by "Score: \boxed{X}".
struct JudgeRule {
  std::string contains;
  int score = 3;
};
std::unique_ptr<Endpoint> make_judge_endpoint(std::string id, std::vector<JudgeRule> rules,
                                              std::optional<int> default_score);

// Endpoint that always fails; used to exercise retry and partial-synthesis
// paths. status 0 simulates a timeout instead of an HTTP error; max_attempts
// sets the retry policy the gateway applies.
std::unique_ptr<Endpoint> make_down_endpoint(std::string id, int status = 503,
                                             int max_attempts = 1);

// Loads a mock fixture file ({"endpoints": [...]}) and registers every
// endpoint it defines. Throws FixtureParseError on malformed fixtures.
void install_mock_endpoints(Gateway& gateway, const std::filesystem::path& fixture_file);

}  // namespace cotc
