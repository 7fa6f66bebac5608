#include "cotc/mocks.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cotc/errors.hpp"

namespace cotc {

namespace {

EndpointSpec mock_spec(std::string id) {
  EndpointSpec spec;
  spec.endpoint_id = std::move(id);
  spec.base_url = "mock://" + spec.endpoint_id;
  spec.model_name = spec.endpoint_id;
  spec.max_in_flight = 64;
  spec.retry.max_attempts = 1;
  spec.retry.backoff.clear();
  return spec;
}

class EchoEndpoint final : public Endpoint {
 public:
  explicit EchoEndpoint(std::string id) : spec_(mock_spec(std::move(id))) {}
  std::string complete(const CompletionRequest& req) override { return req.prompt; }
  const EndpointSpec& spec() const override { return spec_; }

 private:
  EndpointSpec spec_;
};

class ConstantEndpoint final : public Endpoint {
 public:
  ConstantEndpoint(std::string id, std::string text)
      : spec_(mock_spec(std::move(id))), text_(std::move(text)) {}
  std::string complete(const CompletionRequest&) override { return text_; }
  const EndpointSpec& spec() const override { return spec_; }

 private:
  EndpointSpec spec_;
  std::string text_;
};

class ScriptedEndpoint final : public Endpoint {
 public:
  ScriptedEndpoint(std::string id, std::vector<ScriptRule> rules)
      : spec_(mock_spec(std::move(id))), rules_(std::move(rules)) {}

  std::string complete(const CompletionRequest& req) override {
    for (const auto& rule : rules_) {
      if (rule.replay_key_hex && *rule.replay_key_hex != replay_key_hex(req)) continue;
      if (rule.prompt_equals && *rule.prompt_equals != req.prompt) continue;
      if (rule.prompt_contains && req.prompt.find(*rule.prompt_contains) == std::string::npos)
        continue;
      if (rule.seed && *rule.seed != req.seed) continue;
      return rule.text;
    }
    throw MockMiss("no scripted response on '" + spec_.endpoint_id + "' for replay key " +
                   replay_key_hex(req));
  }
  const EndpointSpec& spec() const override { return spec_; }

 private:
  EndpointSpec spec_;
  std::vector<ScriptRule> rules_;
};

class RuleVerifierEndpoint final : public Endpoint {
 public:
  RuleVerifierEndpoint(std::string id, std::vector<VerifierRule> rules)
      : spec_(mock_spec(std::move(id))), rules_(std::move(rules)) {}

  std::string complete(const CompletionRequest& req) override {
    for (const auto& rule : rules_) {
      if (req.prompt.find(rule.question_contains) == std::string::npos) continue;
      for (const auto& key : rule.keys) {
        if (req.prompt.find(key.contains) == std::string::npos) continue;
        bool seed_ok = false;
        for (int s : key.seeds) seed_ok = seed_ok || s == req.seed;
        if (seed_ok) return "\\boxed{" + rule.answer + "}";
      }
      return rule.wrong_text;
    }
    throw MockMiss("rule verifier '" + spec_.endpoint_id + "' has no rule for this prompt");
  }
  const EndpointSpec& spec() const override { return spec_; }

 private:
  EndpointSpec spec_;
  std::vector<VerifierRule> rules_;
};

class JudgeEndpoint final : public Endpoint {
 public:
  JudgeEndpoint(std::string id, std::vector<JudgeRule> rules, std::optional<int> default_score)
      : spec_(mock_spec(std::move(id))),
        rules_(std::move(rules)),
        default_score_(default_score) {}

  std::string complete(const CompletionRequest& req) override {
    for (const auto& rule : rules_) {
      if (req.prompt.find(rule.contains) != std::string::npos) return render(rule.score);
    }
    if (default_score_) return render(*default_score_);
    throw MockMiss("judge '" + spec_.endpoint_id + "' has no rule for this prompt");
  }
  const EndpointSpec& spec() const override { return spec_; }

 private:
  static std::string render(int score) {
    return "The response was assessed against the rubric.\nScore: \\boxed{" +
           std::to_string(score) + "}";
  }

  EndpointSpec spec_;
  std::vector<JudgeRule> rules_;
  std::optional<int> default_score_;
};

class DownEndpoint final : public Endpoint {
 public:
  DownEndpoint(std::string id, int status, int max_attempts)
      : spec_(mock_spec(std::move(id))), status_(status) {
    spec_.retry.max_attempts = max_attempts;
  }
  std::string complete(const CompletionRequest&) override {
    if (status_ == 0) throw EndpointTimeout("simulated timeout on " + spec_.endpoint_id);
    throw EndpointError(status_, "endpoint is down");
  }
  const EndpointSpec& spec() const override { return spec_; }

 private:
  EndpointSpec spec_;
  int status_;
};

}  // namespace

std::unique_ptr<Endpoint> make_echo_endpoint(std::string id) {
  return std::make_unique<EchoEndpoint>(std::move(id));
}

std::unique_ptr<Endpoint> make_constant_endpoint(std::string id, std::string text) {
  return std::make_unique<ConstantEndpoint>(std::move(id), std::move(text));
}

std::unique_ptr<Endpoint> make_scripted_endpoint(std::string id, std::vector<ScriptRule> rules) {
  return std::make_unique<ScriptedEndpoint>(std::move(id), std::move(rules));
}

std::unique_ptr<Endpoint> make_rule_verifier_endpoint(std::string id,
                                                      std::vector<VerifierRule> rules) {
  return std::make_unique<RuleVerifierEndpoint>(std::move(id), std::move(rules));
}

std::unique_ptr<Endpoint> make_judge_endpoint(std::string id, std::vector<JudgeRule> rules,
                                              std::optional<int> default_score) {
  return std::make_unique<JudgeEndpoint>(std::move(id), std::move(rules), default_score);
}

std::unique_ptr<Endpoint> make_down_endpoint(std::string id, int status, int max_attempts) {
  return std::make_unique<DownEndpoint>(std::move(id), status, max_attempts);
}

void install_mock_endpoints(Gateway& gateway, const std::filesystem::path& fixture_file) {
  std::ifstream in(fixture_file, std::ios::binary);
  if (!in) throw FixtureParseError("cannot open mock fixture " + fixture_file.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FixtureParseError("bad mock fixture " + fixture_file.string() + ": " + e.what());
  }

  try {
    for (const auto& ep : doc.at("endpoints")) {
      std::string id = ep.at("id").get<std::string>();
      std::string kind = ep.at("kind").get<std::string>();
      if (kind == "echo") {
        gateway.register_endpoint(make_echo_endpoint(id));
      } else if (kind == "constant") {
        gateway.register_endpoint(make_constant_endpoint(id, ep.at("text").get<std::string>()));
      } else if (kind == "scripted") {
        std::vector<ScriptRule> rules;
        for (const auto& r : ep.at("script")) {
          ScriptRule rule;
          if (r.contains("replay_key")) rule.replay_key_hex = r["replay_key"].get<std::string>();
          if (r.contains("prompt_equals")) rule.prompt_equals = r["prompt_equals"].get<std::string>();
          if (r.contains("prompt_contains"))
            rule.prompt_contains = r["prompt_contains"].get<std::string>();
          if (r.contains("seed")) rule.seed = r["seed"].get<int>();
          rule.text = r.at("text").get<std::string>();
          rules.push_back(std::move(rule));
        }
        gateway.register_endpoint(make_scripted_endpoint(id, std::move(rules)));
      } else if (kind == "rule_verifier") {
        std::vector<VerifierRule> rules;
        for (const auto& r : ep.at("rules")) {
          VerifierRule rule;
          rule.question_contains = r.at("question_contains").get<std::string>();
          rule.answer = r.at("answer").get<std::string>();
          if (r.contains("wrong_text")) rule.wrong_text = r["wrong_text"].get<std::string>();
          for (const auto& k : r.at("keys")) {
            VerifierKey key;
            key.contains = k.at("contains").get<std::string>();
            if (k.contains("seeds")) key.seeds = k["seeds"].get<std::vector<int>>();
            rule.keys.push_back(std::move(key));
          }
          rules.push_back(std::move(rule));
        }
        gateway.register_endpoint(make_rule_verifier_endpoint(id, std::move(rules)));
      } else if (kind == "judge") {
        std::vector<JudgeRule> rules;
        for (const auto& r : ep.value("rules", nlohmann::json::array())) {
          rules.push_back(JudgeRule{r.at("contains").get<std::string>(), r.at("score").get<int>()});
        }
        std::optional<int> default_score;
        if (ep.contains("default_score")) default_score = ep["default_score"].get<int>();
        gateway.register_endpoint(make_judge_endpoint(id, std::move(rules), default_score));
      } else if (kind == "down") {
        gateway.register_endpoint(
            make_down_endpoint(id, ep.value("status", 503), ep.value("max_attempts", 1)));
      } else {
        throw FixtureParseError("unknown mock kind '" + kind + "' in " + fixture_file.string());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FixtureParseError("bad mock fixture " + fixture_file.string() + ": " + e.what());
  }
}

}  // namespace cotc
