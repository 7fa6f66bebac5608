#include "cotc/config.hpp"

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "cotc/errors.hpp"

namespace cotc {

namespace {

using nlohmann::json;

EndpointSpec endpoint_from_json(const json& j) {
  EndpointSpec spec;
  spec.endpoint_id = j.at("id").get<std::string>();
  spec.base_url = j.at("base_url").get<std::string>();
  spec.model_name = j.value("model", spec.endpoint_id);
  spec.max_in_flight = j.value("max_in_flight", 4);
  spec.timeout = std::chrono::milliseconds(j.value("timeout_ms", 30000));
  if (j.contains("retry")) {
    const auto& r = j["retry"];
    spec.retry.max_attempts = r.value("max_attempts", 3);
    if (r.contains("backoff_ms")) {
      spec.retry.backoff.clear();
      for (const auto& ms : r["backoff_ms"]) {
        spec.retry.backoff.emplace_back(std::chrono::milliseconds(ms.get<long>()));
      }
    }
  }
  if (j.contains("bearer_token_env")) {
    if (const char* tok = std::getenv(j["bearer_token_env"].get<std::string>().c_str())) {
      spec.bearer_token = tok;
    }
  }
  if (spec.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
  if (spec.retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
  return spec;
}

}  // namespace

RunConfig load_config(const std::optional<std::filesystem::path>& file) {
  RunConfig cfg;
  cfg.prompt_dir = default_prompt_dir();
  if (!file) return cfg;

  std::ifstream in(*file, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + file->string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("bad config file " + file->string() + ": " + e.what());
  }

  try {
    if (doc.contains("prompt_dir")) cfg.prompt_dir = doc["prompt_dir"].get<std::string>();
    if (doc.contains("replay_cache") && !doc["replay_cache"].is_null()) {
      cfg.replay_cache = doc["replay_cache"].get<std::string>();
    }
    if (doc.contains("mock_fixtures") && !doc["mock_fixtures"].is_null()) {
      cfg.mock_fixtures = doc["mock_fixtures"].get<std::string>();
    }
    if (doc.contains("request_budget") && !doc["request_budget"].is_null()) {
      cfg.request_budget = doc["request_budget"].get<long>();
    }
    cfg.eta = doc.value("eta", cfg.eta);
    cfg.seed = doc.value("seed", cfg.seed);
    if (doc.contains("verifier")) {
      const auto& v = doc["verifier"];
      cfg.verifier_endpoint = v.value("endpoint", cfg.verifier_endpoint);
      cfg.verifier_temperature = v.value("temperature", cfg.verifier_temperature);
      cfg.verifier_max_tokens = v.value("max_tokens", cfg.verifier_max_tokens);
    }
    if (doc.contains("grpo")) {
      const auto& g = doc["grpo"];
      cfg.grpo.group_size = g.value("group_size", cfg.grpo.group_size);
      cfg.grpo.clip_eps = g.value("clip_eps", cfg.grpo.clip_eps);
      cfg.grpo.kl_beta = g.value("kl_beta", cfg.grpo.kl_beta);
      cfg.grpo.steps = g.value("steps", cfg.grpo.steps);
      cfg.grpo.learning_rate = g.value("learning_rate", cfg.grpo.learning_rate);
      cfg.grpo.seed = g.value("seed", cfg.grpo.seed);
    }
    for (const auto& ep : doc.value("endpoints", json::array())) {
      cfg.endpoints.push_back(endpoint_from_json(ep));
    }
  } catch (const json::exception& e) {
    throw ConfigError("bad config file " + file->string() + ": " + e.what());
  }

  if (cfg.eta <= 0.0 || cfg.eta >= 1.0) throw ConfigError("eta must lie in (0,1)");
  return cfg;
}

void apply_env_overrides(RunConfig& cfg) {
  auto get = [](const char* name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name); v && *v) return std::string(v);
    return std::nullopt;
  };
  if (auto v = get("COTC_REPLAY_CACHE")) cfg.replay_cache = *v;
  if (auto v = get("COTC_PROMPT_DIR")) cfg.prompt_dir = *v;
  if (auto v = get("COTC_REQUEST_BUDGET")) {
    try {
      cfg.request_budget = std::stol(*v);
    } catch (const std::exception&) {
      throw ConfigError("COTC_REQUEST_BUDGET is not an integer: " + *v);
    }
  }
  if (auto v = get("COTC_ETA")) {
    try {
      cfg.eta = std::stod(*v);
    } catch (const std::exception&) {
      throw ConfigError("COTC_ETA is not a number: " + *v);
    }
    if (cfg.eta <= 0.0 || cfg.eta >= 1.0) throw ConfigError("eta must lie in (0,1)");
  }
  if (auto v = get("COTC_SEED")) {
    try {
      cfg.seed = std::stoull(*v);
    } catch (const std::exception&) {
      throw ConfigError("COTC_SEED is not an integer: " + *v);
    }
  }
}

std::string effective_config_json(const RunConfig& cfg) {
  json j;
  j["prompt_dir"] = cfg.prompt_dir.string();
  j["replay_cache"] = cfg.replay_cache ? json(cfg.replay_cache->string()) : json(nullptr);
  j["mock_fixtures"] = cfg.mock_fixtures ? json(cfg.mock_fixtures->string()) : json(nullptr);
  j["request_budget"] = cfg.request_budget ? json(*cfg.request_budget) : json(nullptr);
  j["eta"] = cfg.eta;
  j["seed"] = cfg.seed;
  j["dry_run"] = cfg.dry_run;
  j["verifier"] = {{"endpoint", cfg.verifier_endpoint},
                   {"temperature", cfg.verifier_temperature},
                   {"max_tokens", cfg.verifier_max_tokens}};
  j["grpo"] = {{"group_size", cfg.grpo.group_size}, {"clip_eps", cfg.grpo.clip_eps},
               {"kl_beta", cfg.grpo.kl_beta},       {"steps", cfg.grpo.steps},
               {"learning_rate", cfg.grpo.learning_rate}, {"seed", cfg.grpo.seed}};
  return j.dump(2);
}

}  // namespace cotc
