#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cotc/gateway.hpp"
#include "cotc/grpo.hpp"

namespace cotc {

// Effective run configuration. Layering: config file, then COTC_* environment
// overrides, then command-line flags; the resolved values are embedded in
// run outputs so every artifact records how it was produced.
struct RunConfig {
  std::filesystem::path prompt_dir;
  std::optional<std::filesystem::path> replay_cache;
  std::optional<std::filesystem::path> mock_fixtures;
  std::optional<long> request_budget;
  double eta = 0.15;
  uint64_t seed = 0;
  bool dry_run = false;

  std::string verifier_endpoint = "verifier";
  double verifier_temperature = 0.7;
  int verifier_max_tokens = 256;

  ToyTrainConfig grpo;

  std::vector<EndpointSpec> endpoints;  // HTTP endpoints from the config file
};

RunConfig load_config(const std::optional<std::filesystem::path>& file);

// Applies COTC_REPLAY_CACHE, COTC_REQUEST_BUDGET, COTC_PROMPT_DIR, COTC_ETA
// and COTC_SEED on top of the file layer.
void apply_env_overrides(RunConfig& cfg);

// JSON document describing the effective configuration.
std::string effective_config_json(const RunConfig& cfg);

}  // namespace cotc
