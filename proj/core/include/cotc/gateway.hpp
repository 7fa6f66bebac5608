#pragma once

#include <array>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cotc/reward.hpp"
#include "cotc/templates.hpp"
#include "cotc/types.hpp"

namespace cotc {

struct RetryPolicy {
  int max_attempts = 3;
  std::vector<std::chrono::milliseconds> backoff = {std::chrono::milliseconds(100),
                                                    std::chrono::milliseconds(500)};
};

struct EndpointSpec {
  std::string endpoint_id;
  std::string base_url;
  std::string model_name;
  int max_in_flight = 4;
  std::chrono::milliseconds timeout{30000};
  RetryPolicy retry;
  std::string bearer_token;  // optional Authorization header
};

struct CompletionRequest {
  std::string endpoint_id;
  std::string prompt;
  int seed = 0;
  double temperature = 0.0;
  int max_tokens = 1024;
  std::optional<std::string> image_ref;
};

// Deterministic replay key over every request field.
uint64_t replay_key(const CompletionRequest& req);
std::string replay_key_hex(const CompletionRequest& req);

// Transport for one endpoint. Implementations throw EndpointError /
// EndpointTimeout / MockMiss; the gateway handles retries above this.
class Endpoint {
 public:
  virtual ~Endpoint() = default;
  virtual std::string complete(const CompletionRequest& req) = 0;
  virtual const EndpointSpec& spec() const = 0;
};

struct EndpointStats {
  long dispatched = 0;      // attempts that reached the transport
  int max_in_flight_seen = 0;
};

struct GatewayStats {
  long live_calls = 0;  // completed transport calls (all endpoints)
  long cache_hits = 0;
  std::map<std::string, EndpointStats> per_endpoint;
};

// Uniform client for every model role. Serializes nothing about prompts:
// generators, compressor, verifier and judges differ only in endpoint id and
// prompt text. Thread-safe; enforces per-endpoint bounded concurrency, a
// per-run request budget, retry with backoff, and an optional replay cache.
class Gateway {
 public:
  Gateway();
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  void register_endpoint(std::unique_ptr<Endpoint> endpoint);
  bool has_endpoint(const std::string& id) const;
  std::vector<std::string> endpoint_ids() const;

  // Append-only directory of replay-key -> response files.
  void set_replay_cache(std::optional<std::filesystem::path> dir);
  void set_request_budget(std::optional<long> max_live_calls);

  std::string complete(const CompletionRequest& req);

  GatewayStats stats() const;

 private:
  struct Slot;
  Slot& slot_for(const std::string& id) const;

  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<Slot>> slots_;
  std::optional<std::filesystem::path> replay_dir_;
  std::optional<long> budget_;
  long live_calls_ = 0;
  long cache_hits_ = 0;
};

std::unique_ptr<Endpoint> make_http_endpoint(EndpointSpec spec);

// Gateway-backed verifier: renders the verifier prompt for (sample, prefix),
// asks the verifier endpoint once per seed in {0,1,2}, and returns the mean
// indicator of boxed answers matching the ground truth. Always a multiple
// of 1/3. Throws VerifierUnavailable when the endpoint cannot be reached.
class Verifier : public VerifierClient {
 public:
  static constexpr std::array<int, 3> kSeeds{0, 1, 2};

  Verifier(Gateway& gateway, std::string endpoint_id, const TemplateStore& store,
           double temperature = 0.7, int max_tokens = 256)
      : gateway_(gateway),
        endpoint_id_(std::move(endpoint_id)),
        store_(store),
        temperature_(temperature),
        max_tokens_(max_tokens) {}

  double estimate_accuracy(const Sample& sample, std::string_view cot_prefix) override;

 private:
  Gateway& gateway_;
  std::string endpoint_id_;
  const TemplateStore& store_;
  double temperature_;
  int max_tokens_;
};

}  // namespace cotc
