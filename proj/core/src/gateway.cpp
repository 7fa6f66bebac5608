#include "cotc/gateway.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cotc/errors.hpp"
#include "cotc/text.hpp"

namespace cotc {

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

uint64_t replay_key(const CompletionRequest& req) {
  // Length-prefixed field concatenation so no two requests collide by
  // boundary ambiguity.
  std::string buf;
  auto put = [&buf](std::string_view field) {
    buf += std::to_string(field.size());
    buf += ':';
    buf += field;
  };
  put(req.endpoint_id);
  put(req.prompt);
  put(std::to_string(req.seed));
  char tmp[64];
  std::snprintf(tmp, sizeof(tmp), "%.9g", req.temperature);
  put(tmp);
  put(std::to_string(req.max_tokens));
  put(req.image_ref ? *req.image_ref : std::string_view("<none>"));
  return fnv1a64(buf);
}

std::string replay_key_hex(const CompletionRequest& req) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(replay_key(req)));
  return std::string(buf);
}

// ── gateway internals ─────────────────────────────────────────

struct Gateway::Slot {
  std::unique_ptr<Endpoint> endpoint;
  std::mutex mu;
  std::condition_variable cv;
  int in_flight = 0;
  EndpointStats stats;

  // Hand-rolled semaphore so the in-flight bound is a runtime value.
  struct Guard {
    Slot& slot;
    explicit Guard(Slot& s) : slot(s) {
      std::unique_lock lock(slot.mu);
      int limit = slot.endpoint->spec().max_in_flight;
      slot.cv.wait(lock, [&] { return slot.in_flight < limit; });
      ++slot.in_flight;
      slot.stats.max_in_flight_seen = std::max(slot.stats.max_in_flight_seen, slot.in_flight);
    }
    ~Guard() {
      {
        std::lock_guard lock(slot.mu);
        --slot.in_flight;
      }
      slot.cv.notify_one();
    }
  };
};

Gateway::Gateway() = default;
Gateway::~Gateway() = default;

void Gateway::register_endpoint(std::unique_ptr<Endpoint> endpoint) {
  std::lock_guard lock(mu_);
  auto id = endpoint->spec().endpoint_id;
  auto slot = std::make_unique<Slot>();
  slot->endpoint = std::move(endpoint);
  slots_[id] = std::move(slot);
}

bool Gateway::has_endpoint(const std::string& id) const {
  std::lock_guard lock(mu_);
  return slots_.count(id) > 0;
}

std::vector<std::string> Gateway::endpoint_ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : slots_) ids.push_back(id);
  return ids;
}

void Gateway::set_replay_cache(std::optional<std::filesystem::path> dir) {
  std::lock_guard lock(mu_);
  if (dir) std::filesystem::create_directories(*dir);
  replay_dir_ = std::move(dir);
}

void Gateway::set_request_budget(std::optional<long> max_live_calls) {
  std::lock_guard lock(mu_);
  budget_ = max_live_calls;
}

Gateway::Slot& Gateway::slot_for(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = slots_.find(id);
  if (it == slots_.end()) throw UnknownEndpoint(id);
  return *it->second;
}

std::string Gateway::complete(const CompletionRequest& req) {
  Slot& slot = slot_for(req.endpoint_id);

  std::optional<std::filesystem::path> cache_file;
  {
    std::lock_guard lock(mu_);
    if (replay_dir_) cache_file = *replay_dir_ / (replay_key_hex(req) + ".json");
  }
  if (cache_file && std::filesystem::exists(*cache_file)) {
    auto doc = nlohmann::json::parse(read_file(*cache_file));
    std::lock_guard lock(mu_);
    ++cache_hits_;
    return doc.at("response").get<std::string>();
  }

  const RetryPolicy& retry = slot.endpoint->spec().retry;
  std::string response;
  for (int attempt = 1;; ++attempt) {
    {
      // Every attempt consumes budget: the cap bounds actual traffic.
      std::lock_guard lock(mu_);
      if (budget_ && live_calls_ >= *budget_) {
        throw BudgetExceeded("request budget of " + std::to_string(*budget_) + " exhausted");
      }
      ++live_calls_;
    }
    try {
      Slot::Guard guard(slot);
      {
        std::lock_guard lock(slot.mu);
        ++slot.stats.dispatched;
      }
      response = slot.endpoint->complete(req);
      break;
    } catch (const MockMiss&) {
      throw;  // a scripted-mock miss is a fixture bug, not a transient fault
    } catch (const EndpointError& e) {
      if (e.status() < 500 || attempt >= retry.max_attempts) throw;
    } catch (const Error&) {
      if (attempt >= retry.max_attempts) throw;
    }
    auto idx = static_cast<std::size_t>(attempt - 1);
    if (idx < retry.backoff.size() && retry.backoff[idx].count() > 0) {
      std::this_thread::sleep_for(retry.backoff[idx]);
    }
  }

  if (cache_file) {
    nlohmann::json doc;
    doc["endpoint_id"] = req.endpoint_id;
    doc["seed"] = req.seed;
    doc["prompt_hash"] = fnv1a64_hex(req.prompt);
    doc["response"] = response;
    std::ofstream out(*cache_file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write replay cache file " + cache_file->string());
    out << doc.dump(2) << "\n";
  }
  return response;
}

GatewayStats Gateway::stats() const {
  std::lock_guard lock(mu_);
  GatewayStats s;
  s.live_calls = live_calls_;
  s.cache_hits = cache_hits_;
  for (const auto& [id, slot] : slots_) {
    std::lock_guard slot_lock(slot->mu);
    s.per_endpoint[id] = slot->stats;
  }
  return s;
}

// ── http transport ────────────────────────────────────────────

namespace {

class HttpEndpoint final : public Endpoint {
 public:
  explicit HttpEndpoint(EndpointSpec spec) : spec_(std::move(spec)) {}

  std::string complete(const CompletionRequest& req) override {
    httplib::Client client(spec_.base_url);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(spec_.timeout);
    client.set_connection_timeout(secs.count() ? secs.count() : 1, 0);
    client.set_read_timeout(secs.count() ? secs.count() : 1, 0);

    nlohmann::json content;
    if (req.image_ref) {
      content = nlohmann::json::array(
          {{{"type", "text"}, {"text", req.prompt}},
           {{"type", "image_url"}, {"image_url", {{"url", *req.image_ref}}}}});
    } else {
      content = req.prompt;
    }
    nlohmann::json body = {{"model", spec_.model_name},
                           {"messages", nlohmann::json::array({{{"role", "user"},
                                                                {"content", content}}})},
                           {"seed", req.seed},
                           {"temperature", req.temperature},
                           {"max_tokens", req.max_tokens}};

    httplib::Headers headers;
    if (!spec_.bearer_token.empty()) {
      headers.emplace("Authorization", "Bearer " + spec_.bearer_token);
    }

    auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
      throw EndpointTimeout("no response from " + spec_.base_url + " (" +
                            httplib::to_string(res.error()) + ")");
    }
    if (res->status < 200 || res->status >= 300) {
      throw EndpointError(res->status, res->body.substr(0, 200));
    }
    try {
      auto doc = nlohmann::json::parse(res->body);
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw EndpointError(res->status, std::string("malformed completion body: ") + e.what());
    }
  }

  const EndpointSpec& spec() const override { return spec_; }

 private:
  EndpointSpec spec_;
};

}  // namespace

std::unique_ptr<Endpoint> make_http_endpoint(EndpointSpec spec) {
  return std::make_unique<HttpEndpoint>(std::move(spec));
}

// ── verifier ──────────────────────────────────────────────────

double Verifier::estimate_accuracy(const Sample& sample, std::string_view cot_prefix) {
  std::string prompt = render_verifier_prompt(sample, cot_prefix, store_);
  int correct = 0;
  for (int seed : kSeeds) {
    CompletionRequest req;
    req.endpoint_id = endpoint_id_;
    req.prompt = prompt;
    req.seed = seed;
    req.temperature = temperature_;
    req.max_tokens = max_tokens_;
    req.image_ref = sample.image_ref;
    std::string text;
    try {
      text = gateway_.complete(req);
    } catch (const MockMiss&) {
      throw;
    } catch (const Error& e) {
      throw VerifierUnavailable(std::string("verifier endpoint failed: ") + e.what());
    }
    if (auto boxed = try_extract_boxed(text)) {
      if (answers_match(*boxed, sample.answer)) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(kSeeds.size());
}

}  // namespace cotc
