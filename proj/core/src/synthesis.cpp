#include "cotc/synthesis.hpp"

#include <random>

namespace cotc {

TrajectorySet synthesize_trajectories(const Sample& sample, const SynthesisPlan& plan,
                                      Gateway& gateway, const TokenCounter& counter) {
  TrajectorySet set;
  set.sample_id = sample.id;
  set.m_models = static_cast<int>(plan.generator_endpoints.size());
  set.k_samples = plan.samples_per_model;

  for (const auto& endpoint : plan.generator_endpoints) {
    for (int seed = 0; seed < plan.samples_per_model; ++seed) {
      CompletionRequest req;
      req.endpoint_id = endpoint;
      req.prompt = sample.question;
      req.seed = seed;
      req.temperature = plan.decoding.temperature;
      req.max_tokens = plan.decoding.max_tokens;
      req.image_ref = sample.image_ref;
      try {
        std::string text = gateway.complete(req);
        Trajectory t;
        t.model_id = endpoint;
        t.seed = seed;
        t.length_tokens = counter(text);
        t.text = std::move(text);
        set.trajectories.push_back(std::move(t));
      } catch (const Error&) {
        // Retries are exhausted inside the gateway; keep going so the
        // partial set stays usable.
      }
    }
  }

  if (!set.complete()) {
    int obtained = set.obtained();
    int expected = set.expected();
    throw SynthesisIncomplete(sample.id, obtained, expected, std::move(set));
  }
  return set;
}

SplitResult split_dataset(const std::vector<Sample>& samples, std::pair<int, int> sizes,
                          uint64_t seed) {
  auto [n_train, n_com] = sizes;
  if (n_train < 0 || n_com < 0 ||
      static_cast<std::size_t>(n_train) + static_cast<std::size_t>(n_com) != samples.size()) {
    throw SizeMismatch("split sizes (" + std::to_string(n_train) + ", " + std::to_string(n_com) +
                       ") do not sum to " + std::to_string(samples.size()));
  }

  // Fisher-Yates with an explicit generator; std::shuffle is
  // implementation-defined and would break cross-platform determinism.
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }

  SplitResult result;
  result.train.reserve(n_train);
  result.com.reserve(n_com);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Sample& s = samples[order[i]];
    if (i < static_cast<std::size_t>(n_train)) {
      result.train.push_back(s);
    } else {
      result.com.push_back(s);
    }
  }
  return result;
}

}  // namespace cotc
