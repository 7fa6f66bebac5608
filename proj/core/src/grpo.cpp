#include "cotc/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cotc/errors.hpp"

namespace cotc {

namespace {

constexpr double kAdvantageDelta = 1e-8;

// Deterministic uniform in [0,1) from a raw 64-bit draw; avoids the
// implementation-defined std::uniform_real_distribution.
double uniform01(std::uint64_t raw) {
  return static_cast<double>(raw >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<double> group_advantages(const std::vector<double>& rewards) {
  const std::size_t g = rewards.size();
  if (g < 2) throw GroupTooSmall(g);
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(g);
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(g);
  double denom = std::sqrt(var) + kAdvantageDelta;
  std::vector<double> adv(g);
  for (std::size_t i = 0; i < g; ++i) adv[i] = (rewards[i] - mean) / denom;
  return adv;
}

double clipped_surrogate(double ratio, double advantage, double eps) {
  double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * advantage, clipped * advantage);
}

double kl_divergence(std::span<const double> policy_probs, std::span<const double> ref_probs) {
  if (policy_probs.size() != ref_probs.size()) {
    throw DomainError("KL requires distributions over the same action set");
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < policy_probs.size(); ++i) {
    double p = policy_probs[i];
    if (p <= 0.0) continue;  // 0*log0 = 0 by convention
    double q = ref_probs[i];
    if (q <= 0.0) throw DomainError("zero reference probability with positive policy mass");
    kl += p * std::log(p / q);
  }
  return kl;
}

double grpo_objective(const GroupRollout& group) {
  const std::size_t g = group.size();
  if (g < 2) throw GroupTooSmall(g);
  if (group.advantages.size() != g || group.new_logprobs.size() != g ||
      group.old_logprobs.size() != g) {
    throw DomainError("group member lists must all have length G");
  }
  double mean_adv = 0.0;
  for (double a : group.advantages) mean_adv += a;
  mean_adv /= static_cast<double>(g);
  if (std::abs(mean_adv) > 1e-9) {
    throw DomainError("advantages must be zero-mean after normalization");
  }

  double surrogate = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    double ratio = std::exp(group.new_logprobs[i] - group.old_logprobs[i]);
    surrogate += clipped_surrogate(ratio, group.advantages[i], group.clip_eps);
  }
  surrogate /= static_cast<double>(g);

  double kl = 0.0;
  if (group.kl_beta != 0.0) {
    kl = kl_divergence(group.policy_probs, group.ref_probs);
  }
  return surrogate - group.kl_beta * kl;
}

std::vector<double> ToyPolicy::probs() const {
  std::vector<double> p(logits.size());
  double max_logit = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - max_logit);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

std::vector<double> ToyPolicy::logprobs() const {
  std::vector<double> lp(logits.size());
  double max_logit = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - max_logit);
  double log_z = std::log(z) + max_logit;
  for (std::size_t i = 0; i < logits.size(); ++i) lp[i] = logits[i] - log_z;
  return lp;
}

double toy_objective(const std::vector<double>& logits, const ToyBatch& batch) {
  ToyPolicy policy{logits};
  auto lp = policy.logprobs();
  const std::size_t g = batch.actions.size();
  double surrogate = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    double ratio = std::exp(lp[batch.actions[i]] - batch.old_logprobs[i]);
    surrogate += clipped_surrogate(ratio, batch.advantages[i], batch.clip_eps);
  }
  surrogate /= static_cast<double>(g);
  double kl = 0.0;
  if (batch.kl_beta != 0.0) {
    kl = kl_divergence(policy.probs(), batch.ref_probs);
  }
  return surrogate - batch.kl_beta * kl;
}

std::vector<double> toy_objective_gradient(const std::vector<double>& logits,
                                           const ToyBatch& batch) {
  ToyPolicy policy{logits};
  auto probs = policy.probs();
  auto lp = policy.logprobs();
  const std::size_t k = logits.size();
  const std::size_t g = batch.actions.size();
  std::vector<double> grad(k, 0.0);

  // Surrogate term: members on the clipped branch outside the trust region
  // contribute zero gradient; ties resolve to the unclipped branch.
  for (std::size_t i = 0; i < g; ++i) {
    int a = batch.actions[i];
    double adv = batch.advantages[i];
    double ratio = std::exp(lp[a] - batch.old_logprobs[i]);
    double clipped = std::clamp(ratio, 1.0 - batch.clip_eps, 1.0 + batch.clip_eps);
    bool unclipped_active = ratio * adv <= clipped * adv;
    if (!unclipped_active) continue;
    double scale = adv * ratio / static_cast<double>(g);
    for (std::size_t j = 0; j < k; ++j) {
      double indicator = j == static_cast<std::size_t>(a) ? 1.0 : 0.0;
      grad[j] += scale * (indicator - probs[j]);
    }
  }

  // KL term: d/dz_j KL = p_j * (log(p_j/q_j) - KL).
  if (batch.kl_beta != 0.0) {
    double kl = kl_divergence(probs, batch.ref_probs);
    for (std::size_t j = 0; j < k; ++j) {
      double diff = std::log(probs[j] / batch.ref_probs[j]) - kl;
      grad[j] -= batch.kl_beta * probs[j] * diff;
    }
  }

  for (double v : grad) {
    if (!std::isfinite(v)) throw NonFiniteGradient("non-finite objective gradient");
  }
  return grad;
}

int ToyBanditEnv::best_index() const {
  int best = 0;
  for (std::size_t i = 1; i < candidate_rewards.size(); ++i) {
    if (candidate_rewards[i] > candidate_rewards[best]) best = static_cast<int>(i);
  }
  return best;
}

ToyTrainTrace train_toy_policy(const ToyBanditEnv& env, const ToyTrainConfig& cfg) {
  const std::size_t k = env.candidate_rewards.size();
  if (k < 2) throw DomainError("bandit needs at least two candidates");

  ToyPolicy policy;
  policy.logits = env.initial_logits.empty() ? std::vector<double>(k, 0.0) : env.initial_logits;
  std::vector<double> ref =
      env.ref_probs.empty() ? std::vector<double>(k, 1.0 / static_cast<double>(k)) : env.ref_probs;

  std::mt19937_64 rng(cfg.seed);
  const int best = env.best_index();

  ToyTrainTrace trace;
  trace.steps.reserve(cfg.steps);
  for (int step = 0; step < cfg.steps; ++step) {
    auto old_probs = policy.probs();
    auto old_lp = policy.logprobs();

    // Sample G candidates from the snapshot policy by inverse CDF.
    ToyBatch batch;
    batch.clip_eps = cfg.clip_eps;
    batch.kl_beta = cfg.kl_beta;
    batch.ref_probs = ref;
    batch.actions.resize(cfg.group_size);
    batch.old_logprobs.resize(cfg.group_size);
    std::vector<double> rewards(cfg.group_size);
    for (int i = 0; i < cfg.group_size; ++i) {
      double u = uniform01(rng());
      double acc = 0.0;
      int pick = static_cast<int>(k) - 1;
      for (std::size_t j = 0; j < k; ++j) {
        acc += old_probs[j];
        if (u < acc) {
          pick = static_cast<int>(j);
          break;
        }
      }
      batch.actions[i] = pick;
      batch.old_logprobs[i] = old_lp[pick];
      rewards[i] = env.candidate_rewards[pick];
    }
    batch.advantages = group_advantages(rewards);

    auto grad = toy_objective_gradient(policy.logits, batch);
    for (std::size_t j = 0; j < k; ++j) policy.logits[j] += cfg.learning_rate * grad[j];
    for (double l : policy.logits) {
      if (!std::isfinite(l)) throw NonFiniteGradient("policy logits diverged");
    }

    auto new_probs = policy.probs();
    ToyTrainStep rec;
    rec.step = step;
    double mean_reward = 0.0;
    for (double r : rewards) mean_reward += r;
    rec.mean_reward = mean_reward / cfg.group_size;
    rec.objective = toy_objective(policy.logits, batch);
    rec.kl = kl_divergence(new_probs, ref);
    rec.top_prob = new_probs[best];
    trace.steps.push_back(rec);
  }
  trace.final_policy = policy;
  return trace;
}

}  // namespace cotc
