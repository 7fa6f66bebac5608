#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cotc/types.hpp"

namespace cotc {

// One group of G sibling rollouts for the same query. The five per-member
// lists all have length G; policy_probs/ref_probs carry the toy policy's
// full action distributions so the KL term can be computed exactly rather
// than estimated from the sampled members.
struct GroupRollout {
  std::vector<double> rewards;
  std::vector<double> advantages;
  std::vector<double> new_logprobs;
  std::vector<double> old_logprobs;
  std::vector<double> ref_logprobs;
  double clip_eps = 0.2;
  double kl_beta = 0.04;
  std::vector<double> policy_probs;
  std::vector<double> ref_probs;

  std::size_t size() const { return rewards.size(); }
};

// A_i = (r_i - mean) / (std_pop + 1e-8). Throws GroupTooSmall for G < 2.
std::vector<double> group_advantages(const std::vector<double>& rewards);

// min(ratio * A, clip(ratio, 1-eps, 1+eps) * A).
double clipped_surrogate(double ratio, double advantage, double eps);

// Exact categorical KL sum p*log(p/q), with 0*log0 = 0. Throws DomainError
// when q_i == 0 while p_i > 0.
double kl_divergence(std::span<const double> policy_probs, std::span<const double> ref_probs);

// Mean clipped surrogate over the group minus beta * KL; the scalar to
// maximize. Requires the member lists to be consistent and the advantages
// zero-mean; the distributions are required only when kl_beta != 0.
double grpo_objective(const GroupRollout& group);

// ── toy policy ────────────────────────────────────────────────
// Desk-scale stand-in for the compressor policy: a softmax over a finite
// set of candidate outputs, temperature fixed at 1.

struct ToyPolicy {
  std::vector<double> logits;

  std::vector<double> probs() const;
  std::vector<double> logprobs() const;
};

// Everything the objective needs once a group has been sampled. Actions are
// candidate indices; one sequence-level logprob per member.
struct ToyBatch {
  std::vector<int> actions;
  std::vector<double> advantages;
  std::vector<double> old_logprobs;
  std::vector<double> ref_probs;
  double clip_eps = 0.2;
  double kl_beta = 0.04;
};

double toy_objective(const std::vector<double>& logits, const ToyBatch& batch);

// Analytic gradient of toy_objective with respect to the logits. Matches
// central finite differences away from the clip kinks.
std::vector<double> toy_objective_gradient(const std::vector<double>& logits,
                                           const ToyBatch& batch);

// Candidate-set bandit: a fixed sample whose candidate compressor outputs
// have been scored by the reward engine (against mocks) once up front.
struct ToyBanditEnv {
  Sample sample;
  std::vector<std::string> candidate_raw_outputs;
  std::vector<std::string> candidate_names;  // optional labels for reporting
  std::vector<double> candidate_rewards;
  std::vector<double> initial_logits;  // empty means uniform
  std::vector<double> ref_probs;       // empty means uniform

  int best_index() const;
};

struct ToyTrainConfig {
  int group_size = 8;
  double clip_eps = 0.2;
  double kl_beta = 0.04;
  int steps = 500;
  double learning_rate = 0.1;
  uint64_t seed = 0;
};

struct ToyTrainStep {
  int step = 0;
  double mean_reward = 0.0;
  double objective = 0.0;  // evaluated after the gradient step
  double kl = 0.0;         // KL(policy || ref) after the gradient step
  double top_prob = 0.0;   // probability of the best-reward candidate
};

struct ToyTrainTrace {
  std::vector<ToyTrainStep> steps;
  ToyPolicy final_policy;
};

// Seed-deterministic GRPO ascent on the bandit: sample G candidates from the
// current policy, normalize rewards into advantages, take one analytic
// gradient step per group. Throws NonFiniteGradient if the update diverges.
ToyTrainTrace train_toy_policy(const ToyBanditEnv& env, const ToyTrainConfig& cfg);

}  // namespace cotc
