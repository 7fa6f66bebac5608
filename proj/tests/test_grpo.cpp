#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "cotc/errors.hpp"
#include "cotc/grpo.hpp"
#include "test_support.hpp"

using namespace cotc;

namespace {

// Two-pass mean/variance oracle, independent of the implementation.
std::vector<double> advantages_oracle(const std::vector<double>& r) {
  double mean = 0.0;
  for (double x : r) mean += x;
  mean /= r.size();
  double var = 0.0;
  for (double x : r) var += (x - mean) * (x - mean);
  var /= r.size();
  std::vector<double> a;
  for (double x : r) a.push_back((x - mean) / (std::sqrt(var) + 1e-8));
  return a;
}

ToyBatch random_batch(std::mt19937_64& rng, int k, int g, double beta) {
  ToyBatch batch;
  batch.clip_eps = 0.2;
  batch.kl_beta = beta;
  std::vector<double> rewards(g);
  for (int i = 0; i < g; ++i) {
    batch.actions.push_back(test::uniform_int(rng, 0, k - 1));
    rewards[i] = test::uniform01(rng) * 4.0 - 1.0;
    batch.old_logprobs.push_back(std::log(0.05 + 0.9 * test::uniform01(rng)));
  }
  batch.advantages = group_advantages(rewards);
  double z = 0.0;
  batch.ref_probs.resize(k);
  for (auto& q : batch.ref_probs) {
    q = 0.1 + test::uniform01(rng);
    z += q;
  }
  for (auto& q : batch.ref_probs) q /= z;
  return batch;
}

std::vector<double> random_logits(std::mt19937_64& rng, int k) {
  std::vector<double> z(k);
  for (auto& v : z) v = 2.0 * test::uniform01(rng) - 1.0;
  return z;
}

// A configuration sits on a clip kink when some member's ratio lands within
// margin of 1 +/- eps (or of the min tie); finite differences are only
// trustworthy away from those points.
bool near_kink(const std::vector<double>& logits, const ToyBatch& batch, double margin) {
  ToyPolicy p{logits};
  auto lp = p.logprobs();
  for (std::size_t i = 0; i < batch.actions.size(); ++i) {
    double ratio = std::exp(lp[batch.actions[i]] - batch.old_logprobs[i]);
    if (std::abs(ratio - (1.0 - batch.clip_eps)) < margin) return true;
    if (std::abs(ratio - (1.0 + batch.clip_eps)) < margin) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("group advantages spec examples") {
  auto a = group_advantages({1.0, 2.0, 3.0});
  double expected = 1.0 / (std::sqrt(2.0 / 3.0) + 1e-8);
  CHECK(a[0] == doctest::Approx(-expected).epsilon(1e-9));
  CHECK(a[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(a[2] == doctest::Approx(expected).epsilon(1e-9));
  CHECK(expected == doctest::Approx(1.224744871).epsilon(1e-7));

  CHECK(group_advantages({5.0, 5.0, 5.0, 5.0}) == std::vector<double>{0.0, 0.0, 0.0, 0.0});

  auto b = group_advantages({0.0, 1.0});
  CHECK(b[0] == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(b[1] == doctest::Approx(1.0).epsilon(1e-7));

  CHECK_THROWS_AS(group_advantages({1.0}), GroupTooSmall);
}

TEST_CASE("group advantages match the two-pass oracle and normalize") {
  std::mt19937_64 rng(101);
  for (int run = 0; run < 200; ++run) {
    int g = test::uniform_int(rng, 2, 16);
    std::vector<double> rewards(g);
    for (auto& r : rewards) r = 5.0 * test::uniform01(rng) - 2.0;
    auto adv = group_advantages(rewards);
    auto oracle = advantages_oracle(rewards);

    double mean = 0.0;
    double var = 0.0;
    bool constant = true;
    for (int i = 0; i < g; ++i) {
      CHECK(adv[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
      mean += adv[i];
      constant = constant && rewards[i] == rewards[0];
    }
    mean /= g;
    CHECK(std::abs(mean) < 1e-9);
    if (!constant) {
      for (double a : adv) var += (a - mean) * (a - mean);
      var /= g;
      CHECK(var == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("clipped surrogate spec examples and pessimism") {
  CHECK(clipped_surrogate(1.5, 1.0, 0.2) == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(clipped_surrogate(0.5, -1.0, 0.2) == doctest::Approx(-0.8).epsilon(1e-12));
  CHECK(clipped_surrogate(1.0, 0.37, 0.3) == doctest::Approx(0.37).epsilon(1e-12));

  std::mt19937_64 rng(103);
  for (int i = 0; i < 500; ++i) {
    double ratio = 0.01 + 3.0 * test::uniform01(rng);
    double adv = 4.0 * test::uniform01(rng) - 2.0;
    double eps = 0.05 + 0.4 * test::uniform01(rng);
    double s = clipped_surrogate(ratio, adv, eps);
    CHECK(s <= ratio * adv + 1e-12);
    if (std::abs(ratio - 1.0) <= eps) CHECK(s == doctest::Approx(ratio * adv).epsilon(1e-12));
  }
}

TEST_CASE("kl divergence spec examples") {
  std::vector<double> p = {0.5, 0.5};
  CHECK(kl_divergence(p, p) == 0.0);

  std::vector<double> q = {0.9, 0.1};
  double expected = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
  CHECK(kl_divergence(p, q) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.51082562376).epsilon(1e-9));

  std::vector<double> point = {1.0, 0.0};
  std::vector<double> half = {0.5, 0.5};
  CHECK(kl_divergence(point, half) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(kl_divergence(half, point), DomainError);
}

TEST_CASE("grpo objective spec examples") {
  SUBCASE("identity ratios reduce to the advantage mean, which is zero") {
    GroupRollout group;
    group.rewards = {1.0, 2.0, 3.0};
    group.advantages = group_advantages(group.rewards);
    group.new_logprobs = {-1.0, -2.0, -0.5};
    group.old_logprobs = group.new_logprobs;
    group.kl_beta = 0.0;
    CHECK(grpo_objective(group) == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("clipped dominant member matches the hand-rolled sum") {
    GroupRollout group;
    group.rewards = {0.0, 0.0, 3.0};
    group.advantages = group_advantages(group.rewards);
    double r = std::log(1.5);
    group.old_logprobs = {-1.0, -1.0, -1.0};
    group.new_logprobs = {-1.0 + r, -1.0 + r, -1.0 + r};
    group.clip_eps = 0.2;
    group.kl_beta = 0.0;

    // spreadsheet-style: A = [-1,-1,2]/(sqrt(2)+1e-8); negatives keep ratio
    // 1.5, the positive clips to 1.2.
    double denom = std::sqrt(2.0) + 1e-8;
    double expected = (1.5 * (-1.0 / denom) + 1.5 * (-1.0 / denom) + 1.2 * (2.0 / denom)) / 3.0;
    CHECK(grpo_objective(group) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(-0.2 / denom).epsilon(1e-12));
  }

  SUBCASE("identical policy and reference contribute zero KL") {
    GroupRollout group;
    group.rewards = {1.0, 0.0};
    group.advantages = group_advantages(group.rewards);
    group.new_logprobs = {-0.7, -0.7};
    group.old_logprobs = {-0.7, -0.7};
    group.kl_beta = 0.04;
    group.policy_probs = {0.25, 0.75};
    group.ref_probs = {0.25, 0.75};
    CHECK(grpo_objective(group) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("grpo objective is invariant under constant reward shifts") {
  std::mt19937_64 rng(107);
  for (int run = 0; run < 50; ++run) {
    int g = test::uniform_int(rng, 2, 8);
    std::vector<double> rewards(g), shifted(g), old_lp(g), new_lp(g);
    double shift = 10.0 * test::uniform01(rng) - 5.0;
    for (int i = 0; i < g; ++i) {
      rewards[i] = 3.0 * test::uniform01(rng);
      shifted[i] = rewards[i] + shift;
      old_lp[i] = std::log(0.05 + 0.9 * test::uniform01(rng));
      new_lp[i] = std::log(0.05 + 0.9 * test::uniform01(rng));
    }
    GroupRollout a;
    a.rewards = rewards;
    a.advantages = group_advantages(rewards);
    a.new_logprobs = new_lp;
    a.old_logprobs = old_lp;
    a.kl_beta = 0.0;
    GroupRollout b = a;
    b.rewards = shifted;
    b.advantages = group_advantages(shifted);
    CHECK(grpo_objective(a) == doctest::Approx(grpo_objective(b)).epsilon(1e-9));
  }
}

TEST_CASE("analytic toy gradient matches central finite differences") {
  std::mt19937_64 rng(109);
  const double h = 1e-5;
  int tested = 0;
  while (tested < 50) {
    int k = test::uniform_int(rng, 3, 6);
    int g = test::uniform_int(rng, 4, 10);
    double beta = tested % 2 == 0 ? 0.04 : 0.0;
    auto batch = random_batch(rng, k, g, beta);
    auto logits = random_logits(rng, k);
    if (near_kink(logits, batch, 1e-3)) continue;
    ++tested;

    auto grad = toy_objective_gradient(logits, batch);
    for (int j = 0; j < k; ++j) {
      auto plus = logits;
      auto minus = logits;
      plus[j] += h;
      minus[j] -= h;
      double fd = (toy_objective(plus, batch) - toy_objective(minus, batch)) / (2.0 * h);
      double scale = std::max({1.0, std::abs(fd), std::abs(grad[j])});
      CAPTURE(tested);
      CAPTURE(j);
      CHECK(std::abs(grad[j] - fd) / scale <= 1e-5);
    }
  }
}

TEST_CASE("toy training makes the best candidate dominant") {
  ToyBanditEnv env;
  env.sample = test::make_sample();
  env.candidate_rewards = {3.2, 2.0, 1.4, -0.5};

  ToyTrainConfig cfg;
  cfg.kl_beta = 0.0;
  cfg.steps = 500;
  cfg.seed = 0;
  auto trace = train_toy_policy(env, cfg);

  CHECK(env.best_index() == 0);
  CHECK(trace.steps.back().top_prob > 0.9);

  // Probability of the best candidate is strictly increasing over the first
  // hundred steps of this pinned run.
  for (int i = 1; i < 100; ++i) {
    CHECK(trace.steps[i].top_prob > trace.steps[i - 1].top_prob);
  }
}

TEST_CASE("toy training is deterministic given the seed") {
  ToyBanditEnv env;
  env.sample = test::make_sample();
  env.candidate_rewards = {1.0, 2.5, 0.0};
  ToyTrainConfig cfg;
  cfg.steps = 50;
  cfg.seed = 42;
  auto a = train_toy_policy(env, cfg);
  auto b = train_toy_policy(env, cfg);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].mean_reward == b.steps[i].mean_reward);
    CHECK(a.steps[i].objective == b.steps[i].objective);
    CHECK(a.steps[i].top_prob == b.steps[i].top_prob);
  }
  CHECK(a.final_policy.logits == b.final_policy.logits);
}

TEST_CASE("a large KL weight pins the policy to the uniform reference") {
  ToyBanditEnv env;
  env.sample = test::make_sample();
  env.candidate_rewards = {3.0, 1.0, 0.5, 0.2};
  env.initial_logits = {1.0, 0.5, 0.0, -0.5};

  ToyTrainConfig cfg;
  cfg.kl_beta = 10.0;
  cfg.learning_rate = 0.01;
  cfg.steps = 2000;
  cfg.seed = 1;
  auto trace = train_toy_policy(env, cfg);

  auto probs = trace.final_policy.probs();
  double tv = 0.0;
  for (double p : probs) tv += std::abs(p - 0.25);
  tv /= 2.0;
  CHECK(tv < 0.05);
}

TEST_CASE("poisoned logits raise NonFiniteGradient instead of diverging silently") {
  ToyBanditEnv env;
  env.sample = test::make_sample();
  env.candidate_rewards = {1.0, 2.0, 0.5};
  env.initial_logits = {std::numeric_limits<double>::infinity(), 0.0, 0.0};
  ToyTrainConfig cfg;
  cfg.steps = 5;
  CHECK_THROWS_AS(train_toy_policy(env, cfg), NonFiniteGradient);
}

TEST_CASE("grpo objective rejects undersized groups") {
  GroupRollout lonely;
  lonely.rewards = {1.0};
  lonely.advantages = {0.0};
  lonely.new_logprobs = {-1.0};
  lonely.old_logprobs = {-1.0};
  CHECK_THROWS_AS(grpo_objective(lonely), GroupTooSmall);
}

TEST_CASE("toy policy probabilities form a simplex") {
  ToyPolicy p{{0.3, -1.2, 2.0, 0.0}};
  auto probs = p.probs();
  double sum = 0.0;
  for (double v : probs) {
    CHECK(v > 0.0);
    sum += v;
  }
  CHECK(std::abs(sum - 1.0) < 1e-12);
}
