#include "cotc/toy_fixture.hpp"

#include "cotc/gateway.hpp"
#include "cotc/grammar.hpp"
#include "cotc/mocks.hpp"
#include "cotc/reward.hpp"

namespace cotc {

namespace {

std::string filler(int tokens) {
  std::string s;
  for (int i = 0; i < tokens; ++i) {
    if (i > 0) s += ' ';
    s += "step" + std::to_string(i % 7);
  }
  return s;
}

std::string tagged(const std::string& refinement, const std::string& answer) {
  return "<think>\nOkay, let's check these provided CoTs: the duplicates were merged and the "
         "tangents dropped.\n</think>\n<refinement>\n" +
         refinement + "\n</refinement>\n<answer>\\boxed{" + answer + "}</answer>";
}

}  // namespace

ToyBanditEnv standard_toy_bandit(const TemplateStore& store, bool ablate_step_reward, double eta) {
  ToyBanditEnv env;
  env.sample.id = "bandit-s1";
  env.sample.question = "Solve 2x + 4 = 10. What is x? Choices: A. 3  B. 4  C. 5";
  env.sample.answer = "A";
  env.sample.source = Source::Geo170k;

  TrajectorySet inputs;
  inputs.sample_id = env.sample.id;
  inputs.m_models = 2;
  inputs.k_samples = 1;
  for (int len : {100, 120}) {
    Trajectory t;
    t.model_id = "gen-" + std::to_string(len);
    t.seed = 0;
    t.text = filler(len);
    t.length_tokens = len;
    inputs.trajectories.push_back(std::move(t));
  }

  // Candidate outputs. The verifier below answers correctly on two seeds
  // once "2x = 6" is in the prefix and on all three once "x = 3" is.
  std::string balanced =
      "Given 2x + 4 = 10, subtract 4 from both sides to get 2x = 6, keeping the variable on the "
      "left side of the equation as written.\n\nDivide by 2: x = 3, so the answer is A.";
  std::string terse = "The final answer is choice A.";
  std::string verbose = filler(104) + " 2x = 6.\n\nDivide by 2: x = 3, the answer is A.";

  env.candidate_raw_outputs = {
      tagged(balanced, "A"),
      tagged(terse, "A"),
      tagged(verbose, "A"),
      "I think the refinement is <refinement>unclosed and the tags are wrong " + filler(30),
  };
  env.candidate_names = {"balanced", "terse", "verbose", "malformed"};

  Gateway gateway;
  VerifierRule rule;
  rule.question_contains = "2x + 4 = 10";
  rule.answer = env.sample.answer;
  rule.keys = {{.contains = "2x = 6", .seeds = {0, 1}}, {.contains = "x = 3", .seeds = {0, 1, 2}}};
  gateway.register_endpoint(make_rule_verifier_endpoint("bandit-verifier", {rule}));
  Verifier verifier(gateway, "bandit-verifier", store);

  ScoreConfig cfg;
  cfg.length.eta = eta;
  cfg.ablate_step_reward = ablate_step_reward;
  for (const auto& raw : env.candidate_raw_outputs) {
    auto output = parse_output(raw);
    auto score = score_output(env.sample, output, inputs, &verifier, cfg);
    env.candidate_rewards.push_back(score.breakdown.r_overall);
  }
  return env;
}

}  // namespace cotc
