#pragma once

#include "cotc/grpo.hpp"
#include "cotc/templates.hpp"

namespace cotc {

// The standard desk bandit: one algebra sample with four candidate
// compressor outputs (a balanced compression, a terse one whose sole segment
// carries nothing the verifier can use, an over-long one, and a malformed
// one), each scored by the reward engine against an in-process rule-based
// verifier. Under the full reward the balanced candidate wins; with the step
// term ablated the terse-but-unverifiable one takes over.
ToyBanditEnv standard_toy_bandit(const TemplateStore& store, bool ablate_step_reward = false,
                                 double eta = 0.15);

}  // namespace cotc
