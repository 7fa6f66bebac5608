#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cotc/text.hpp"
#include "cotc/types.hpp"

namespace cotc {

struct LengthPenaltyConfig {
  double eta = 0.15;  // penalty threshold, must lie in (0,1)
};

// Full audit trail of the step-wise criticality reward. prefix_accuracies
// has L+1 entries, index 0 being the empty prefix; every accuracy is a mean
// over three verifier seeds and hence a multiple of 1/3.
struct StepRewardTrace {
  std::vector<double> prefix_accuracies;
  std::vector<int> gains;  // one 0/1 entry per segment
  double r_step = 0.0;

  std::size_t segment_count() const { return gains.size(); }
};

// Anything that can answer "how often does the verifier solve this sample
// given this reasoning prefix". The gateway-backed client queries a live or
// mock endpoint over three fixed seeds; tests use table-driven stand-ins.
class VerifierClient {
 public:
  virtual ~VerifierClient() = default;
  virtual double estimate_accuracy(const Sample& sample, std::string_view cot_prefix) = 0;
};

// Prefix accuracies repeat across sibling rollouts of one sample, so a
// scoring batch shares this cache keyed by (sample id, prefix hash).
class CachedVerifier : public VerifierClient {
 public:
  explicit CachedVerifier(VerifierClient& inner) : inner_(inner) {}
  double estimate_accuracy(const Sample& sample, std::string_view cot_prefix) override;
  std::size_t hits() const { return hits_; }

 private:
  VerifierClient& inner_;
  std::unordered_map<std::string, double> cache_;
  std::mutex mu_;
  std::size_t hits_ = 0;
};

int format_reward(const CompressorOutput& output);

int outcome_reward(std::string_view predicted, std::string_view truth);

// Step-wise criticality: mean accuracy gain indicator plus mean prefix
// accuracy over segments. Prefixes for different l are queried concurrently
// but the reduction is order-independent.
StepRewardTrace step_reward(const Sample& sample, const std::vector<std::string>& segments,
                            VerifierClient& verifier, std::string_view delimiter = "\n\n");

// Piecewise length penalty on the compression ratio rho = compressed/min:
// 0 below eta, -rho in [eta,1), -2*rho from 1 up.
double length_reward(int compressed_len, int min_input_len, const LengthPenaltyConfig& cfg);

// r_overall = r_fmt + r_acc + r_step + r_len. With ablate_step the step term
// is zeroed (the "w/o R_step" configuration); the identity still holds.
RewardBreakdown overall_reward(int fmt, int acc, const StepRewardTrace& step_trace, double len_r,
                               bool ablate_step = false);

// ── batch scoring ─────────────────────────────────────────────

struct ScoreConfig {
  LengthPenaltyConfig length;
  bool ablate_step_reward = false;
  TokenCounter counter = whitespace_token_counter();
};

struct OutputScore {
  RewardBreakdown breakdown;
  StepRewardTrace trace;
  bool degraded = false;      // malformed output scored from best-effort fields
  bool step_scored = false;   // false when no verifier was supplied
  double rho = 0.0;
  int compressed_len = 0;
  int min_input_len = 0;
};

// Scores one compressor output against its sample and input trajectory set.
// Malformed outputs are still scored from best-effort fields when segments
// were recoverable; otherwise they get (0, 0, -2*rho_cap) with rho_cap the
// full-output length ratio, so malformed text is never rewarded.
// `verifier` may be null, in which case the step term is skipped.
OutputScore score_output(const Sample& sample, const CompressorOutput& output,
                         const TrajectorySet& inputs, VerifierClient* verifier,
                         const ScoreConfig& cfg);

}  // namespace cotc
