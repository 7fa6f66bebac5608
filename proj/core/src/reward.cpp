#include "cotc/reward.hpp"

#include <future>

#include "cotc/errors.hpp"
#include "cotc/templates.hpp"

namespace cotc {

double CachedVerifier::estimate_accuracy(const Sample& sample, std::string_view cot_prefix) {
  std::string key = sample.id + "#" + fnv1a64_hex(cot_prefix);
  {
    std::lock_guard lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      ++hits_;
      return it->second;
    }
  }
  double acc = inner_.estimate_accuracy(sample, cot_prefix);
  std::lock_guard lock(mu_);
  cache_.emplace(std::move(key), acc);
  return acc;
}

int format_reward(const CompressorOutput& output) {
  return output.format_valid ? 1 : 0;
}

int outcome_reward(std::string_view predicted, std::string_view truth) {
  return answers_match(predicted, truth) ? 1 : 0;
}

StepRewardTrace step_reward(const Sample& sample, const std::vector<std::string>& segments,
                            VerifierClient& verifier, std::string_view delimiter) {
  if (segments.empty()) throw EmptySegments();
  const std::size_t L = segments.size();

  std::vector<std::string> prefixes(L + 1);
  for (std::size_t l = 1; l <= L; ++l) {
    prefixes[l] = prefixes[l - 1];
    if (l > 1) prefixes[l] += delimiter;
    prefixes[l] += segments[l - 1];
  }

  std::vector<std::future<double>> pending;
  pending.reserve(L + 1);
  for (std::size_t l = 0; l <= L; ++l) {
    pending.push_back(std::async(std::launch::async, [&verifier, &sample, &prefixes, l] {
      return verifier.estimate_accuracy(sample, prefixes[l]);
    }));
  }

  StepRewardTrace trace;
  trace.prefix_accuracies.resize(L + 1);
  for (std::size_t l = 0; l <= L; ++l) trace.prefix_accuracies[l] = pending[l].get();

  double gain_sum = 0.0;
  double acc_sum = 0.0;
  trace.gains.resize(L);
  for (std::size_t l = 1; l <= L; ++l) {
    int gain = trace.prefix_accuracies[l] > trace.prefix_accuracies[l - 1] ? 1 : 0;
    trace.gains[l - 1] = gain;
    gain_sum += gain;
    acc_sum += trace.prefix_accuracies[l];
  }
  trace.r_step = gain_sum / static_cast<double>(L) + acc_sum / static_cast<double>(L);
  return trace;
}

double length_reward(int compressed_len, int min_input_len, const LengthPenaltyConfig& cfg) {
  if (min_input_len <= 0) throw DegenerateInput("min input length must be positive");
  double rho = static_cast<double>(compressed_len) / static_cast<double>(min_input_len);
  if (rho < cfg.eta) return 0.0;
  if (rho < 1.0) return -rho;
  return -2.0 * rho;
}

RewardBreakdown overall_reward(int fmt, int acc, const StepRewardTrace& step_trace, double len_r,
                               bool ablate_step) {
  RewardBreakdown r;
  r.r_fmt = fmt;
  r.r_acc = acc;
  r.r_step = ablate_step ? 0.0 : step_trace.r_step;
  r.r_len = len_r;
  r.r_overall = r.r_fmt + r.r_acc + r.r_step + r.r_len;
  return r;
}

OutputScore score_output(const Sample& sample, const CompressorOutput& output,
                         const TrajectorySet& inputs, VerifierClient* verifier,
                         const ScoreConfig& cfg) {
  OutputScore score;
  score.min_input_len = inputs.min_input_tokens();

  int fmt = format_reward(output);
  score.degraded = fmt == 0;

  if (output.segments.empty()) {
    // Nothing recoverable: penalize by the full emission's length ratio.
    score.compressed_len = cfg.counter(output.raw_text);
    if (score.min_input_len > 0) {
      score.rho = static_cast<double>(score.compressed_len) / score.min_input_len;
    }
    score.breakdown = overall_reward(fmt, 0, StepRewardTrace{}, -2.0 * score.rho, false);
    return score;
  }

  std::string body;
  for (std::size_t i = 0; i < output.segments.size(); ++i) {
    if (i > 0) body += "\n\n";
    body += output.segments[i];
  }
  score.compressed_len = cfg.counter(body);
  double len_r = length_reward(score.compressed_len, score.min_input_len, cfg.length);
  score.rho = static_cast<double>(score.compressed_len) / score.min_input_len;

  int acc = outcome_reward(output.predicted_answer, sample.answer);

  StepRewardTrace trace;
  if (verifier != nullptr) {
    trace = step_reward(sample, output.segments, *verifier);
    score.step_scored = true;
  }
  score.trace = trace;
  score.breakdown = overall_reward(fmt, acc, trace, len_r, cfg.ablate_step_reward);
  return score;
}

}  // namespace cotc
