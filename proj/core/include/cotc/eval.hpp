#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cotc/gateway.hpp"
#include "cotc/text.hpp"
#include "cotc/types.hpp"

namespace cotc {

struct EvalRecord {
  std::string sample_id;
  std::string model_output;
  std::string predicted;
  int correct = 0;
  int cot_len = 0;         // tokens of the reasoning portion before the boxed answer
  std::string flag;        // "", "no_answer", "endpoint_error"
};

// One completion per sample (seed 0, greedy). Per-sample failures are
// recorded as incorrect with a flag; only total endpoint unavailability
// propagates.
std::vector<EvalRecord> run_benchmark(Gateway& gateway, const std::string& endpoint,
                                      const std::vector<Sample>& dataset,
                                      const TemplateStore& store,
                                      const TokenCounter& counter = whitespace_token_counter());

struct Metrics {
  double acc_percent = 0.0;
  double avg_len = 0.0;
  std::optional<double> ratio;  // empty when accuracy is zero
};

Metrics compute_metrics(const std::vector<EvalRecord>& records);

// Final "Score: \boxed{X}" occurrence, X a single digit 1..5, with nothing
// but whitespace after the brace on that line. Throws ScoreNotFound,
// ScoreOutOfRange or TrailingText.
int parse_judge_score(std::string_view text);

struct JudgePayload {
  std::string text;      // the CoT or the explanation under evaluation
  std::string examples;  // few-shot block; may be empty
};

// Renders the judge template, queries the judge, parses the score;
// retries once on a parse failure, then raises JudgeFormatError.
int judge_score(Gateway& gateway, const std::string& judge_endpoint, JudgeKind kind,
                const JudgePayload& payload, const TemplateStore& store,
                double temperature = 0.0, int seed = 0);

}  // namespace cotc
