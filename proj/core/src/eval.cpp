#include "cotc/eval.hpp"

#include <cctype>

#include "cotc/errors.hpp"
#include "cotc/parallel.hpp"

namespace cotc {

namespace {

// Reasoning portion: everything before the last well-balanced boxed group.
int reasoning_tokens(std::string_view output, const TokenCounter& counter) {
  constexpr std::string_view kMarker = "\\boxed{";
  std::size_t last_ok = std::string_view::npos;
  std::size_t pos = 0;
  while ((pos = output.find(kMarker, pos)) != std::string_view::npos) {
    int depth = 1;
    std::size_t i = pos + kMarker.size();
    for (; i < output.size(); ++i) {
      if (output[i] == '{') ++depth;
      else if (output[i] == '}' && --depth == 0) break;
    }
    if (depth == 0) last_ok = pos;
    pos += kMarker.size();
  }
  if (last_ok == std::string_view::npos) return counter(output);
  return counter(output.substr(0, last_ok));
}

}  // namespace

std::vector<EvalRecord> run_benchmark(Gateway& gateway, const std::string& endpoint,
                                      const std::vector<Sample>& dataset,
                                      const TemplateStore& store, const TokenCounter& counter) {
  if (!gateway.has_endpoint(endpoint)) throw UnknownEndpoint(endpoint);
  std::vector<EvalRecord> records(dataset.size());
  parallel_for_index(dataset.size(), default_worker_count(dataset.size()), [&](std::size_t i) {
    const Sample& sample = dataset[i];
    EvalRecord& rec = records[i];
    rec.sample_id = sample.id;
    try {
      CompletionRequest req;
      req.endpoint_id = endpoint;
      req.prompt = render_benchmark_prompt(sample, store);
      req.seed = 0;
      req.temperature = 0.0;
      req.max_tokens = 4096;
      req.image_ref = sample.image_ref;
      rec.model_output = gateway.complete(req);
      rec.cot_len = reasoning_tokens(rec.model_output, counter);
      if (auto boxed = try_extract_boxed(rec.model_output)) {
        rec.predicted = normalize_answer(*boxed);
        rec.correct = answers_match(rec.predicted, sample.answer) ? 1 : 0;
      } else {
        rec.flag = "no_answer";
      }
    } catch (const Error& e) {
      rec.flag = "endpoint_error";
      rec.model_output = e.what();
    }
  });
  return records;
}

Metrics compute_metrics(const std::vector<EvalRecord>& records) {
  if (records.empty()) throw DegenerateInput("metrics need at least one record");
  Metrics m;
  double correct = 0.0;
  double len = 0.0;
  for (const auto& r : records) {
    correct += r.correct;
    len += r.cot_len;
  }
  m.acc_percent = 100.0 * correct / static_cast<double>(records.size());
  m.avg_len = len / static_cast<double>(records.size());
  if (m.acc_percent > 0.0) m.ratio = m.avg_len / m.acc_percent;
  return m;
}

int parse_judge_score(std::string_view text) {
  constexpr std::string_view kPattern = "Score: \\boxed{";
  std::size_t last = std::string_view::npos;
  std::size_t pos = 0;
  while ((pos = text.find(kPattern, pos)) != std::string_view::npos) {
    last = pos;
    pos += kPattern.size();
  }
  if (last == std::string_view::npos) throw ScoreNotFound();

  std::size_t digit_at = last + kPattern.size();
  if (digit_at >= text.size() || !std::isdigit(static_cast<unsigned char>(text[digit_at])) ||
      digit_at + 1 >= text.size() || text[digit_at + 1] != '}') {
    throw ScoreNotFound();
  }
  int score = text[digit_at] - '0';
  if (score < 1 || score > 5) throw ScoreOutOfRange(score);

  // The prompt's strictness clause: nothing may follow the closing brace on
  // that line.
  for (std::size_t i = digit_at + 2; i < text.size() && text[i] != '\n'; ++i) {
    if (!std::isspace(static_cast<unsigned char>(text[i]))) throw TrailingText();
  }
  return score;
}

int judge_score(Gateway& gateway, const std::string& judge_endpoint, JudgeKind kind,
                const JudgePayload& payload, const TemplateStore& store, double temperature,
                int seed) {
  CompletionRequest req;
  req.endpoint_id = judge_endpoint;
  req.prompt = render_judge_prompt(kind, payload.text, payload.examples, store);
  req.temperature = temperature;
  req.max_tokens = 1024;

  std::string last_error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    req.seed = seed + attempt;  // the retry re-rolls the judge
    std::string text = gateway.complete(req);
    try {
      return parse_judge_score(text);
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  throw JudgeFormatError("judge output unparseable after retry: " + last_error);
}

}  // namespace cotc
