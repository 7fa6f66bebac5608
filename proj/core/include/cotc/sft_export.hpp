#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cotc/gateway.hpp"
#include "cotc/grammar.hpp"
#include "cotc/reward.hpp"
#include "cotc/types.hpp"

namespace cotc {

struct SftRecord {
  Sample sample;
  std::vector<std::string> segments;
  std::string predicted_answer;
  RewardBreakdown reward;
};

struct RejectRecord {
  std::string sample_id;
  std::string reason;  // "format_invalid", "outcome_mismatch", "endpoint_error", ...
  std::string raw_text;
};

// Audit entry for the batch score report: every parsed output gets one,
// accepted or not, with the full breakdown and step trace.
struct ScoreReportEntry {
  std::string sample_id;
  bool accepted = false;
  std::string reject_reason;
  OutputScore score;
};

struct CompressResult {
  std::vector<SftRecord> accepted;
  std::vector<RejectRecord> rejects;
  std::vector<ScoreReportEntry> scores;  // input order, one per parsed output

  std::size_t processed() const { return accepted.size() + rejects.size(); }
};

// Applies the compressor endpoint to every D_com sample that has a
// trajectory set: renders the compressor prompt, parses the emission, scores
// it, and routes malformed or answer-mismatched outputs to the rejects.
// Per-sample endpoint failures become rejects too; the batch never aborts.
CompressResult compress_dataset(const std::vector<Sample>& d_com,
                                const std::map<std::string, TrajectorySet>& sets,
                                const std::string& compressor_endpoint, Gateway& gateway,
                                const TemplateStore& store, const OutputGrammar& grammar,
                                VerifierClient* verifier, const ScoreConfig& score_cfg);

// SFT target: segments joined by the two-newline delimiter, then the boxed
// answer on its own line.
std::string sft_target(const SftRecord& record);

// Instruction-tuning file: one {id, question, image_ref, target} object per
// line, ordered by id so re-exports are byte-identical.
void export_sft_records(std::vector<SftRecord> records, const std::filesystem::path& path);

void write_rejects(const std::vector<RejectRecord>& rejects, const std::filesystem::path& path);

// Batch score report: one JSON object per scored output with the reward
// breakdown and the step trace (prefix accuracies and gains).
void write_score_report(const std::vector<ScoreReportEntry>& entries,
                        const std::filesystem::path& path);

// Intermediate compressed-record file produced by the compress stage and
// consumed by export-sft / stats.
void write_compressed_records(const std::vector<SftRecord>& records,
                              const std::filesystem::path& path);
std::vector<SftRecord> read_compressed_records(const std::filesystem::path& path);

struct DatasetStats {
  std::size_t count = 0;
  double mean_len = 0.0;
  double std_len = 0.0;  // population standard deviation
};

DatasetStats dataset_stats(const std::vector<SftRecord>& records,
                           const TokenCounter& counter = whitespace_token_counter());

}  // namespace cotc
