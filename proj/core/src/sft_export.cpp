#include "cotc/sft_export.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "cotc/errors.hpp"
#include "cotc/parallel.hpp"
#include "cotc/text.hpp"

namespace cotc {

namespace {

// Per-sample outcome computed by one worker; folded in input order.
struct CompressSlot {
  bool accepted = false;
  bool scored = false;
  std::string reject_reason;
  std::string reject_payload;
  SftRecord record;
  OutputScore score;
};

}  // namespace

CompressResult compress_dataset(const std::vector<Sample>& d_com,
                                const std::map<std::string, TrajectorySet>& sets,
                                const std::string& compressor_endpoint, Gateway& gateway,
                                const TemplateStore& store, const OutputGrammar& grammar,
                                VerifierClient* verifier, const ScoreConfig& score_cfg) {
  std::vector<CompressSlot> slots(d_com.size());

  parallel_for_index(d_com.size(), default_worker_count(d_com.size()), [&](std::size_t i) {
    const Sample& sample = d_com[i];
    CompressSlot& slot = slots[i];

    auto it = sets.find(sample.id);
    if (it == sets.end() || it->second.trajectories.empty()) {
      slot.reject_reason = "no_trajectories";
      return;
    }
    const TrajectorySet& set = it->second;

    std::string raw;
    try {
      CompletionRequest req;
      req.endpoint_id = compressor_endpoint;
      req.prompt = render_compressor_prompt(sample, set, store);
      req.seed = 0;
      req.temperature = 0.0;
      req.max_tokens = 4096;
      req.image_ref = sample.image_ref;
      raw = gateway.complete(req);
    } catch (const Error& e) {
      slot.reject_reason = "endpoint_error";
      slot.reject_payload = e.what();
      return;
    }

    CompressorOutput output = parse_output(raw, grammar);
    slot.score = score_output(sample, output, set, verifier, score_cfg);
    slot.scored = true;
    if (!output.format_valid) {
      slot.reject_reason = "format_invalid";
      slot.reject_payload = raw;
      return;
    }
    if (!answers_match(output.predicted_answer, sample.answer)) {
      slot.reject_reason = "outcome_mismatch";
      slot.reject_payload = raw;
      return;
    }

    slot.accepted = true;
    slot.record.sample = sample;
    slot.record.segments = output.segments;
    slot.record.predicted_answer = output.predicted_answer;
    slot.record.reward = slot.score.breakdown;
  });

  CompressResult result;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    CompressSlot& slot = slots[i];
    if (slot.accepted) {
      result.accepted.push_back(std::move(slot.record));
    } else {
      result.rejects.push_back({d_com[i].id, slot.reject_reason, std::move(slot.reject_payload)});
    }
    if (slot.scored) {
      result.scores.push_back(
          {d_com[i].id, slot.accepted, slot.accepted ? "" : slot.reject_reason, slot.score});
    }
  }
  return result;
}

std::string sft_target(const SftRecord& record) {
  std::string target;
  for (std::size_t i = 0; i < record.segments.size(); ++i) {
    if (i > 0) target += "\n\n";
    target += record.segments[i];
  }
  target += "\n\\boxed{" + record.predicted_answer + "}";
  return target;
}

void export_sft_records(std::vector<SftRecord> records, const std::filesystem::path& path) {
  std::sort(records.begin(), records.end(),
            [](const SftRecord& a, const SftRecord& b) { return a.sample.id < b.sample.id; });
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& rec : records) {
    nlohmann::json j;
    j["id"] = rec.sample.id;
    j["question"] = rec.sample.question;
    j["image_ref"] = rec.sample.image_ref ? nlohmann::json(*rec.sample.image_ref)
                                          : nlohmann::json(nullptr);
    j["target"] = sft_target(rec);
    out << j.dump() << "\n";
  }
}

void write_rejects(const std::vector<RejectRecord>& rejects, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : rejects) {
    nlohmann::json j;
    j["sample_id"] = r.sample_id;
    j["reason"] = r.reason;
    j["raw_text"] = r.raw_text;
    out << j.dump() << "\n";
  }
}

void write_score_report(const std::vector<ScoreReportEntry>& entries,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& e : entries) {
    nlohmann::json j;
    j["sample_id"] = e.sample_id;
    j["accepted"] = e.accepted;
    if (!e.accepted) j["reject_reason"] = e.reject_reason;
    j["reward"] = {{"r_fmt", e.score.breakdown.r_fmt},
                   {"r_acc", e.score.breakdown.r_acc},
                   {"r_step", e.score.breakdown.r_step},
                   {"r_len", e.score.breakdown.r_len},
                   {"r_overall", e.score.breakdown.r_overall}};
    j["trace"] = {{"prefix_accuracies", e.score.trace.prefix_accuracies},
                  {"gains", e.score.trace.gains}};
    j["degraded"] = e.score.degraded;
    j["step_scored"] = e.score.step_scored;
    j["rho"] = e.score.rho;
    j["compressed_len"] = e.score.compressed_len;
    j["min_input_len"] = e.score.min_input_len;
    out << j.dump() << "\n";
  }
}

void write_compressed_records(const std::vector<SftRecord>& records,
                              const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& rec : records) {
    nlohmann::json j;
    j["id"] = rec.sample.id;
    j["question"] = rec.sample.question;
    j["image_ref"] = rec.sample.image_ref ? nlohmann::json(*rec.sample.image_ref)
                                          : nlohmann::json(nullptr);
    j["answer"] = rec.sample.answer;
    j["source"] = to_string(rec.sample.source);
    j["segments"] = rec.segments;
    j["predicted_answer"] = rec.predicted_answer;
    j["reward"] = {{"r_fmt", rec.reward.r_fmt},
                   {"r_acc", rec.reward.r_acc},
                   {"r_step", rec.reward.r_step},
                   {"r_len", rec.reward.r_len},
                   {"r_overall", rec.reward.r_overall}};
    out << j.dump() << "\n";
  }
}

std::vector<SftRecord> read_compressed_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<SftRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      SftRecord rec;
      rec.sample.id = j.at("id").get<std::string>();
      rec.sample.question = j.at("question").get<std::string>();
      if (j.contains("image_ref") && !j["image_ref"].is_null()) {
        rec.sample.image_ref = j["image_ref"].get<std::string>();
      }
      rec.sample.answer = j.at("answer").get<std::string>();
      rec.sample.source = source_from_string(j.value("source", "Other"));
      rec.segments = j.at("segments").get<std::vector<std::string>>();
      rec.predicted_answer = j.at("predicted_answer").get<std::string>();
      const auto& r = j.at("reward");
      rec.reward.r_fmt = r.at("r_fmt").get<double>();
      rec.reward.r_acc = r.at("r_acc").get<double>();
      rec.reward.r_step = r.at("r_step").get<double>();
      rec.reward.r_len = r.at("r_len").get<double>();
      rec.reward.r_overall = r.at("r_overall").get<double>();
      records.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": bad record: " + e.what());
    }
  }
  return records;
}

DatasetStats dataset_stats(const std::vector<SftRecord>& records, const TokenCounter& counter) {
  DatasetStats stats;
  stats.count = records.size();
  if (records.empty()) return stats;
  std::vector<double> lens;
  lens.reserve(records.size());
  for (const auto& rec : records) lens.push_back(counter(sft_target(rec)));
  double sum = 0.0;
  for (double l : lens) sum += l;
  stats.mean_len = sum / static_cast<double>(lens.size());
  double var = 0.0;
  for (double l : lens) var += (l - stats.mean_len) * (l - stats.mean_len);
  stats.std_len = std::sqrt(var / static_cast<double>(lens.size()));
  return stats;
}

}  // namespace cotc
