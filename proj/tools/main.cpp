// cotc: chain-of-thought compression pipeline driver.
//
// Subcommands cover the full offline pipeline: synthesize -> split ->
// compress -> export-sft -> stats -> evaluate / judge / report, plus a
// one-shot reward `score` and the GRPO toy trainer. Every subcommand honors
// --dry-run, --seed, --replay-cache and --mock.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cotc/config.hpp"
#include "cotc/dataset_io.hpp"
#include "cotc/errors.hpp"
#include "cotc/eval.hpp"
#include "cotc/gateway.hpp"
#include "cotc/grammar.hpp"
#include "cotc/grpo.hpp"
#include "cotc/mocks.hpp"
#include "cotc/parallel.hpp"
#include "cotc/reward.hpp"
#include "cotc/sft_export.hpp"
#include "cotc/synthesis.hpp"
#include "cotc/templates.hpp"
#include "cotc/text.hpp"
#include "cotc/toy_fixture.hpp"
#include "cotc/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliOptions {
  std::optional<fs::path> config_file;
  std::optional<fs::path> replay_cache;
  std::optional<fs::path> mock_fixtures;
  std::optional<fs::path> prompt_dir;
  std::optional<long> budget;
  std::optional<double> eta;
  std::optional<uint64_t> seed;
  bool dry_run = false;
};

struct Runtime {
  cotc::RunConfig cfg;
  cotc::Gateway gateway;
  std::optional<cotc::TemplateStore> templates;

  const cotc::TemplateStore& store() {
    if (!templates) templates = cotc::TemplateStore::load(cfg.prompt_dir);
    return *templates;
  }
};

// Layering: config file < environment < flags.
cotc::RunConfig resolve_config(const CliOptions& opts) {
  cotc::RunConfig cfg = cotc::load_config(opts.config_file);
  cotc::apply_env_overrides(cfg);
  if (opts.replay_cache) cfg.replay_cache = *opts.replay_cache;
  if (opts.mock_fixtures) cfg.mock_fixtures = *opts.mock_fixtures;
  if (opts.prompt_dir) cfg.prompt_dir = *opts.prompt_dir;
  if (opts.budget) cfg.request_budget = *opts.budget;
  if (opts.eta) {
    if (*opts.eta <= 0.0 || *opts.eta >= 1.0) throw cotc::ConfigError("eta must lie in (0,1)");
    cfg.eta = *opts.eta;
  }
  if (opts.seed) cfg.seed = *opts.seed;
  cfg.dry_run = opts.dry_run;
  return cfg;
}

std::unique_ptr<Runtime> make_runtime(const CliOptions& opts) {
  auto rt = std::make_unique<Runtime>();
  rt->cfg = resolve_config(opts);
  for (const auto& spec : rt->cfg.endpoints) {
    rt->gateway.register_endpoint(cotc::make_http_endpoint(spec));
  }
  if (rt->cfg.mock_fixtures) {
    fs::path fixture = *rt->cfg.mock_fixtures;
    if (fs::is_directory(fixture)) fixture /= "mocks.json";
    cotc::install_mock_endpoints(rt->gateway, fixture);
  }
  if (rt->cfg.replay_cache) rt->gateway.set_replay_cache(rt->cfg.replay_cache);
  if (rt->cfg.request_budget) rt->gateway.set_request_budget(rt->cfg.request_budget);
  return rt;
}

void require_endpoint(Runtime& rt, const std::string& id) {
  if (!rt.gateway.has_endpoint(id)) {
    throw cotc::ConfigError("endpoint '" + id + "' is not registered");
  }
}

void write_json_doc(const fs::path& path, json doc, const cotc::RunConfig& cfg) {
  doc["effective_config"] = json::parse(cotc::effective_config_json(cfg));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw cotc::IoError("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

// Record files keep their exact line schema; the effective config rides in a
// sidecar instead of a header line.
void write_sidecar_meta(const fs::path& record_file, const cotc::RunConfig& cfg) {
  json doc;
  doc["for_file"] = record_file.filename().string();
  write_json_doc(record_file.string() + ".meta.json", doc, cfg);
}

void print_dry_run_plan(const std::string& stage, json detail, const cotc::RunConfig& cfg) {
  json doc;
  doc["dry_run"] = true;
  doc["stage"] = stage;
  doc["plan"] = std::move(detail);
  doc["effective_config"] = json::parse(cotc::effective_config_json(cfg));
  std::cout << doc.dump(2) << "\n";
}

cotc::VerifierClient* maybe_verifier(Runtime& rt, std::unique_ptr<cotc::Verifier>& holder,
                                     const std::string& endpoint) {
  if (endpoint.empty() || !rt.gateway.has_endpoint(endpoint)) return nullptr;
  holder = std::make_unique<cotc::Verifier>(rt.gateway, endpoint, rt.store(),
                                            rt.cfg.verifier_temperature,
                                            rt.cfg.verifier_max_tokens);
  return holder.get();
}

// ── synthesize ────────────────────────────────────────────────

int cmd_synthesize(Runtime& rt, const std::string& dataset, std::vector<std::string> generators,
                   int k, double temperature, int max_tokens, const std::string& out,
                   const std::string& manifest_out) {
  auto samples = cotc::read_samples(dataset);
  for (const auto& g : generators) require_endpoint(rt, g);

  cotc::SynthesisPlan plan;
  plan.generator_endpoints = std::move(generators);
  plan.samples_per_model = k;
  plan.decoding.temperature = temperature;
  plan.decoding.max_tokens = max_tokens;

  if (rt.cfg.dry_run) {
    print_dry_run_plan("synthesize",
                       {{"samples", samples.size()},
                        {"models", plan.generator_endpoints.size()},
                        {"k", k},
                        {"target_n", plan.generator_endpoints.size() * k}},
                       rt.cfg);
    return 0;
  }

  // Sample-level fan-out; the gateway enforces the per-endpoint bounds, and
  // the index-addressed slots keep file output in dataset order.
  std::vector<cotc::TrajectorySet> sets(samples.size());
  cotc::parallel_for_index(
      samples.size(), cotc::default_worker_count(samples.size()), [&](std::size_t i) {
        try {
          sets[i] = cotc::synthesize_trajectories(samples[i], plan, rt.gateway);
        } catch (const cotc::SynthesisIncomplete& e) {
          sets[i] = e.partial;  // keep, flagged below
        }
      });

  json sample_manifest = json::array();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& set = sets[i];
    bool any_correct = false;
    for (const auto& t : set.trajectories) {
      if (auto boxed = cotc::try_extract_boxed(t.text)) {
        any_correct = any_correct || cotc::answers_match(*boxed, samples[i].answer);
      }
    }
    sample_manifest.push_back({{"sample_id", samples[i].id},
                               {"obtained", set.obtained()},
                               {"expected", set.expected()},
                               {"complete", set.complete()},
                               {"any_generator_correct", any_correct}});
  }

  cotc::write_trajectories(sets, out);
  write_sidecar_meta(out, rt.cfg);
  if (!manifest_out.empty()) {
    write_json_doc(manifest_out, {{"samples", sample_manifest}}, rt.cfg);
  }
  std::cout << "synthesized " << sets.size() << " trajectory sets -> " << out << "\n";
  return 0;
}

// ── split ─────────────────────────────────────────────────────

int cmd_split(Runtime& rt, const std::string& dataset, int n_train, int n_com,
              const std::string& out_train, const std::string& out_com,
              const std::string& manifest_out) {
  auto samples = cotc::read_samples(dataset);
  if (rt.cfg.dry_run) {
    print_dry_run_plan("split",
                       {{"samples", samples.size()}, {"n_train", n_train}, {"n_com", n_com}},
                       rt.cfg);
    return 0;
  }
  auto split = cotc::split_dataset(samples, {n_train, n_com}, rt.cfg.seed);
  cotc::write_samples(split.train, out_train);
  cotc::write_samples(split.com, out_com);
  write_sidecar_meta(out_train, rt.cfg);
  write_sidecar_meta(out_com, rt.cfg);

  if (!manifest_out.empty()) {
    json ids_train = json::array();
    json ids_com = json::array();
    for (const auto& s : split.train) ids_train.push_back(s.id);
    for (const auto& s : split.com) ids_com.push_back(s.id);
    write_json_doc(manifest_out, {{"train", ids_train}, {"com", ids_com}}, rt.cfg);
  }
  std::cout << "split " << samples.size() << " samples into " << split.train.size() << " train / "
            << split.com.size() << " com\n";
  return 0;
}

// ── score ─────────────────────────────────────────────────────

cotc::Sample read_single_sample(const fs::path& path) {
  auto text = cotc::read_text_file(path);
  try {
    auto j = json::parse(text);
    cotc::Sample s;
    s.id = j.at("id").get<std::string>();
    s.question = j.at("question").get<std::string>();
    if (j.contains("image_ref") && !j["image_ref"].is_null()) {
      s.image_ref = j["image_ref"].get<std::string>();
    }
    s.answer = j.at("answer").get<std::string>();
    s.source = cotc::source_from_string(j.value("source", "Other"));
    return s;
  } catch (const json::exception& e) {
    throw cotc::IoError(path.string() + ": bad sample: " + e.what());
  }
}

int cmd_score(Runtime& rt, const std::string& sample_file, const std::string& output_file,
              const std::string& trajectories_file, int min_input_len,
              const std::string& verifier_endpoint, bool ablate_step, bool strict_prefix,
              const std::string& report_out) {
  auto sample = read_single_sample(sample_file);
  std::string raw = cotc::read_text_file(output_file);

  cotc::TrajectorySet inputs;
  inputs.sample_id = sample.id;
  if (!trajectories_file.empty()) {
    auto sets = cotc::read_trajectories(trajectories_file);
    auto it = sets.find(sample.id);
    if (it == sets.end()) {
      throw cotc::ConfigError("no trajectories for sample " + sample.id + " in " +
                              trajectories_file);
    }
    inputs = it->second;
  } else if (min_input_len > 0) {
    cotc::Trajectory t;
    t.model_id = "given";
    t.length_tokens = min_input_len;
    inputs.m_models = 1;
    inputs.k_samples = 1;
    inputs.trajectories.push_back(t);
  } else {
    throw cotc::ConfigError("score needs --trajectories or --min-input-len");
  }

  if (rt.cfg.dry_run) {
    print_dry_run_plan("score", {{"sample", sample.id}, {"output_bytes", raw.size()}}, rt.cfg);
    return 0;
  }

  cotc::OutputGrammar grammar;
  grammar.strict_prefix = strict_prefix;
  auto output = cotc::parse_output(raw, grammar);

  std::unique_ptr<cotc::Verifier> holder;
  cotc::VerifierClient* verifier = maybe_verifier(rt, holder, verifier_endpoint);
  cotc::ScoreConfig cfg;
  cfg.length.eta = rt.cfg.eta;
  cfg.ablate_step_reward = ablate_step;
  auto score = cotc::score_output(sample, output, inputs, verifier, cfg);

  auto line = [](const char* name, double v) { std::printf("%-9s = %.10g\n", name, v); };
  line("r_fmt", score.breakdown.r_fmt);
  line("r_acc", score.breakdown.r_acc);
  line("r_step", score.breakdown.r_step);
  line("r_len", score.breakdown.r_len);
  line("r_overall", score.breakdown.r_overall);
  std::printf("rho       = %.10g (compressed %d / min input %d)\n", score.rho,
              score.compressed_len, score.min_input_len);
  if (score.degraded) std::printf("note      = degraded scoring (format invalid)\n");
  if (!score.trace.prefix_accuracies.empty()) {
    std::printf("prefix_accuracies =");
    for (double a : score.trace.prefix_accuracies) std::printf(" %.10g", a);
    std::printf("\ngains =");
    for (int g : score.trace.gains) std::printf(" %d", g);
    std::printf("\n");
  }

  if (!report_out.empty()) {
    json doc;
    doc["sample_id"] = sample.id;
    doc["format_valid"] = output.format_valid;
    doc["degraded"] = score.degraded;
    doc["reward"] = {{"r_fmt", score.breakdown.r_fmt},
                     {"r_acc", score.breakdown.r_acc},
                     {"r_step", score.breakdown.r_step},
                     {"r_len", score.breakdown.r_len},
                     {"r_overall", score.breakdown.r_overall}};
    doc["trace"] = {{"prefix_accuracies", score.trace.prefix_accuracies},
                    {"gains", score.trace.gains}};
    doc["rho"] = score.rho;
    write_json_doc(report_out, doc, rt.cfg);
  }
  return 0;
}

// ── train-toy ─────────────────────────────────────────────────

int cmd_train_toy(Runtime& rt, int steps, int group, double eps, double beta, double lr,
                  bool ablate_step, const std::string& trace_out,
                  const std::string& summary_out) {
  cotc::ToyTrainConfig cfg = rt.cfg.grpo;
  cfg.steps = steps;
  cfg.group_size = group;
  cfg.clip_eps = eps;
  cfg.kl_beta = beta;
  cfg.learning_rate = lr;
  cfg.seed = rt.cfg.seed;

  if (rt.cfg.dry_run) {
    print_dry_run_plan("train-toy",
                       {{"steps", cfg.steps},
                        {"group_size", cfg.group_size},
                        {"ablate_step", ablate_step}},
                       rt.cfg);
    return 0;
  }

  auto env = cotc::standard_toy_bandit(rt.store(), ablate_step, rt.cfg.eta);
  auto trace = cotc::train_toy_policy(env, cfg);

  std::string csv = "step,mean_reward,objective,kl,top_prob\n";
  char buf[160];
  for (const auto& s : trace.steps) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g\n", s.step, s.mean_reward,
                  s.objective, s.kl, s.top_prob);
    csv += buf;
  }
  cotc::write_text_file(trace_out, csv);

  auto probs = trace.final_policy.probs();
  int argmax = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[argmax]) argmax = static_cast<int>(i);
  }
  double tail_mean = 0.0;
  std::size_t tail = std::min<std::size_t>(50, trace.steps.size());
  for (std::size_t i = trace.steps.size() - tail; i < trace.steps.size(); ++i) {
    tail_mean += trace.steps[i].mean_reward;
  }
  if (tail > 0) tail_mean /= static_cast<double>(tail);

  json summary;
  summary["steps"] = trace.steps.size();
  summary["candidates"] = env.candidate_names;
  summary["candidate_rewards"] = env.candidate_rewards;
  summary["final_probs"] = probs;
  summary["converged_to"] = env.candidate_names[argmax];
  summary["best_candidate"] = env.candidate_names[env.best_index()];
  summary["final_top_prob"] = trace.steps.empty() ? 0.0 : trace.steps.back().top_prob;
  summary["mean_reward_last_50"] = tail_mean;
  summary["ablate_step"] = ablate_step;
  if (!summary_out.empty()) write_json_doc(summary_out, summary, rt.cfg);

  std::cout << "trained " << trace.steps.size() << " steps; converged to '"
            << env.candidate_names[argmax] << "' (p=" << probs[argmax] << ")\n";
  return 0;
}

// ── compress / export-sft / stats ─────────────────────────────

int cmd_compress(Runtime& rt, const std::string& dataset, const std::string& trajectories,
                 const std::string& endpoint, const std::string& verifier_endpoint,
                 bool ablate_step, const std::string& out, const std::string& rejects_out,
                 const std::string& score_report_out) {
  auto samples = cotc::read_samples(dataset);
  auto sets = cotc::read_trajectories(trajectories);
  require_endpoint(rt, endpoint);

  if (rt.cfg.dry_run) {
    print_dry_run_plan("compress", {{"samples", samples.size()}, {"endpoint", endpoint}},
                       rt.cfg);
    return 0;
  }

  std::unique_ptr<cotc::Verifier> holder;
  cotc::VerifierClient* verifier = maybe_verifier(rt, holder, verifier_endpoint);
  cotc::ScoreConfig cfg;
  cfg.length.eta = rt.cfg.eta;
  cfg.ablate_step_reward = ablate_step;

  auto result = cotc::compress_dataset(samples, sets, endpoint, rt.gateway, rt.store(),
                                       cotc::OutputGrammar{}, verifier, cfg);
  cotc::write_compressed_records(result.accepted, out);
  write_sidecar_meta(out, rt.cfg);
  if (!rejects_out.empty()) {
    cotc::write_rejects(result.rejects, rejects_out);
    write_sidecar_meta(rejects_out, rt.cfg);
  }
  if (!score_report_out.empty()) {
    cotc::write_score_report(result.scores, score_report_out);
    write_sidecar_meta(score_report_out, rt.cfg);
  }
  std::cout << "compressed " << result.processed() << " samples: " << result.accepted.size()
            << " accepted, " << result.rejects.size() << " rejected\n";
  return 0;
}

int cmd_export_sft(Runtime& rt, const std::string& records_file, const std::string& out) {
  auto records = cotc::read_compressed_records(records_file);
  if (rt.cfg.dry_run) {
    print_dry_run_plan("export-sft", {{"records", records.size()}}, rt.cfg);
    return 0;
  }
  cotc::export_sft_records(records, out);
  write_sidecar_meta(out, rt.cfg);
  std::cout << "exported " << records.size() << " sft records -> " << out << "\n";
  return 0;
}

int cmd_stats(Runtime& rt, const std::string& records_file, const std::string& out) {
  auto records = cotc::read_compressed_records(records_file);
  auto stats = cotc::dataset_stats(records);
  std::printf("count = %zu\nmean +/- std = %.1f +/- %.1f tokens\n", stats.count, stats.mean_len,
              stats.std_len);
  if (!out.empty()) {
    write_json_doc(
        out,
        {{"count", stats.count}, {"mean_len", stats.mean_len}, {"std_len", stats.std_len}},
        rt.cfg);
  }
  return 0;
}

// ── evaluate / judge / report ─────────────────────────────────

int cmd_evaluate(Runtime& rt, const std::string& dataset, const std::string& adapter,
                 const std::string& endpoint, const std::string& out,
                 const std::string& summary_out) {
  auto samples = cotc::load_benchmark(dataset, adapter);
  require_endpoint(rt, endpoint);

  if (rt.cfg.dry_run) {
    print_dry_run_plan("evaluate", {{"samples", samples.size()}, {"endpoint", endpoint}},
                       rt.cfg);
    return 0;
  }

  auto records = cotc::run_benchmark(rt.gateway, endpoint, samples, rt.store());
  auto metrics = cotc::compute_metrics(records);

  if (!out.empty()) {
    std::ofstream rec_out(out, std::ios::binary | std::ios::trunc);
    if (!rec_out) throw cotc::IoError("cannot write " + out);
    for (const auto& r : records) {
      json j;
      j["sample_id"] = r.sample_id;
      j["predicted"] = r.predicted;
      j["correct"] = r.correct;
      j["cot_len"] = r.cot_len;
      j["flag"] = r.flag;
      rec_out << j.dump() << "\n";
    }
    write_sidecar_meta(out, rt.cfg);
  }

  json summary;
  summary["records"] = records.size();
  summary["acc_percent"] = metrics.acc_percent;
  summary["avg_len"] = metrics.avg_len;
  summary["ratio"] = metrics.ratio ? json(*metrics.ratio) : json(nullptr);
  if (!summary_out.empty()) write_json_doc(summary_out, summary, rt.cfg);

  std::printf("acc = %.1f%%  avg_len = %.1f  ratio = ", metrics.acc_percent, metrics.avg_len);
  if (metrics.ratio) {
    std::printf("%.2f\n", *metrics.ratio);
  } else {
    std::printf("undefined (zero accuracy)\n");
  }
  return 0;
}

int cmd_judge(Runtime& rt, const std::string& input, const std::string& kind_name,
              const std::string& endpoint, int runs, const std::string& out,
              const std::string& merge_into) {
  if (runs < 1) throw cotc::ConfigError("judge --runs must be >= 1");
  cotc::JudgeKind kind;
  if (kind_name == "visual_info") {
    kind = cotc::JudgeKind::VisualInfo;
  } else if (kind_name == "explanation") {
    kind = cotc::JudgeKind::Explanation;
  } else {
    throw cotc::ConfigError("judge --kind must be visual_info or explanation");
  }
  require_endpoint(rt, endpoint);

  struct Item {
    std::string id, text, examples;
  };
  std::vector<Item> items;
  {
    std::ifstream in(input, std::ios::binary);
    if (!in) throw cotc::IoError("cannot read " + input);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("id") || !j.contains("text")) {
        throw cotc::IoError(input + ": judge items need {id, text}");
      }
      items.push_back(
          {j["id"].get<std::string>(), j["text"].get<std::string>(), j.value("examples", "")});
    }
  }

  if (rt.cfg.dry_run) {
    print_dry_run_plan("judge", {{"items", items.size()}, {"kind", kind_name}}, rt.cfg);
    return 0;
  }

  double sum = 0.0;
  json lines = json::array();
  for (const auto& item : items) {
    cotc::JudgePayload payload{item.text, item.examples};
    double item_sum = 0.0;
    for (int run = 0; run < runs; ++run) {
      // Seeds stride by two so the in-protocol retry never collides with the
      // next run's seed.
      item_sum += cotc::judge_score(rt.gateway, endpoint, kind, payload, rt.store(),
                                    /*temperature=*/0.0, /*seed=*/2 * run);
    }
    double item_mean = item_sum / runs;
    sum += item_mean;
    lines.push_back({{"id", item.id}, {"score", item_mean}});
  }
  double mean = items.empty() ? 0.0 : sum / static_cast<double>(items.size());

  if (!out.empty()) {
    write_json_doc(out, {{"kind", kind_name}, {"scores", lines}, {"mean", mean}}, rt.cfg);
  }
  if (!merge_into.empty()) {
    // Fold this judge mean into an existing evaluation summary so one file
    // carries {acc, avg_len, ratio, judge_means}.
    auto doc = json::parse(cotc::read_text_file(merge_into));
    if (!doc.contains("judge_means") || !doc["judge_means"].is_object()) {
      doc["judge_means"] = json::object();
    }
    doc["judge_means"][kind_name] = mean;
    std::ofstream merged(merge_into, std::ios::binary | std::ios::trunc);
    if (!merged) throw cotc::IoError("cannot write " + merge_into);
    merged << doc.dump(2) << "\n";
  }
  std::printf("judged %zu items, mean score %.2f\n", items.size(), mean);
  return 0;
}

int cmd_report(const std::vector<std::string>& summaries) {
  std::vector<json> docs;
  bool any_judge = false;
  for (const auto& path : summaries) {
    docs.push_back(json::parse(cotc::read_text_file(path)));
    any_judge = any_judge || docs.back().contains("judge_means");
  }

  std::printf("%-24s %8s %10s %8s", "run", "acc", "avg_len", "ratio");
  if (any_judge) std::printf(" %12s %12s", "visual_info", "explanation");
  std::printf("\n");

  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& doc = docs[i];
    std::string name = fs::path(summaries[i]).stem().string();
    std::printf("%-24s %8.1f %10.1f", name.c_str(), doc.value("acc_percent", 0.0),
                doc.value("avg_len", 0.0));
    if (doc.contains("ratio") && !doc["ratio"].is_null()) {
      std::printf(" %8.2f", doc["ratio"].get<double>());
    } else {
      std::printf(" %8s", "n/a");
    }
    if (any_judge) {
      for (const char* kind : {"visual_info", "explanation"}) {
        if (doc.contains("judge_means") && doc["judge_means"].contains(kind)) {
          std::printf(" %12.2f", doc["judge_means"][kind].get<double>());
        } else {
          std::printf(" %12s", "-");
        }
      }
    }
    std::printf("\n");
  }
  return 0;
}

json error_json(const std::string& type, const std::string& message) {
  return json{{"error", {{"type", type}, {"message", message}}}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chain-of-thought compression pipeline"};
  app.require_subcommand(1);

  CliOptions opts;
  std::string config_path, replay_path, mock_path, prompt_path;
  app.add_option("--config", config_path, "JSON config file")->envname("COTC_CONFIG");
  app.add_option("--replay-cache", replay_path, "replay cache directory");
  app.add_option("--mock", mock_path, "mock fixture file or directory");
  app.add_option("--prompt-dir", prompt_path, "prompt template directory");
  long budget = -1;
  app.add_option("--budget", budget, "max live requests for this run");
  double eta = -1.0;
  app.add_option("--eta", eta, "length penalty threshold in (0,1)");
  uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "run seed");
  app.add_flag("--dry-run", opts.dry_run, "validate and print the plan; no endpoint traffic");

  // synthesize
  auto* syn = app.add_subcommand("synthesize", "generate N = M x K long CoTs per sample");
  std::string syn_dataset, syn_out, syn_manifest;
  std::vector<std::string> syn_generators;
  int syn_k = 2, syn_max_tokens = 4096;
  double syn_temperature = 1.0;
  syn->add_option("--dataset", syn_dataset, "sample jsonl")->required();
  syn->add_option("--generator", syn_generators, "generator endpoint id (repeatable)")
      ->required();
  syn->add_option("--k", syn_k, "samples per model");
  syn->add_option("--temperature", syn_temperature, "decoding temperature");
  syn->add_option("--max-tokens", syn_max_tokens, "decoding max tokens");
  syn->add_option("--out", syn_out, "trajectory jsonl output")->required();
  syn->add_option("--manifest", syn_manifest, "synthesis manifest json");

  // split
  auto* spl = app.add_subcommand("split", "shuffle and split into D_train / D_com");
  std::string spl_dataset, spl_out_train, spl_out_com, spl_manifest;
  int spl_train = 0, spl_com = 0;
  spl->add_option("--dataset", spl_dataset)->required();
  spl->add_option("--train", spl_train, "train partition size")->required();
  spl->add_option("--com", spl_com, "compression partition size")->required();
  spl->add_option("--out-train", spl_out_train)->required();
  spl->add_option("--out-com", spl_out_com)->required();
  spl->add_option("--manifest", spl_manifest, "split manifest json");

  // score
  auto* sco = app.add_subcommand("score", "reward one raw compressor output against a sample");
  std::string sco_sample, sco_output, sco_traj, sco_verifier = "verifier", sco_report;
  int sco_min_input = 0;
  bool sco_ablate = false, sco_strict = false;
  sco->add_option("--sample", sco_sample, "sample json file")->required();
  sco->add_option("--output", sco_output, "raw compressor output file")->required();
  sco->add_option("--trajectories", sco_traj, "trajectory jsonl for input lengths");
  sco->add_option("--min-input-len", sco_min_input, "shortest input length override");
  sco->add_option("--verifier", sco_verifier, "verifier endpoint id");
  sco->add_flag("--ablate-step", sco_ablate, "zero the step reward term");
  sco->add_flag("--strict-prefix", sco_strict, "enforce the think prefix");
  sco->add_option("--report", sco_report, "score report json");

  // train-toy
  auto* toy = app.add_subcommand("train-toy", "GRPO ascent on the standard candidate bandit");
  int toy_steps = 500, toy_group = 8;
  double toy_eps = 0.2, toy_beta = 0.04, toy_lr = 0.1;
  bool toy_ablate = false;
  std::string toy_trace = "toy_trace.csv", toy_summary;
  toy->add_option("--steps", toy_steps);
  toy->add_option("--group", toy_group, "rollouts per step (G)");
  toy->add_option("--eps", toy_eps, "clip epsilon");
  toy->add_option("--beta", toy_beta, "KL weight");
  toy->add_option("--lr", toy_lr, "learning rate");
  toy->add_flag("--ablate-step", toy_ablate, "score candidates without the step reward");
  toy->add_option("--out-trace", toy_trace, "per-step csv");
  toy->add_option("--out-summary", toy_summary, "summary json");

  // compress
  auto* cmp = app.add_subcommand("compress", "apply the compressor endpoint to D_com");
  std::string cmp_dataset, cmp_traj, cmp_endpoint = "compressor", cmp_verifier = "verifier";
  std::string cmp_out, cmp_rejects;
  bool cmp_ablate = false;
  cmp->add_option("--dataset", cmp_dataset, "D_com sample jsonl")->required();
  cmp->add_option("--trajectories", cmp_traj, "trajectory jsonl")->required();
  cmp->add_option("--endpoint", cmp_endpoint, "compressor endpoint id");
  cmp->add_option("--verifier", cmp_verifier, "verifier endpoint id (optional)");
  cmp->add_flag("--ablate-step", cmp_ablate);
  cmp->add_option("--out", cmp_out, "compressed records jsonl")->required();
  cmp->add_option("--rejects", cmp_rejects, "rejects jsonl");
  std::string cmp_score_report;
  cmp->add_option("--score-report", cmp_score_report,
                  "per-output reward breakdown + step trace jsonl");

  // export-sft
  auto* exp = app.add_subcommand("export-sft", "emit the instruction-tuning file");
  std::string exp_records, exp_out;
  exp->add_option("--records", exp_records, "compressed records jsonl")->required();
  exp->add_option("--out", exp_out, "sft jsonl")->required();

  // stats
  auto* sta = app.add_subcommand("stats", "token-length statistics of compressed records");
  std::string sta_records, sta_out;
  sta->add_option("--records", sta_records, "compressed records jsonl")->required();
  sta->add_option("--out", sta_out, "stats json");

  // evaluate
  auto* eva = app.add_subcommand("evaluate", "run a benchmark and compute Acc/AvgLen/Ratio");
  std::string eva_dataset, eva_adapter = "native", eva_endpoint, eva_out, eva_summary;
  eva->add_option("--dataset", eva_dataset, "benchmark file")->required();
  eva->add_option("--adapter", eva_adapter, "native|mathvista|scienceqa");
  eva->add_option("--endpoint", eva_endpoint, "model endpoint id")->required();
  eva->add_option("--out", eva_out, "per-record jsonl");
  eva->add_option("--summary", eva_summary, "summary json");

  // judge
  auto* jud = app.add_subcommand("judge", "LLM-as-judge scoring of CoTs or explanations");
  std::string jud_input, jud_kind = "explanation", jud_endpoint = "judge", jud_out;
  jud->add_option("--input", jud_input, "items jsonl with {id, text}")->required();
  jud->add_option("--kind", jud_kind, "visual_info|explanation");
  jud->add_option("--endpoint", jud_endpoint, "judge endpoint id");
  int jud_runs = 1;
  jud->add_option("--runs", jud_runs, "judge passes per item (scores averaged)");
  jud->add_option("--out", jud_out, "scores json");
  std::string jud_merge;
  jud->add_option("--merge-into", jud_merge, "evaluation summary json to receive judge_means");

  // report
  auto* rep = app.add_subcommand("report", "render a metric grid across run summaries");
  std::vector<std::string> rep_summaries;
  rep->add_option("summaries", rep_summaries, "summary json files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_json("usage", e.what()).dump() << "\n";
    return 2;
  }

  if (!config_path.empty()) opts.config_file = config_path;
  if (!replay_path.empty()) opts.replay_cache = replay_path;
  if (!mock_path.empty()) opts.mock_fixtures = mock_path;
  if (!prompt_path.empty()) opts.prompt_dir = prompt_path;
  if (budget >= 0) opts.budget = budget;
  if (eta > 0.0) opts.eta = eta;
  if (seed_opt->count() > 0) opts.seed = seed;

  try {
    if (rep->parsed()) return cmd_report(rep_summaries);  // no endpoints involved

    auto rt = make_runtime(opts);
    if (syn->parsed()) {
      return cmd_synthesize(*rt, syn_dataset, syn_generators, syn_k, syn_temperature,
                            syn_max_tokens, syn_out, syn_manifest);
    }
    if (spl->parsed()) {
      return cmd_split(*rt, spl_dataset, spl_train, spl_com, spl_out_train, spl_out_com,
                       spl_manifest);
    }
    if (sco->parsed()) {
      return cmd_score(*rt, sco_sample, sco_output, sco_traj, sco_min_input, sco_verifier,
                       sco_ablate, sco_strict, sco_report);
    }
    if (toy->parsed()) {
      return cmd_train_toy(*rt, toy_steps, toy_group, toy_eps, toy_beta, toy_lr, toy_ablate,
                           toy_trace, toy_summary);
    }
    if (cmp->parsed()) {
      return cmd_compress(*rt, cmp_dataset, cmp_traj, cmp_endpoint, cmp_verifier, cmp_ablate,
                          cmp_out, cmp_rejects, cmp_score_report);
    }
    if (exp->parsed()) return cmd_export_sft(*rt, exp_records, exp_out);
    if (sta->parsed()) return cmd_stats(*rt, sta_records, sta_out);
    if (eva->parsed()) {
      return cmd_evaluate(*rt, eva_dataset, eva_adapter, eva_endpoint, eva_out, eva_summary);
    }
    if (jud->parsed()) {
      return cmd_judge(*rt, jud_input, jud_kind, jud_endpoint, jud_runs, jud_out, jud_merge);
    }
    std::cerr << error_json("usage", "no subcommand").dump() << "\n";
    return 2;
  } catch (const cotc::ConfigError& e) {
    std::cerr << error_json("config", e.what()).dump() << "\n";
    return 2;
  } catch (const cotc::Error& e) {
    std::cerr << error_json("runtime", e.what()).dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << error_json("internal", e.what()).dump() << "\n";
    return 1;
  }
}
