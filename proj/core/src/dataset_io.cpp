#include "cotc/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cotc/errors.hpp"
#include "cotc/templates.hpp"
#include "cotc/text.hpp"

namespace cotc {

namespace {

using nlohmann::json;

json sample_to_json(const Sample& s) {
  json j;
  j["id"] = s.id;
  j["question"] = s.question;
  j["image_ref"] = s.image_ref ? json(*s.image_ref) : json(nullptr);
  j["answer"] = s.answer;
  j["source"] = to_string(s.source);
  return j;
}

Sample sample_from_json(const json& j) {
  Sample s;
  s.id = j.at("id").get<std::string>();
  s.question = j.at("question").get<std::string>();
  if (j.contains("image_ref") && !j["image_ref"].is_null()) {
    s.image_ref = j["image_ref"].get<std::string>();
  }
  s.answer = j.at("answer").get<std::string>();
  s.source = source_from_string(j.value("source", "Other"));
  return s;
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<Sample> read_samples(const std::filesystem::path& path) {
  std::vector<Sample> samples;
  std::set<std::string> ids;
  for (const auto& j : read_jsonl(path)) {
    try {
      samples.push_back(sample_from_json(j));
    } catch (const json::exception& e) {
      throw IoError(path.string() + ": bad sample record: " + e.what());
    }
    const Sample& s = samples.back();
    if (s.id.empty()) throw IoError(path.string() + ": sample with empty id");
    if (s.answer.empty()) throw IoError(path.string() + ": sample " + s.id + " has empty answer");
    if (!ids.insert(s.id).second) {
      throw IoError(path.string() + ": duplicate sample id " + s.id);
    }
  }
  return samples;
}

void write_samples(const std::vector<Sample>& samples, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& s : samples) out << sample_to_json(s).dump() << "\n";
}

void write_trajectories(const std::vector<TrajectorySet>& sets,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& set : sets) {
    for (const auto& t : set.trajectories) {
      json j;
      j["sample_id"] = set.sample_id;
      j["model_id"] = t.model_id;
      j["seed"] = t.seed;
      j["text"] = t.text;
      j["length_tokens"] = t.length_tokens;
      out << j.dump() << "\n";
    }
  }
}

std::map<std::string, TrajectorySet> read_trajectories(const std::filesystem::path& path) {
  std::map<std::string, TrajectorySet> sets;
  for (const auto& j : read_jsonl(path)) {
    try {
      std::string sample_id = j.at("sample_id").get<std::string>();
      Trajectory t;
      t.model_id = j.at("model_id").get<std::string>();
      t.seed = j.at("seed").get<int>();
      t.text = j.at("text").get<std::string>();
      t.length_tokens = j.at("length_tokens").get<int>();
      auto& set = sets[sample_id];
      set.sample_id = sample_id;
      set.trajectories.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw IoError(path.string() + ": bad trajectory record: " + e.what());
    }
  }
  // Recover the plan shape from what is present.
  for (auto& [_, set] : sets) {
    int max_seed = 0;
    std::vector<std::string> models;
    for (const auto& t : set.trajectories) {
      max_seed = std::max(max_seed, t.seed);
      if (std::find(models.begin(), models.end(), t.model_id) == models.end()) {
        models.push_back(t.model_id);
      }
    }
    set.m_models = static_cast<int>(models.size());
    set.k_samples = max_seed + 1;
  }
  return sets;
}

std::vector<Sample> load_benchmark(const std::filesystem::path& path,
                                   const std::string& adapter) {
  if (adapter == "native") return read_samples(path);

  std::vector<Sample> samples;
  if (adapter == "mathvista") {
    // MathVista testmini records: {pid, question, answer, image, ...}.
    for (const auto& j : read_jsonl(path)) {
      Sample s;
      s.id = j.at("pid").is_string() ? j["pid"].get<std::string>()
                                     : std::to_string(j["pid"].get<long>());
      s.question = j.at("question").get<std::string>();
      s.answer = j.at("answer").get<std::string>();
      if (j.contains("image") && j["image"].is_string()) s.image_ref = j["image"].get<std::string>();
      s.source = Source::Other;
      samples.push_back(std::move(s));
    }
    return samples;
  }
  if (adapter == "scienceqa") {
    // ScienceQA records: {id, question, choices, answer (choice index), image}.
    for (const auto& j : read_jsonl(path)) {
      Sample s;
      s.id = j.at("id").is_string() ? j["id"].get<std::string>()
                                    : std::to_string(j["id"].get<long>());
      s.question = j.at("question").get<std::string>();
      int idx = j.at("answer").get<int>();
      const auto& choices = j.at("choices");
      if (idx < 0 || idx >= static_cast<int>(choices.size())) {
        throw IoError(path.string() + ": scienceqa answer index out of range for id " + s.id);
      }
      // Letter-choice convention: index 0 -> A.
      s.answer = std::string(1, static_cast<char>('A' + idx));
      std::string q = s.question;
      for (std::size_t c = 0; c < choices.size(); ++c) {
        q += "\n" + std::string(1, static_cast<char>('A' + c)) + ". " +
             choices[c].get<std::string>();
      }
      s.question = q;
      if (j.contains("image") && j["image"].is_string()) s.image_ref = j["image"].get<std::string>();
      s.source = Source::ScienceQA;
      samples.push_back(std::move(s));
    }
    return samples;
  }
  throw ConfigError("unknown benchmark adapter: " + adapter);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
}

std::string file_hash_hex(const std::filesystem::path& path) {
  return fnv1a64_hex(read_text_file(path));
}

}  // namespace cotc
