#include "cotc/templates.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cotc/errors.hpp"

#ifndef COTC_SOURCE_PROMPT_DIR
#define COTC_SOURCE_PROMPT_DIR ""
#endif

namespace cotc {

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

}  // namespace

uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view data) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
  return std::string(buf);
}

TemplateStore TemplateStore::load(const std::filesystem::path& dir) {
  TemplateStore store;
  store.dir_ = dir;
  auto manifest_path = dir / "manifest.json";
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad template manifest " + manifest_path.string() + ": " + e.what());
  }
  for (const auto& [name, expected] : manifest.at("templates").items()) {
    std::string text = read_file(dir / name);
    std::string actual = fnv1a64_hex(text);
    if (actual != expected.get<std::string>()) {
      throw TemplateDrift(name, expected.get<std::string>(), actual);
    }
    store.texts_[name] = std::move(text);
  }
  return store;
}

const std::string& TemplateStore::text(const std::string& name) const {
  auto it = texts_.find(name);
  if (it == texts_.end()) throw IoError("unknown template: " + name);
  return it->second;
}

std::filesystem::path default_prompt_dir() {
  if (const char* env = std::getenv("COTC_PROMPT_DIR"); env && *env) return env;
  return COTC_SOURCE_PROMPT_DIR;
}

std::string render_compressor_prompt(const Sample& sample, const TrajectorySet& set,
                                     const TemplateStore& store) {
  std::string cots;
  for (std::size_t i = 0; i < set.trajectories.size(); ++i) {
    if (i > 0) cots += "\n\n";
    cots += "CoT " + std::to_string(i + 1) + ":\n";
    cots += set.trajectories[i].text;
  }
  std::string out = store.text(TemplateStore::kCompressor);
  out = replace_all(std::move(out), "{Question}", sample.question);
  out = replace_all(std::move(out), "{Ground Truth}", sample.answer);
  out = replace_all(std::move(out), "{CoTs}", cots);
  return out;
}

std::string render_verifier_prompt(const Sample& sample, std::string_view cot_prefix,
                                   const TemplateStore& store) {
  std::string out = store.text(TemplateStore::kVerifier);
  if (cot_prefix.empty()) {
    // s0 is the empty sequence: drop the reasoning section altogether.
    std::size_t pos = out.find("\n### Reasoning");
    if (pos != std::string::npos) out.erase(pos);
  } else {
    out = replace_all(std::move(out), "{Reasoning}", cot_prefix);
  }
  out = replace_all(std::move(out), "{Question}", sample.question);
  return out;
}

std::string render_judge_prompt(JudgeKind kind, std::string_view payload,
                                std::string_view examples, const TemplateStore& store) {
  const char* name =
      kind == JudgeKind::VisualInfo ? TemplateStore::kVisualJudge : TemplateStore::kExplanationJudge;
  const char* slot = kind == JudgeKind::VisualInfo ? "{CoT}" : "{Explanation}";
  std::string out = store.text(name);
  out = replace_all(std::move(out), "{Examples}", examples);
  out = replace_all(std::move(out), slot, payload);
  return out;
}

std::string render_benchmark_prompt(const Sample& sample, const TemplateStore& store) {
  std::string out = store.text(TemplateStore::kBenchmark);
  out = replace_all(std::move(out), "{Question}", sample.question);
  return out;
}

}  // namespace cotc
