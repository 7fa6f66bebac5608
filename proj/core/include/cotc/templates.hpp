#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "cotc/types.hpp"

namespace cotc {

uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

enum class JudgeKind { VisualInfo, Explanation };

// Prompt templates live as UTF-8 fixture files next to a manifest recording
// each file's content hash; a mismatch at load raises TemplateDrift.
class TemplateStore {
 public:
  static TemplateStore load(const std::filesystem::path& dir);

  const std::string& text(const std::string& name) const;
  const std::filesystem::path& dir() const { return dir_; }

  static constexpr const char* kCompressor = "compressor_prompt.txt";
  static constexpr const char* kVerifier = "verifier_prompt.txt";
  static constexpr const char* kVisualJudge = "visual_judge_prompt.txt";
  static constexpr const char* kExplanationJudge = "explanation_judge_prompt.txt";
  static constexpr const char* kBenchmark = "benchmark_prompt.txt";

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> texts_;
};

// Resolution order for the prompt directory: explicit argument, the
// COTC_PROMPT_DIR environment variable, then the build-time default.
std::filesystem::path default_prompt_dir();

// Compressor template with {Question}, {Ground Truth}, {CoTs}
// substituted; CoTs numbered "CoT 1:", "CoT 2:", ... in set order.
std::string render_compressor_prompt(const Sample& sample, const TrajectorySet& set,
                                     const TemplateStore& store);

// Question plus optional reasoning prefix; the reasoning block is omitted
// entirely when the prefix is empty.
std::string render_verifier_prompt(const Sample& sample, std::string_view cot_prefix,
                                   const TemplateStore& store);

std::string render_judge_prompt(JudgeKind kind, std::string_view payload,
                                std::string_view examples, const TemplateStore& store);

std::string render_benchmark_prompt(const Sample& sample, const TemplateStore& store);

}  // namespace cotc
