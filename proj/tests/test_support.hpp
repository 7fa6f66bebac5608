#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "cotc/reward.hpp"
#include "cotc/templates.hpp"
#include "cotc/types.hpp"

namespace cotc::test {

// Self-removing scratch directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    dir_ = std::filesystem::temp_directory_path() /
           ("cotc_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  const std::filesystem::path& path() const { return dir_; }
  std::filesystem::path operator/(const std::string& name) const { return dir_ / name; }

 private:
  std::filesystem::path dir_;
};

inline std::filesystem::path prompt_dir() {
  if (const char* env = std::getenv("COTC_PROMPT_DIR"); env && *env) return env;
  return COTC_SOURCE_PROMPT_DIR;
}

inline const TemplateStore& templates() {
  static TemplateStore store = TemplateStore::load(prompt_dir());
  return store;
}

// The canonical tagged emission from the compressor template's worked example.
inline std::string canonical_example_output() {
  return "<think>\n"
         "Okay, let's check these provided CoTs: ... The original CoTs repeat the same "
         "calculation three times and include irrelevant examples. ... I will retain only the "
         "core algebraic step that links the given equation to the solution. Look at the "
         "provided CoT, some steps are redundanct... ... (your thinking process)... ...\n"
         "</think>\n"
         "<refinement>\n"
         "Okay, ... ... Given the equation 2x + 4 = 10, subtract 4 from both sides: 2x = 6.\n"
         "\n"
         "Divide by 2: x = 3.\n"
         "</refinement>\n"
         "<answer> \\boxed{A}</answer>";
}

// Verifier stand-in fed from an explicit prefix -> accuracy table.
class TableVerifier : public VerifierClient {
 public:
  explicit TableVerifier(std::map<std::string, double> table, double fallback = 0.0)
      : table_(std::move(table)), fallback_(fallback) {}

  double estimate_accuracy(const Sample&, std::string_view cot_prefix) override {
    auto it = table_.find(std::string(cot_prefix));
    return it == table_.end() ? fallback_ : it->second;
  }

 private:
  std::map<std::string, double> table_;
  double fallback_;
};

inline Sample make_sample(const std::string& id = "s1", const std::string& answer = "A") {
  Sample s;
  s.id = id;
  s.question = "Solve 2x + 4 = 10. What is x?";
  s.image_ref = "img://" + id;
  s.answer = answer;
  s.source = Source::Geo170k;
  return s;
}

// Deterministic uniform double in [0,1); raw engine output only, no
// implementation-defined distributions.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {  // inclusive bounds
  return lo + static_cast<int>(rng() % static_cast<uint64_t>(hi - lo + 1));
}

}  // namespace cotc::test
