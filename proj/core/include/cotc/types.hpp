#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cotc {

// All domain types are plain values, immutable by convention after
// construction; they can be copied and shared across threads freely.

enum class Source { Geo170k, ScienceQA, Other };

std::string to_string(Source s);
Source source_from_string(std::string_view s);

// One (question, image-reference, ground-truth answer) task instance.
// image_ref is an opaque locator; pixels are never decoded in-process.
struct Sample {
  std::string id;
  std::string question;
  std::optional<std::string> image_ref;
  std::string answer;
  Source source = Source::Other;
};

// One long CoT produced by a generator endpoint.
struct Trajectory {
  std::string model_id;
  int seed = 0;
  std::string text;
  int length_tokens = 0;
};

// The N synthesized long CoTs for one sample, ordered model-major then
// seed-minor. A set may hold fewer than m_models * k_samples trajectories
// when generation partially failed; such sets are kept but flagged.
struct TrajectorySet {
  std::string sample_id;
  std::vector<Trajectory> trajectories;
  int m_models = 0;
  int k_samples = 0;

  int expected() const { return m_models * k_samples; }
  int obtained() const { return static_cast<int>(trajectories.size()); }
  bool complete() const { return obtained() == expected() && !trajectories.empty(); }

  // Shortest input trajectory length; 0 for an empty set.
  int min_input_tokens() const {
    int best = 0;
    for (const auto& t : trajectories) {
      if (best == 0 || t.length_tokens < best) best = t.length_tokens;
    }
    return best;
  }
};

// Parsed compressor emission. When format_valid is true, joining segments
// with the two-newline delimiter reconstructs the refinement body exactly.
struct CompressorOutput {
  std::string raw_text;
  std::string explanation;
  std::vector<std::string> segments;
  std::string predicted_answer;
  bool format_valid = false;
};

// The four reward components and their sum for one compressor output.
// r_overall always equals r_fmt + r_acc + r_step + r_len exactly.
struct RewardBreakdown {
  double r_fmt = 0.0;
  double r_acc = 0.0;
  double r_step = 0.0;
  double r_len = 0.0;
  double r_overall = 0.0;
};

}  // namespace cotc
