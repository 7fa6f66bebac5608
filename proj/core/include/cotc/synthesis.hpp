#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cotc/errors.hpp"
#include "cotc/gateway.hpp"
#include "cotc/text.hpp"
#include "cotc/types.hpp"

namespace cotc {

struct DecodingParams {
  double temperature = 1.0;  // diversity across samples of one model
  int max_tokens = 4096;
};

struct SynthesisPlan {
  std::vector<std::string> generator_endpoints;  // M heterogeneous models
  int samples_per_model = 1;                     // K
  DecodingParams decoding;
  std::pair<int, int> split = {0, 0};  // (n_train, n_com)
};

// Raised when a sample ends up below its target N after retries. Carries the
// partial set so the caller can decide drop-or-keep; partial sets remain
// usable since the compressor accepts one trajectory or many.
class SynthesisIncomplete : public Error {
 public:
  SynthesisIncomplete(std::string sample_id_, int obtained_, int expected_, TrajectorySet partial_)
      : Error("synthesis incomplete for sample " + sample_id_ + ": obtained " +
              std::to_string(obtained_) + " of " + std::to_string(expected_)),
        sample_id(std::move(sample_id_)),
        obtained(obtained_),
        expected(expected_),
        partial(std::move(partial_)) {}

  std::string sample_id;
  int obtained;
  int expected;
  TrajectorySet partial;
};

// Issues K completions (seeds 0..K-1) against each of the M generator
// endpoints, in model-major then seed-minor order, and measures each
// trajectory's token length.
TrajectorySet synthesize_trajectories(const Sample& sample, const SynthesisPlan& plan,
                                      Gateway& gateway,
                                      const TokenCounter& counter = whitespace_token_counter());

struct SplitResult {
  std::vector<Sample> train;  // D_train, for compressor training
  std::vector<Sample> com;    // D_com, to be compressed for SFT
};

// Seeded uniform shuffle then split: disjoint, exhaustive, reproducible.
// Throws SizeMismatch unless n_train + n_com equals the sample count.
SplitResult split_dataset(const std::vector<Sample>& samples, std::pair<int, int> sizes,
                          uint64_t seed);

}  // namespace cotc
