#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cotc/types.hpp"

namespace cotc {

// Fixed-literal grammar for the compressor's tagged output. Validity means:
// the six tags appear exactly once each, in think -> refinement -> answer
// order, with nothing but whitespace outside them, the refinement body holds
// at least one nonempty segment, and joining the segments with the delimiter
// reconstructs the (trimmed) body exactly.
struct OutputGrammar {
  std::string think_open = "<think>";
  std::string think_close = "</think>";
  std::string refine_open = "<refinement>";
  std::string refine_close = "</refinement>";
  std::string answer_open = "<answer>";
  std::string answer_close = "</answer>";
  std::string segment_delimiter = "\n\n";
  std::string required_think_prefix = "Okay, let's check these provided CoTs: ";
  // The think prefix is a prompt instruction, not part of the format reward;
  // enforcing it is opt-in.
  bool strict_prefix = false;
};

// Split on the literal two-newline delimiter; trailing carriage returns are
// trimmed from each piece and empty pieces dropped. Throws EmptyRefinement
// when nothing remains.
std::vector<std::string> split_segments(std::string_view refinement_body,
                                        std::string_view delimiter = "\n\n");

// Parses arbitrary (possibly adversarial) text. Never throws: grammar
// violations are encoded in format_valid, with best-effort field capture.
CompressorOutput parse_output(std::string_view raw, const OutputGrammar& grammar = {});

// Renders a parsed output back into tagged form; parse_output(render_output(o))
// round-trips for valid outputs with trimmed fields.
std::string render_output(const CompressorOutput& output, const OutputGrammar& grammar = {});

}  // namespace cotc
