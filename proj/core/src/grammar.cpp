#include "cotc/grammar.hpp"

#include <cctype>

#include "cotc/errors.hpp"
#include "cotc/text.hpp"

namespace cotc {

namespace {

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

bool all_whitespace(std::string_view s) {
  for (char c : s) {
    if (!is_space(c)) return false;
  }
  return true;
}

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t n = 0;
  std::size_t pos = 0;
  while ((pos = hay.find(needle, pos)) != std::string_view::npos) {
    ++n;
    pos += needle.size();
  }
  return n;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::vector<std::string> split_segments(std::string_view body, std::string_view delimiter) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    std::size_t next = body.find(delimiter, pos);
    std::string_view piece =
        next == std::string_view::npos ? body.substr(pos) : body.substr(pos, next - pos);
    while (!piece.empty() && piece.back() == '\r') piece.remove_suffix(1);
    if (!piece.empty()) out.emplace_back(piece);
    if (next == std::string_view::npos) break;
    pos = next + delimiter.size();
  }
  if (out.empty()) throw EmptyRefinement();
  return out;
}

CompressorOutput parse_output(std::string_view raw, const OutputGrammar& g) {
  CompressorOutput out;
  out.raw_text = std::string(raw);
  out.format_valid = false;

  // Best-effort body capture: first open tag, first close tag after it.
  auto body_of = [&](std::string_view open, std::string_view close,
                     std::string_view* body) -> bool {
    std::size_t o = raw.find(open);
    if (o == std::string_view::npos) return false;
    std::size_t b = o + open.size();
    std::size_t c = raw.find(close, b);
    if (c == std::string_view::npos) return false;
    *body = raw.substr(b, c - b);
    return true;
  };

  std::string_view think_body, refine_body, answer_body;
  bool has_think = body_of(g.think_open, g.think_close, &think_body);
  bool has_refine = body_of(g.refine_open, g.refine_close, &refine_body);
  bool has_answer = body_of(g.answer_open, g.answer_close, &answer_body);

  if (has_think) out.explanation = std::string(trim(think_body));
  if (has_answer) {
    if (auto boxed = try_extract_boxed(answer_body)) {
      out.predicted_answer = normalize_answer(*boxed);
    }
  }

  std::string trimmed_refine;
  if (has_refine) {
    trimmed_refine = std::string(trim(refine_body));
    try {
      out.segments = split_segments(trimmed_refine, g.segment_delimiter);
    } catch (const EmptyRefinement&) {
      out.segments.clear();
    }
  }

  // Validity: each tag exactly once, strictly increasing positions, nothing
  // but whitespace outside the tagged regions.
  const std::string_view tags[6] = {g.think_open,  g.think_close,  g.refine_open,
                                    g.refine_close, g.answer_open, g.answer_close};
  std::size_t pos[6];
  for (int i = 0; i < 6; ++i) {
    if (count_occurrences(raw, tags[i]) != 1) return out;
    pos[i] = raw.find(tags[i]);
  }
  for (int i = 1; i < 6; ++i) {
    if (pos[i] <= pos[i - 1]) return out;
  }
  if (!all_whitespace(raw.substr(0, pos[0]))) return out;
  std::size_t think_end = pos[1] + tags[1].size();
  if (!all_whitespace(raw.substr(think_end, pos[2] - think_end))) return out;
  std::size_t refine_end = pos[3] + tags[3].size();
  if (!all_whitespace(raw.substr(refine_end, pos[4] - refine_end))) return out;
  std::size_t answer_end = pos[5] + tags[5].size();
  if (!all_whitespace(raw.substr(answer_end))) return out;

  if (out.segments.empty()) return out;
  if (join(out.segments, g.segment_delimiter) != trimmed_refine) return out;

  if (g.strict_prefix && out.explanation.rfind(g.required_think_prefix, 0) != 0) return out;

  out.format_valid = true;
  return out;
}

std::string render_output(const CompressorOutput& output, const OutputGrammar& g) {
  std::string s;
  s += g.think_open;
  s += "\n";
  s += output.explanation;
  s += "\n";
  s += g.think_close;
  s += "\n";
  s += g.refine_open;
  s += "\n";
  s += join(output.segments, g.segment_delimiter);
  s += "\n";
  s += g.refine_close;
  s += "\n";
  s += g.answer_open;
  s += "\\boxed{" + output.predicted_answer + "}";
  s += g.answer_close;
  return s;
}

}  // namespace cotc
