#include "cotc/text.hpp"

#include <cctype>

#include "cotc/errors.hpp"
#include "cotc/types.hpp"

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

}  // namespace

int count_tokens(std::string_view text) {
  int n = 0;
  bool in_token = false;
  for (char c : text) {
    if (is_space(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++n;
    }
  }
  return n;
}

TokenCounter whitespace_token_counter() {
  return [](std::string_view s) { return count_tokens(s); };
}

std::optional<std::string> try_extract_boxed(std::string_view text) {
  constexpr std::string_view kMarker = "\\boxed{";
  std::optional<std::string> last;
  std::size_t pos = 0;
  while ((pos = text.find(kMarker, pos)) != std::string_view::npos) {
    std::size_t body = pos + kMarker.size();
    int depth = 1;
    std::size_t i = body;
    for (; i < text.size(); ++i) {
      if (text[i] == '{') ++depth;
      else if (text[i] == '}' && --depth == 0) break;
    }
    if (depth == 0) last = std::string(text.substr(body, i - body));
    pos += kMarker.size();
  }
  return last;
}

std::string extract_boxed(std::string_view text) {
  auto r = try_extract_boxed(text);
  if (!r) throw NoBoxedAnswer();
  return *r;
}

std::string normalize_answer(std::string_view raw) {
  std::string s(trim(raw));
  // Strip trailing periods to a fixpoint so the result is idempotent.
  for (;;) {
    std::string before = s;
    while (!s.empty() && s.back() == '.') s.pop_back();
    s = std::string(trim(s));
    if (s == before) break;
  }
  if (s.size() == 1) {
    char c = s[0];
    if (c >= 'a' && c <= 'e') s[0] = static_cast<char>(c - 'a' + 'A');
  }
  return s;
}

std::optional<std::string> canonical_decimal(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::string sign;
  std::size_t i = 0;
  if (s[0] == '+' || s[0] == '-') {
    if (s[0] == '-') sign = "-";
    i = 1;
  }
  std::string int_part, frac_part;
  bool seen_dot = false, seen_digit = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == '.') {
      if (seen_dot) return std::nullopt;
      seen_dot = true;
    } else if (c >= '0' && c <= '9') {
      seen_digit = true;
      (seen_dot ? frac_part : int_part) += c;
    } else {
      return std::nullopt;
    }
  }
  if (!seen_digit) return std::nullopt;
  while (int_part.size() > 1 && int_part.front() == '0') int_part.erase(0, 1);
  while (!frac_part.empty() && frac_part.back() == '0') frac_part.pop_back();
  if (int_part.empty()) int_part = "0";
  if (int_part == "0" && frac_part.empty()) sign.clear();  // -0 == 0
  std::string out = sign + int_part;
  if (!frac_part.empty()) out += "." + frac_part;
  return out;
}

bool answers_match(std::string_view a, std::string_view b) {
  std::string na = normalize_answer(a);
  std::string nb = normalize_answer(b);
  if (na == nb) return true;
  auto da = canonical_decimal(na);
  auto db = canonical_decimal(nb);
  return da && db && *da == *db;
}

std::string to_string(Source s) {
  switch (s) {
    case Source::Geo170k: return "Geo170k";
    case Source::ScienceQA: return "ScienceQA";
    case Source::Other: return "Other";
  }
  return "Other";
}

Source source_from_string(std::string_view s) {
  if (s == "Geo170k") return Source::Geo170k;
  if (s == "ScienceQA") return Source::ScienceQA;
  return Source::Other;
}

}  // namespace cotc
