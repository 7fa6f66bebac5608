#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "cotc/errors.hpp"
#include "cotc/text.hpp"
#include "test_support.hpp"

using namespace cotc;

namespace {

// Independent oracle: explicit state machine over isspace transitions.
int whitespace_split_oracle(const std::string& s) {
  int n = 0;
  bool prev_space = true;
  for (unsigned char c : s) {
    bool space = std::isspace(c) != 0;
    if (!space && prev_space) ++n;
    prev_space = space;
  }
  return n;
}

std::string random_text(std::mt19937_64& rng, int max_len) {
  static const char alphabet[] = "ab cd\te\nf.{}\\x01 23";
  int len = test::uniform_int(rng, 0, max_len);
  std::string s;
  for (int i = 0; i < len; ++i) {
    s += alphabet[rng() % (sizeof(alphabet) - 1)];
  }
  return s;
}

}  // namespace

TEST_CASE("count_tokens matches the whitespace-split oracle") {
  CHECK(count_tokens("") == 0);
  CHECK(count_tokens("h1/s1 = h2/s2") == 3);
  CHECK(count_tokens("Divide by 2: x = 3.") == 6);
  CHECK(count_tokens("h1/s1 = h2/s2") == whitespace_split_oracle("h1/s1 = h2/s2"));
  CHECK(count_tokens("Divide by 2: x = 3.") == whitespace_split_oracle("Divide by 2: x = 3."));
}

TEST_CASE("count_tokens agrees with the oracle on random strings") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    std::string s = random_text(rng, 200);
    CAPTURE(s);
    CHECK(count_tokens(s) == whitespace_split_oracle(s));
  }
}

TEST_CASE("count_tokens is additive across a space join") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    std::string a = random_text(rng, 60);
    std::string b = random_text(rng, 60);
    if (a.empty() || b.empty()) continue;
    CHECK(count_tokens(a + " " + b) == count_tokens(a) + count_tokens(b));
  }
}

TEST_CASE("extract_boxed returns the last balanced group") {
  CHECK(extract_boxed("<answer>\\boxed{A}</answer>") == "A");
  CHECK(extract_boxed("\\boxed{3\\over 4} then \\boxed{B}") == "B");
  CHECK_THROWS_AS(extract_boxed("no box here"), NoBoxedAnswer);
}

TEST_CASE("extract_boxed handles nesting and unbalanced tails") {
  CHECK(extract_boxed("\\boxed{a{b}c}") == "a{b}c");
  CHECK(extract_boxed("\\boxed{ok} \\boxed{broken") == "ok");
  CHECK(extract_boxed("\\boxed{\\frac{1}{2}}") == "\\frac{1}{2}");
  CHECK_THROWS_AS(extract_boxed("\\boxed{never closed"), NoBoxedAnswer);
}

TEST_CASE("wrap-then-extract is the identity for balanced payloads") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 300; ++i) {
    std::string payload = random_text(rng, 40);
    // Keep the payload brace-balanced by stripping braces outright.
    std::erase(payload, '{');
    std::erase(payload, '}');
    CHECK(extract_boxed("\\boxed{" + payload + "}") == payload);
  }
}

TEST_CASE("normalize_answer spec examples") {
  CHECK(normalize_answer(" a. ") == "A");
  CHECK(normalize_answer("x = 3") == "x = 3");
  CHECK(normalize_answer("") == "");
  CHECK(answers_match("3.50", "3.5"));
}

TEST_CASE("normalize_answer is idempotent") {
  std::mt19937_64 rng(17);
  std::vector<std::string> corpus = {" a. ", "B", "c..", " 3.50 ", "x = 3", "...", "e .", ""};
  for (int i = 0; i < 300; ++i) corpus.push_back(random_text(rng, 30));
  for (const auto& s : corpus) {
    std::string once = normalize_answer(s);
    CAPTURE(s);
    CHECK(normalize_answer(once) == once);
  }
}

TEST_CASE("numeric equality uses exact decimal comparison") {
  CHECK(answers_match("3.50", "3.5"));
  CHECK(answers_match("0.5", ".5"));
  CHECK(answers_match("7", "7.0"));
  CHECK(answers_match("-0", "0"));
  CHECK(answers_match("007", "7"));
  CHECK_FALSE(answers_match("3.5000000000000001", "3.5"));
  CHECK_FALSE(answers_match("3.5", "3.51"));
  CHECK_FALSE(answers_match("x", "y"));

  // Decimal-parse oracle: long double comparison agrees on short decimals.
  CHECK(std::stold("3.50") == std::stold("3.5"));
}

TEST_CASE("canonical_decimal rejects non-numeric strings") {
  CHECK_FALSE(canonical_decimal("x = 3").has_value());
  CHECK_FALSE(canonical_decimal("1.2.3").has_value());
  CHECK_FALSE(canonical_decimal("").has_value());
  CHECK_FALSE(canonical_decimal("-").has_value());
  CHECK(canonical_decimal("3.50").value() == "3.5");
  CHECK(canonical_decimal("+07").value() == "7");
}
