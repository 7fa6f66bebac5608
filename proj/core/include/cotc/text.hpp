#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace cotc {

// Token counting is injectable so a model tokenizer can replace the default
// whitespace counter uniformly across a run without touching any formula.
using TokenCounter = std::function<int(std::string_view)>;

// Default counter: number of maximal non-whitespace runs.
int count_tokens(std::string_view text);

TokenCounter whitespace_token_counter();

// Content of the LAST well-balanced \boxed{...} group in `text`. Nested
// braces are allowed. Throws NoBoxedAnswer when no balanced group exists.
std::string extract_boxed(std::string_view text);
std::optional<std::string> try_extract_boxed(std::string_view text);

// Trims surrounding whitespace, strips trailing periods, upper-cases single
// answer letters a-e. Idempotent. Empty input normalizes to the empty string.
std::string normalize_answer(std::string_view raw);

// Canonical form of a plain decimal string ("3.50" -> "3.5", "+07" -> "7"),
// or nullopt when the input is not a decimal number.
std::optional<std::string> canonical_decimal(std::string_view s);

// Answer equality: string equality after normalize_answer, with a numeric
// fast-path comparing canonical decimals exactly.
bool answers_match(std::string_view a, std::string_view b);

}  // namespace cotc
