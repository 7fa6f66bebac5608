#pragma once

#include <stdexcept>
#include <string>

namespace cotc {

// Base for every error raised by the library. Subcommand code maps these to
// exit status 1; config/usage problems map to 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ── text / answers ────────────────────────────────────────────
class NoBoxedAnswer : public Error {
 public:
  NoBoxedAnswer() : Error("no balanced \\boxed{...} group in text") {}
};

// ── structured output ─────────────────────────────────────────
class EmptyRefinement : public Error {
 public:
  EmptyRefinement() : Error("refinement body contains no nonempty segments") {}
};

class TemplateDrift : public Error {
 public:
  TemplateDrift(const std::string& name, const std::string& expected, const std::string& actual)
      : Error("template fixture '" + name + "' hash mismatch: manifest " + expected +
              ", file " + actual) {}
};

// ── reward engine ─────────────────────────────────────────────
class EmptySegments : public Error {
 public:
  EmptySegments() : Error("step reward requires at least one segment") {}
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class VerifierUnavailable : public Error {
 public:
  using Error::Error;
};

// ── gateway ───────────────────────────────────────────────────
class EndpointTimeout : public Error {
 public:
  using Error::Error;
};

class EndpointError : public Error {
 public:
  EndpointError(int status, const std::string& detail)
      : Error("endpoint returned status " + std::to_string(status) + ": " + detail),
        status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class UnknownEndpoint : public Error {
 public:
  explicit UnknownEndpoint(const std::string& id) : Error("endpoint not registered: " + id) {}
};

class FixtureParseError : public Error {
 public:
  using Error::Error;
};

class MockMiss : public Error {
 public:
  using Error::Error;
};

// ── grpo ──────────────────────────────────────────────────────
class GroupTooSmall : public Error {
 public:
  explicit GroupTooSmall(std::size_t g)
      : Error("group size must be >= 2, got " + std::to_string(g)) {}
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NonFiniteGradient : public Error {
 public:
  using Error::Error;
};

// ── datasets ──────────────────────────────────────────────────
class SizeMismatch : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// ── judge protocol ────────────────────────────────────────────
class ScoreNotFound : public Error {
 public:
  ScoreNotFound() : Error("no 'Score: \\boxed{X}' pattern in judge output") {}
};

class ScoreOutOfRange : public Error {
 public:
  explicit ScoreOutOfRange(int got)
      : Error("judge score " + std::to_string(got) + " outside 1..5") {}
};

class TrailingText : public Error {
 public:
  TrailingText() : Error("non-whitespace text follows the score's closing brace") {}
};

class JudgeFormatError : public Error {
 public:
  using Error::Error;
};

// ── config / cli ──────────────────────────────────────────────
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cotc
