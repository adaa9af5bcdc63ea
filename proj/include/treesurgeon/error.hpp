#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace treesurgeon {

enum class ErrorCode {
  malformed_line,
  duplicate_edge,
  nonpositive_rate,
  self_loop,
  unknown_vertex,
  unknown_edge,
  invalid_density,
  not_irreducible,
  invalid_constraint,
  not_a_swap_configuration,
  same_root,
  constraint_mentions_pinned,
  zero_required_rate,
  missing_reverse_edge,
  bridge_pinned,
  disconnected_without_pins,
  rank_deficient,
  wrong_arity,
  nonfinite_rate,
  too_short,
  verification_failure,
  invalid_argument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::malformed_line: return "MalformedLine";
    case ErrorCode::duplicate_edge: return "DuplicateEdge";
    case ErrorCode::nonpositive_rate: return "NonpositiveRate";
    case ErrorCode::self_loop: return "SelfLoop";
    case ErrorCode::unknown_vertex: return "UnknownVertex";
    case ErrorCode::unknown_edge: return "UnknownEdge";
    case ErrorCode::invalid_density: return "InvalidDensity";
    case ErrorCode::not_irreducible: return "NotIrreducible";
    case ErrorCode::invalid_constraint: return "InvalidConstraint";
    case ErrorCode::not_a_swap_configuration: return "NotASwapConfiguration";
    case ErrorCode::same_root: return "SameRoot";
    case ErrorCode::constraint_mentions_pinned: return "ConstraintMentionsPinned";
    case ErrorCode::zero_required_rate: return "ZeroRequiredRate";
    case ErrorCode::missing_reverse_edge: return "MissingReverseEdge";
    case ErrorCode::bridge_pinned: return "BridgePinned";
    case ErrorCode::disconnected_without_pins: return "DisconnectedWithoutPins";
    case ErrorCode::rank_deficient: return "RankDeficient";
    case ErrorCode::wrong_arity: return "WrongArity";
    case ErrorCode::nonfinite_rate: return "NonfiniteRate";
    case ErrorCode::too_short: return "TooShort";
    case ErrorCode::verification_failure: return "VerificationFailure";
    case ErrorCode::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by file parsers; `line` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::size_t line, const std::string& what)
      : Error(code, line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace treesurgeon
