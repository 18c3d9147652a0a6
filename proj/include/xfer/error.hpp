// Error codes and the exception type shared by all xfer components.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace xfer {

enum class ErrorCode {
  Syntax,
  DuplicateChoiceId,
  MissingChoice,
  IndexOutOfRange,
  LimitExceeded,
  DuplicateRuleId,
  UnboundTargetMeta,
  RecursionDepthExceeded,
  ExpansionLimitExceeded,
  NoHeadPredicate,
  EmptyCorpus,
  UnannotatedCandidate,
  DuplicateUtteranceId,
  TooFewUtterances,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::uint64_t count = 0)
      : std::runtime_error(message), code_(code), count_(count) {}

  ErrorCode code() const { return code_; }
  // Payload for LimitExceeded / ExpansionLimitExceeded: the offending count.
  std::uint64_t count() const { return count_; }

  // Input errors come from bad files or malformed data; the rest are
  // pipeline failures. The CLI maps these onto exit codes 2 and 3.
  bool is_input_error() const {
    switch (code_) {
      case ErrorCode::Syntax:
      case ErrorCode::DuplicateRuleId:
      case ErrorCode::UnboundTargetMeta:
      case ErrorCode::DuplicateUtteranceId:
      case ErrorCode::EmptyCorpus:
      case ErrorCode::UnannotatedCandidate:
      case ErrorCode::TooFewUtterances:
      case ErrorCode::Io:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
  std::uint64_t count_;
};

// Non-fatal findings reported by validation and extraction.
struct Diagnostic {
  std::string code;
  std::string detail;
};

}  // namespace xfer
