#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fluency {

enum class ErrorCode {
  kInvalidArgument,
  kPrecondition,
  kEmptyInput,
  kCorpusEmpty,
  kTargetTooSmall,
  kInvalidDiscount,
  kFormatError,
  kZeroLength,
  kMissingVocabulary,
  kMissingExternalScore,
  kNoReferences,
  kDegenerateVariance,
  kLengthMismatch,
  kOutOfRange,
  kDegenerateR,
  kParseError,
  kDuplicateId,
  kRatingOutOfRange,
  kMissingScore,
  kTooFewSamples,
  kSizesExceedDataset,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this exception; the C API maps `code()`
// onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const char* message) {
  if (!condition) fail(code, message);
}

}  // namespace fluency
