#include "fluency/error.hpp"

namespace fluency {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kPrecondition: return "PreconditionViolation";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kCorpusEmpty: return "CorpusEmpty";
    case ErrorCode::kTargetTooSmall: return "TargetTooSmall";
    case ErrorCode::kInvalidDiscount: return "InvalidDiscount";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kZeroLength: return "ZeroLength";
    case ErrorCode::kMissingVocabulary: return "MissingVocabulary";
    case ErrorCode::kMissingExternalScore: return "MissingExternalScore";
    case ErrorCode::kNoReferences: return "NoReferences";
    case ErrorCode::kDegenerateVariance: return "DegenerateVariance";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kDegenerateR: return "DegenerateR";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kRatingOutOfRange: return "RatingOutOfRange";
    case ErrorCode::kMissingScore: return "MissingScore";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kSizesExceedDataset: return "SizesExceedDataset";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(to_string(code)) + ": " + message);
}

}  // namespace fluency
