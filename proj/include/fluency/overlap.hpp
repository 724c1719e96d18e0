#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "fluency/text.hpp"

namespace fluency {

enum class OverlapMeasure { kRecall, kFScore };

struct OverlapScore {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  std::string metric_name;

  double value(OverlapMeasure measure) const {
    return measure == OverlapMeasure::kRecall ? recall : f_score;
  }
};

/// Balanced harmonic mean; 0 when both inputs are 0.
double f1(double precision, double recall);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);
inline std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
  return lcs_length(a.span(), b.span());
}

OverlapScore rouge_l(const TokenSequence& candidate, const TokenSequence& reference);

/// Best per-reference ROUGE-L by F; the first reference wins ties.
/// Throws kNoReferences.
OverlapScore rouge_l_multi(const TokenSequence& candidate, std::span<const TokenSequence> references);

/// Set-based n-gram overlap against the union of the references' n-gram sets.
/// Throws kNoReferences; n must be >= 1.
OverlapScore ngram_overlap(const TokenSequence& candidate, std::span<const TokenSequence> references,
                           std::size_t n, OverlapMeasure measure);

}  // namespace fluency
