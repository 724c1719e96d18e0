#include "fluency/overlap.hpp"

#include <algorithm>
#include <set>
#include <vector>

#include "fluency/error.hpp"

namespace fluency {
namespace {

std::set<std::vector<std::string>> ngram_set(std::span<const std::string> tokens, std::size_t n) {
  std::set<std::vector<std::string>> grams;
  if (tokens.size() < n) return grams;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    grams.emplace(tokens.begin() + static_cast<long>(i), tokens.begin() + static_cast<long>(i + n));
  }
  return grams;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double f1(double precision, double recall) {
  const double sum = precision + recall;
  return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() < b.size()) std::swap(a, b);
  // Two rows over the shorter sequence.
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

OverlapScore rouge_l(const TokenSequence& candidate, const TokenSequence& reference) {
  const std::size_t lcs = lcs_length(candidate, reference);
  OverlapScore score;
  score.metric_name = "ROUGE-L";
  score.precision = ratio(lcs, candidate.size());
  score.recall = ratio(lcs, reference.size());
  score.f_score = f1(score.precision, score.recall);
  return score;
}

OverlapScore rouge_l_multi(const TokenSequence& candidate, std::span<const TokenSequence> references) {
  require(!references.empty(), ErrorCode::kNoReferences, "ROUGE-L needs at least one reference");
  OverlapScore best = rouge_l(candidate, references.front());
  for (std::size_t i = 1; i < references.size(); ++i) {
    auto score = rouge_l(candidate, references[i]);
    if (score.f_score > best.f_score) best = std::move(score);
  }
  best.metric_name = "ROUGE-L-mult";
  return best;
}

OverlapScore ngram_overlap(const TokenSequence& candidate, std::span<const TokenSequence> references,
                           std::size_t n, OverlapMeasure measure) {
  require(n >= 1, ErrorCode::kInvalidArgument, "n-gram order must be at least 1");
  require(!references.empty(), ErrorCode::kNoReferences, "n-gram overlap needs a reference");
  std::set<std::vector<std::string>> reference_union;
  for (const auto& reference : references) reference_union.merge(ngram_set(reference.span(), n));
  const auto candidate_set = ngram_set(candidate.span(), n);
  std::size_t matched = 0;
  for (const auto& gram : candidate_set) matched += reference_union.contains(gram) ? 1 : 0;

  OverlapScore score;
  score.metric_name = "LR" + std::to_string(n) + (measure == OverlapMeasure::kRecall ? "-R" : "-F");
  score.precision = ratio(matched, candidate_set.size());
  score.recall = ratio(matched, reference_union.size());
  score.f_score = f1(score.precision, score.recall);
  return score;
}

}  // namespace fluency
