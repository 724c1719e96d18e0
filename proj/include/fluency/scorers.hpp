#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "fluency/ngram_lm.hpp"
#include "fluency/subword.hpp"

namespace fluency {

enum class ScoreKind { kSlor, kNce, kPpl };
enum class UnitSpace { kWord, kWordPiece };

std::string_view to_string(ScoreKind kind);
std::string_view to_string(UnitSpace space);
std::optional<ScoreKind> parse_score_kind(std::string_view text);

struct FluencyScore {
  double value;
  ScoreKind kind;
  UnitSpace unit_space;
};

// (ln p_M(S) - ln p_u(S)) / |S|
FluencyScore slor(double log_prob, double unigram_log_prob, std::size_t scored_length,
                  UnitSpace space = UnitSpace::kWord);
// ln p_M(S) / |S|
FluencyScore nce(double log_prob, std::size_t scored_length, UnitSpace space = UnitSpace::kWord);
// exp(-NCE)
FluencyScore ppl(double log_prob, std::size_t scored_length, UnitSpace space = UnitSpace::kWord);

struct ExternalScore {
  double log_prob;
  std::size_t scored_length;
  double unigram_log_prob;
};

/// Per-sentence log-probabilities produced by an external LM.
/// File format: header `#extscores v1`, then
/// `id<TAB>log_prob<TAB>scored_length<TAB>unigram_log_prob` rows.
class ExternalScoreTable {
 public:
  void insert(std::string id, ExternalScore score);
  const ExternalScore* find(std::string_view id) const;
  std::size_t size() const noexcept { return rows_.size(); }
  const std::map<std::string, ExternalScore, std::less<>>& rows() const noexcept { return rows_; }

  void save(std::ostream& out) const;
  static ExternalScoreTable load(std::istream& in);

 private:
  std::map<std::string, ExternalScore, std::less<>> rows_;
};

struct Sentence {
  std::string id;
  std::string text;
};

FluencyScore score_sentence(const NGramModel& model, const TokenSequence& tokens, ScoreKind kind,
                            UnitSpace space, const SubwordVocabulary* vocab);

/// Word space scores normalized tokens directly; WordPiece space segments
/// with `vocab` first and counts pieces for |S|. Throws kMissingVocabulary.
std::map<std::string, FluencyScore> score_dataset(const NGramModel& model,
                                                  std::span<const Sentence> sentences,
                                                  ScoreKind kind, UnitSpace space,
                                                  const SubwordVocabulary* vocab = nullptr);

/// Throws kMissingExternalScore for ids absent from the table.
std::map<std::string, FluencyScore> score_dataset(const ExternalScoreTable& table,
                                                  std::span<const Sentence> sentences,
                                                  ScoreKind kind,
                                                  UnitSpace space = UnitSpace::kWord);

}  // namespace fluency
