#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fluency/subword.hpp"
#include "fluency/text.hpp"

namespace fluency {

inline constexpr std::string_view kBeginSentence = "<s>";
inline constexpr std::string_view kEndSentence = "</s>";
inline constexpr std::string_view kUnknownToken = "<unk>";

/// Unigram probability given to <unk> when training left it with no count.
inline constexpr double kUnseenUnkProbability = 1e-7;

struct LmOptions {
  int order = 3;
  std::size_t unk_threshold = 1;
  double discount = 0.75;
};

struct SentenceLogProb {
  double log_prob;           // natural log, includes the </s> event
  std::size_t scored_length;  // prediction events = tokens + 1
};

/// Interpolated Kneser-Ney n-gram model with a fixed discount, plus the MLE
/// unigram table estimated on the same corpus. An order-1 model predicts
/// with the MLE table itself. Immutable after construction.
class NGramModel {
 public:
  using WordId = std::uint32_t;

  static NGramModel train(std::span<const TokenSequence> corpus, const LmOptions& options);
  static NGramModel train(std::span<const PieceSequence> corpus, const LmOptions& options);
  static NGramModel train(std::span<const std::vector<std::string>> corpus,
                          const LmOptions& options);

  int order() const noexcept { return order_; }
  double discount() const noexcept { return discount_; }

  /// Everything that can be predicted: </s>, <unk> and the kept tokens.
  std::vector<std::string> vocabulary() const;
  bool contains(std::string_view token) const;

  /// ln p(word | history); only the last order-1 history tokens are used and
  /// out-of-vocabulary tokens are read as <unk>.
  double conditional_logprob(std::span<const std::string> history, std::string_view word) const;
  /// ln p(token) from the MLE unigram table.
  double unigram_table_logprob(std::string_view token) const;

  SentenceLogProb sentence_logprob(std::span<const std::string> tokens) const;
  SentenceLogProb sentence_logprob(const TokenSequence& s) const { return sentence_logprob(s.span()); }
  SentenceLogProb sentence_logprob(const PieceSequence& s) const { return sentence_logprob(s.span()); }

  /// Sum of MLE unigram log-probabilities over the same events as
  /// sentence_logprob (tokens and </s>).
  double unigram_logprob(std::span<const std::string> tokens) const;
  double unigram_logprob(const TokenSequence& s) const { return unigram_logprob(s.span()); }
  double unigram_logprob(const PieceSequence& s) const { return unigram_logprob(s.span()); }

  /// Every history with stored statistics, each padded to order-1 tokens
  /// where the model saw shorter ones only through <s> padding.
  std::vector<std::vector<std::string>> histories() const;

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static NGramModel load(std::istream& in);
  static NGramModel load(const std::filesystem::path& path);

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<WordId>& key) const noexcept;
  };
  using Table = std::unordered_map<std::vector<WordId>, double, KeyHash>;

  NGramModel() = default;

  WordId id_of(std::string_view token) const;
  WordId intern(const std::string& token);
  double logprob_ids(std::span<const WordId> history, WordId word) const;
  void write_table(std::ostream& out, const Table& table) const;

  int order_ = 1;
  double discount_ = 0.75;
  std::vector<std::string> words_;  // id -> token; id 0 is <s>
  std::unordered_map<std::string, WordId> ids_;
  std::vector<Table> ngrams_;    // ngrams_[k-1]: key = k ids, value = ln p
  std::vector<Table> backoffs_;  // backoffs_[k-1]: key = k-1 history ids, value = ln gamma
  std::vector<double> unigram_mle_;  // by id; <s> holds 0
};

}  // namespace fluency
