#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "fluency/text.hpp"

namespace fluency {

inline constexpr std::string_view kUnkPiece = "<unk>";
inline constexpr std::string_view kContinuationMarker = "##";

/// Ordered piece sequence produced by segmentation. Pieces after the first of
/// each word carry the "##" continuation marker.
class PieceSequence {
 public:
  PieceSequence() = default;
  explicit PieceSequence(std::vector<std::string> pieces) : pieces_(std::move(pieces)) {}

  std::size_t size() const noexcept { return pieces_.size(); }
  bool empty() const noexcept { return pieces_.empty(); }
  const std::vector<std::string>& pieces() const noexcept { return pieces_; }
  std::span<const std::string> span() const noexcept { return pieces_; }
  const std::string& operator[](std::size_t i) const { return pieces_[i]; }
  auto begin() const noexcept { return pieces_.begin(); }
  auto end() const noexcept { return pieces_.end(); }

  void append(const PieceSequence& other);
  bool contains_unk() const;
  std::string join() const;

  friend bool operator==(const PieceSequence&, const PieceSequence&) = default;

 private:
  std::vector<std::string> pieces_;
};

/// Learned WordPiece inventory. Immutable once built.
class SubwordVocabulary {
 public:
  /// Pieces in insertion order; must contain "<unk>" and no duplicates.
  SubwordVocabulary(std::vector<std::string> pieces, std::size_t target_size);

  const std::vector<std::string>& pieces() const noexcept { return pieces_; }
  std::size_t size() const noexcept { return pieces_.size(); }
  std::size_t target_size() const noexcept { return target_size_; }
  bool contains(std::string_view piece) const;
  /// Longest piece length in code points, ignoring the continuation marker.
  std::size_t max_piece_chars() const noexcept { return max_piece_chars_; }

  void save(std::ostream& out) const;
  static SubwordVocabulary load(std::istream& in);

 private:
  std::vector<std::string> pieces_;
  std::unordered_set<std::string> index_;
  std::size_t target_size_;
  std::size_t max_piece_chars_ = 0;
};

/// Observable state of one vocabulary learning step, for diagnostics and tests.
struct MergeStep {
  std::string left;
  std::string right;
  std::string merged;
  long long pair_count;
  double log_likelihood;  // corpus unigram log-likelihood after the merge
};

struct LearnTrace {
  double initial_log_likelihood = 0.0;
  std::vector<MergeStep> steps;
};

/// Greedy likelihood-gain merging starting from the observed character
/// alphabet. Stops at `target_size` pieces or when no merge raises the corpus
/// unigram log-likelihood. Throws kCorpusEmpty / kTargetTooSmall.
SubwordVocabulary learn_vocabulary(std::span<const TokenSequence> corpus,
                                   std::size_t target_size,
                                   LearnTrace* trace = nullptr);

/// Greedy longest-match segmentation; the whole token becomes <unk> when some
/// position has no matching piece.
PieceSequence segment(std::string_view token, const SubwordVocabulary& vocab);

PieceSequence segment_sequence(const TokenSequence& tokens, const SubwordVocabulary& vocab);

struct Reconstruction {
  TokenSequence tokens;
  bool contains_unk;
};

/// Inverse of segment_sequence. <unk> pieces come back as the token "<unk>"
/// and set `contains_unk`.
Reconstruction reconstruct(const PieceSequence& pieces);

}  // namespace fluency
