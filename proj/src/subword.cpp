#include "fluency/subword.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>

#include "fluency/error.hpp"

namespace fluency {
namespace {

bool is_continuation(std::string_view piece) {
  return piece.size() > kContinuationMarker.size() && piece.starts_with(kContinuationMarker);
}

std::string continuation(std::string_view chars) {
  return std::string(kContinuationMarker) + std::string(chars);
}

std::string strip_marker(std::string_view piece) {
  return std::string(is_continuation(piece) ? piece.substr(kContinuationMarker.size()) : piece);
}

double xlogx(long long c) {
  return c > 0 ? static_cast<double>(c) * std::log(static_cast<double>(c)) : 0.0;
}

using Pair = std::pair<std::string, std::string>;

struct WordType {
  std::vector<std::string> pieces;
  long long count;
};

class Learner {
 public:
  explicit Learner(std::span<const TokenSequence> corpus) {
    std::map<std::string, long long> word_counts;
    for (const auto& sentence : corpus) {
      for (const auto& token : sentence) ++word_counts[token];
    }
    std::set<std::string> alphabet;
    for (const auto& [word, count] : word_counts) {
      auto chars = utf8_characters(word);
      WordType type{{}, count};
      for (std::size_t i = 0; i < chars.size(); ++i) {
        distinct_chars_.insert(chars[i]);
        type.pieces.push_back(i == 0 ? chars[i] : continuation(chars[i]));
        piece_counts_[type.pieces.back()] += count;
        total_ += count;
        alphabet.insert(type.pieces.back());
      }
      words_.push_back(std::move(type));
    }
    alphabet_.assign(alphabet.begin(), alphabet.end());
  }

  std::size_t distinct_chars() const { return distinct_chars_.size(); }
  const std::vector<std::string>& alphabet() const { return alphabet_; }

  double log_likelihood() const {
    double sum = 0.0;
    for (const auto& [piece, count] : piece_counts_) sum += xlogx(count);
    return sum - xlogx(total_);
  }

  // Non-overlapping left-to-right occurrence counts, matching apply().
  std::map<Pair, long long> pair_counts() const {
    std::map<Pair, long long> counts;
    for (const auto& word : words_) {
      bool skip = false;
      for (std::size_t i = 0; i + 1 < word.pieces.size(); ++i) {
        const auto& a = word.pieces[i];
        const auto& b = word.pieces[i + 1];
        if (a == b && skip) {
          skip = false;
          continue;
        }
        counts[{a, b}] += word.count;
        skip = (a == b);
      }
    }
    return counts;
  }

  static std::string merged_piece(const Pair& pair) {
    return pair.first + strip_marker(pair.second);
  }

  double gain(const Pair& pair, long long k) const {
    const std::string merged = merged_piece(pair);
    auto count_of = [&](const std::string& p) {
      auto it = piece_counts_.find(p);
      return it == piece_counts_.end() ? 0LL : it->second;
    };
    const long long cl = count_of(pair.first);
    const long long cm = count_of(merged);
    double delta = xlogx(cm + k) - xlogx(cm);
    if (pair.first == pair.second) {
      delta += xlogx(cl - 2 * k) - xlogx(cl);
    } else {
      const long long cr = count_of(pair.second);
      delta += xlogx(cl - k) - xlogx(cl) + xlogx(cr - k) - xlogx(cr);
    }
    delta -= xlogx(total_ - k) - xlogx(total_);
    return delta;
  }

  void apply(const Pair& pair) {
    const std::string merged = merged_piece(pair);
    for (auto& word : words_) {
      std::vector<std::string> out;
      out.reserve(word.pieces.size());
      for (std::size_t i = 0; i < word.pieces.size();) {
        if (i + 1 < word.pieces.size() && word.pieces[i] == pair.first &&
            word.pieces[i + 1] == pair.second) {
          out.push_back(merged);
          decrement(pair.first, word.count);
          decrement(pair.second, word.count);
          piece_counts_[merged] += word.count;
          total_ -= word.count;
          i += 2;
        } else {
          out.push_back(word.pieces[i]);
          ++i;
        }
      }
      word.pieces = std::move(out);
    }
  }

 private:
  void decrement(const std::string& piece, long long by) {
    auto it = piece_counts_.find(piece);
    it->second -= by;
    if (it->second == 0) piece_counts_.erase(it);
  }

  std::vector<WordType> words_;
  std::unordered_map<std::string, long long> piece_counts_;
  long long total_ = 0;
  std::set<std::string> distinct_chars_;
  std::vector<std::string> alphabet_;
};

}  // namespace

void PieceSequence::append(const PieceSequence& other) {
  pieces_.insert(pieces_.end(), other.pieces_.begin(), other.pieces_.end());
}

bool PieceSequence::contains_unk() const {
  return std::find(pieces_.begin(), pieces_.end(), kUnkPiece) != pieces_.end();
}

std::string PieceSequence::join() const {
  std::string out;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (i) out.push_back(' ');
    out += pieces_[i];
  }
  return out;
}

SubwordVocabulary::SubwordVocabulary(std::vector<std::string> pieces, std::size_t target_size)
    : pieces_(std::move(pieces)), target_size_(target_size) {
  for (const auto& piece : pieces_) {
    require(!piece.empty(), ErrorCode::kFormatError, "empty vocabulary piece");
    for (char c : piece) {
      require(c != ' ' && c != '\t' && c != '\n' && c != '\r', ErrorCode::kFormatError,
              "vocabulary piece contains whitespace");
    }
    if (!index_.insert(piece).second) {
      fail(ErrorCode::kFormatError, "duplicate vocabulary piece '" + piece + "'");
    }
    if (piece != kUnkPiece) {
      max_piece_chars_ = std::max(max_piece_chars_, utf8_characters(strip_marker(piece)).size());
    }
  }
  require(index_.contains(std::string(kUnkPiece)), ErrorCode::kFormatError,
          "vocabulary lacks <unk>");
}

bool SubwordVocabulary::contains(std::string_view piece) const {
  return index_.contains(std::string(piece));
}

void SubwordVocabulary::save(std::ostream& out) const {
  out << "#wpvocab v1 target=" << target_size_ << '\n';
  for (const auto& piece : pieces_) out << piece << '\n';
}

SubwordVocabulary SubwordVocabulary::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::kFormatError, "missing vocabulary header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  constexpr std::string_view kHeader = "#wpvocab v1 target=";
  if (!std::string_view(line).starts_with(kHeader)) {
    fail(ErrorCode::kFormatError, "bad vocabulary header: " + line);
  }
  std::size_t target = 0;
  try {
    std::size_t used = 0;
    const std::string digits = line.substr(kHeader.size());
    target = std::stoull(digits, &used);
    if (used != digits.size() || digits.empty() || digits.front() == '-') throw std::invalid_argument("");
  } catch (const std::exception&) {
    fail(ErrorCode::kFormatError, "bad target size in header: " + line);
  }
  std::vector<std::string> pieces;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) fail(ErrorCode::kFormatError, "blank line in vocabulary file");
    pieces.push_back(line);
  }
  return SubwordVocabulary(std::move(pieces), target);
}

SubwordVocabulary learn_vocabulary(std::span<const TokenSequence> corpus, std::size_t target_size,
                                   LearnTrace* trace) {
  require(!corpus.empty(), ErrorCode::kCorpusEmpty, "no sentences to learn from");
  Learner learner(corpus);
  if (target_size < 2 * learner.distinct_chars()) {
    fail(ErrorCode::kTargetTooSmall,
         "target size " + std::to_string(target_size) + " below alphabet floor " +
             std::to_string(2 * learner.distinct_chars()));
  }

  std::vector<std::string> pieces{std::string(kUnkPiece)};
  std::set<std::string> known;
  for (const auto& piece : learner.alphabet()) {
    pieces.push_back(piece);
    known.insert(piece);
  }
  if (trace) trace->initial_log_likelihood = learner.log_likelihood();

  while (pieces.size() < target_size) {
    const auto counts = learner.pair_counts();
    const Pair* best = nullptr;
    long long best_count = 0;
    double best_gain = 0.0;
    // std::map iterates pairs in lexicographic order, so strict comparisons
    // keep the lexicographically smallest pair among exact ties.
    for (const auto& [pair, count] : counts) {
      // A word-initial piece starting with "##" would read back as a continuation.
      if (is_continuation(Learner::merged_piece(pair)) && !is_continuation(pair.first)) continue;
      const double g = learner.gain(pair, count);
      if (!best || g > best_gain || (g == best_gain && count > best_count)) {
        best = &pair;
        best_gain = g;
        best_count = count;
      }
    }
    if (!best || best_gain <= 0.0) break;

    const Pair chosen = *best;
    const std::string merged = Learner::merged_piece(chosen);
    learner.apply(chosen);
    if (known.insert(merged).second) pieces.push_back(merged);
    if (trace) {
      trace->steps.push_back({chosen.first, chosen.second, merged, best_count,
                              learner.log_likelihood()});
    }
  }
  return SubwordVocabulary(std::move(pieces), target_size);
}

PieceSequence segment(std::string_view token, const SubwordVocabulary& vocab) {
  const auto chars = utf8_characters(token);
  std::vector<std::string> pieces;
  std::size_t pos = 0;
  while (pos < chars.size()) {
    const std::size_t longest = std::min(chars.size() - pos, vocab.max_piece_chars());
    bool matched = false;
    for (std::size_t len = longest; len >= 1; --len) {
      std::string candidate;
      for (std::size_t i = pos; i < pos + len; ++i) candidate += chars[i];
      if (pos == 0) {
        if (candidate == kUnkPiece || is_continuation(candidate)) continue;
      } else {
        candidate = continuation(candidate);
      }
      if (vocab.contains(candidate)) {
        pieces.push_back(std::move(candidate));
        pos += len;
        matched = true;
        break;
      }
    }
    if (!matched) return PieceSequence({std::string(kUnkPiece)});
  }
  return PieceSequence(std::move(pieces));
}

PieceSequence segment_sequence(const TokenSequence& tokens, const SubwordVocabulary& vocab) {
  PieceSequence out;
  for (const auto& token : tokens) out.append(segment(token, vocab));
  return out;
}

Reconstruction reconstruct(const PieceSequence& pieces) {
  std::vector<std::string> words;
  bool unk = false;
  for (const auto& piece : pieces) {
    if (piece == kUnkPiece) {
      unk = true;
      words.push_back(piece);
    } else if (is_continuation(piece)) {
      require(!words.empty() && words.back() != kUnkPiece, ErrorCode::kPrecondition,
              "continuation piece without a word to extend");
      words.back() += piece.substr(kContinuationMarker.size());
    } else {
      words.push_back(piece);
    }
  }
  return {TokenSequence(std::move(words)), unk};
}

}  // namespace fluency
