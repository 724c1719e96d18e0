#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fluency {

/// Normalized tokens of one sentence: lowercase, whitespace-free, never empty.
class TokenSequence {
 public:
  /// Throws Error(kPrecondition) if `tokens` is empty or a token is empty or
  /// contains ASCII whitespace.
  explicit TokenSequence(std::vector<std::string> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::span<const std::string> span() const noexcept { return tokens_; }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }
  auto begin() const noexcept { return tokens_.begin(); }
  auto end() const noexcept { return tokens_.end(); }

  /// Tokens joined with single spaces.
  std::string join() const;

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;

 private:
  std::vector<std::string> tokens_;
};

/// Lowercases (full Unicode), splits the punctuation characters .,!?;:"()[]
/// into standalone tokens and splits the rest on whitespace runs.
/// Throws Error(kEmptyInput) when nothing remains.
TokenSequence normalize(std::string_view raw);

/// Full Unicode lowercasing of a UTF-8 string.
std::string to_lower(std::string_view utf8);

/// Splits UTF-8 text into code points, each returned as its UTF-8 bytes.
std::vector<std::string> utf8_characters(std::string_view utf8);

/// Reads a corpus: one sentence per line; blank lines are skipped.
std::vector<TokenSequence> read_corpus(std::string_view text);

}  // namespace fluency
