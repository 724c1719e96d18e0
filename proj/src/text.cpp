#include "fluency/text.hpp"

#include <unicode/uchar.h>
#include <unicode/locid.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "fluency/error.hpp"
#include "fluency/io.hpp"

namespace fluency {
namespace {

constexpr std::string_view kSplitPunctuation = ".,!?;:\"()[]";

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

}  // namespace

TokenSequence::TokenSequence(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  require(!tokens_.empty(), ErrorCode::kPrecondition, "token sequence must not be empty");
  for (const auto& token : tokens_) {
    require(!token.empty(), ErrorCode::kPrecondition, "empty token");
    for (char c : token) {
      require(!is_ascii_space(c), ErrorCode::kPrecondition, "token contains whitespace");
    }
  }
}

std::string TokenSequence::join() const {
  std::string out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens_[i];
  }
  return out;
}

std::string to_lower(std::string_view utf8) {
  auto text = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  text.toLower(icu::Locale::getRoot());
  std::string out;
  text.toUTF8String(out);
  return out;
}

std::vector<std::string> utf8_characters(std::string_view utf8) {
  std::vector<std::string> chars;
  const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    chars.emplace_back(utf8.substr(static_cast<std::size_t>(start),
                                   static_cast<std::size_t>(i - start)));
  }
  return chars;
}

TokenSequence normalize(std::string_view raw) {
  const std::string lowered = to_lower(raw);
  const auto* bytes = reinterpret_cast<const uint8_t*>(lowered.data());
  const auto length = static_cast<int32_t>(lowered.size());

  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };

  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c >= 0 && u_isUWhiteSpace(c)) {
      flush();
    } else if (c >= 0 && c < 0x80 &&
               kSplitPunctuation.find(static_cast<char>(c)) != std::string_view::npos) {
      flush();
      tokens.emplace_back(1, static_cast<char>(c));
    } else {
      current.append(lowered, static_cast<std::size_t>(start),
                     static_cast<std::size_t>(i - start));
    }
  }
  flush();
  if (tokens.empty()) fail(ErrorCode::kEmptyInput, "sentence is empty after trimming");
  return TokenSequence(std::move(tokens));
}

std::vector<TokenSequence> read_corpus(std::string_view text) {
  std::vector<TokenSequence> corpus;
  for (const auto& line : io::split_lines(text)) {
    bool blank = true;
    for (char c : line) blank = blank && is_ascii_space(c);
    if (blank) continue;
    try {
      corpus.push_back(normalize(line));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyInput) throw;
    }
  }
  return corpus;
}

}  // namespace fluency
