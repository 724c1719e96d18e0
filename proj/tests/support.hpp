#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fluency/text.hpp"

namespace testing_support {

inline fluency::TokenSequence toks(const std::string& spaced) {
  std::istringstream in(spaced);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return fluency::TokenSequence(std::move(out));
}

inline std::vector<std::string> words(const std::string& spaced) {
  return toks(spaced).tokens();
}

// Small deterministic generator; every property test seeds its own.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }

  std::string word(const std::string& alphabet, int min_len, int max_len) {
    std::string w;
    const int len = integer(min_len, max_len);
    for (int i = 0; i < len; ++i) w += alphabet[index(alphabet.size())];
    return w;
  }

  std::vector<std::string> sentence(const std::vector<std::string>& lexicon, int min_len, int max_len) {
    std::vector<std::string> s;
    const int len = integer(min_len, max_len);
    for (int i = 0; i < len; ++i) s.push_back(lexicon[index(lexicon.size())]);
    return s;
  }

  std::vector<fluency::TokenSequence> corpus(const std::vector<std::string>& lexicon, std::size_t n,
                                             int min_len, int max_len) {
    std::vector<fluency::TokenSequence> out;
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(sentence(lexicon, min_len, max_len));
    return out;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace testing_support

#include <cmath>

#include "fluency/io.hpp"

namespace testing_support {

// Order-2 model where p(france|visited)/p_u(france) == p(tuvalu|visited)/p_u(tuvalu) == 3.
inline std::string france_tuvalu_model() {
  auto row = [](double p, const std::string& gram) {
    return fluency::io::format_double(std::log(p)) + "\t" + gram + "\n";
  };
  std::string unigrams = row(0.25, "</s>") + row(1e-7, "<unk>") + row(0.249, "france") +
                         row(0.25, "i") + row(0.001, "tuvalu") + row(0.25, "visited");
  std::string text = "#nglm v1 order=2 discount=0.75\n\\unigram-mle:\n" + unigrams;
  text += "\\1-grams:\n" + unigrams;
  text += "\\2-grams:\n" + row(0.9, "<s> i") + row(0.9, "france </s>") + row(0.9, "i visited") +
          row(0.9, "tuvalu </s>") + row(0.747, "visited france") + row(0.003, "visited tuvalu");
  text += "\\2-backoff:\n" + row(0.1, "<s>") + row(0.1, "france") + row(0.1, "i") +
          row(0.1, "tuvalu") + row(0.25, "visited");
  text += "\\end\\\n";
  return text;
}

}  // namespace testing_support
