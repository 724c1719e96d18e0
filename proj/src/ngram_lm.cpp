#include "fluency/ngram_lm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "fluency/error.hpp"
#include "fluency/io.hpp"

namespace fluency {
namespace {

constexpr NGramModel::WordId kBosId = 0;
constexpr NGramModel::WordId kEosId = 1;
constexpr NGramModel::WordId kUnkId = 2;

using CountTable = std::map<std::vector<NGramModel::WordId>, long long>;

struct HistoryStats {
  long long total = 0;  // sum of (adjusted) counts over continuations
  long long types = 0;  // number of distinct continuations
};

}  // namespace

std::size_t NGramModel::KeyHash::operator()(const std::vector<WordId>& key) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (WordId id : key) {
    h ^= id;
    h *= 1099511628211ULL;
  }
  return h;
}

NGramModel::WordId NGramModel::intern(const std::string& token) {
  auto [it, inserted] = ids_.try_emplace(token, static_cast<WordId>(words_.size()));
  if (inserted) words_.push_back(token);
  return it->second;
}

NGramModel::WordId NGramModel::id_of(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end() || it->second == kBosId) return kUnkId;
  return it->second;
}

bool NGramModel::contains(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it != ids_.end() && it->second != kBosId;
}

std::vector<std::string> NGramModel::vocabulary() const {
  return {words_.begin() + 1, words_.end()};
}

NGramModel NGramModel::train(std::span<const TokenSequence> corpus, const LmOptions& options) {
  std::vector<std::vector<std::string>> plain;
  plain.reserve(corpus.size());
  for (const auto& s : corpus) plain.push_back(s.tokens());
  return train(std::span<const std::vector<std::string>>(plain), options);
}

NGramModel NGramModel::train(std::span<const PieceSequence> corpus, const LmOptions& options) {
  std::vector<std::vector<std::string>> plain;
  plain.reserve(corpus.size());
  for (const auto& s : corpus) plain.push_back(s.pieces());
  return train(std::span<const std::vector<std::string>>(plain), options);
}

NGramModel NGramModel::train(std::span<const std::vector<std::string>> corpus,
                             const LmOptions& options) {
  require(!corpus.empty(), ErrorCode::kCorpusEmpty, "no sentences to train on");
  require(options.order >= 1, ErrorCode::kInvalidArgument, "order must be at least 1");
  if (!(options.discount > 0.0 && options.discount < 1.0)) {
    fail(ErrorCode::kInvalidDiscount, "discount must lie in (0, 1), got " +
                                          io::format_double(options.discount));
  }
  for (const auto& sentence : corpus) {
    require(!sentence.empty(), ErrorCode::kPrecondition, "empty training sentence");
  }

  NGramModel model;
  model.order_ = options.order;
  model.discount_ = options.discount;
  model.intern(std::string(kBeginSentence));
  model.intern(std::string(kEndSentence));
  model.intern(std::string(kUnknownToken));

  auto is_marker = [](const std::string& t) { return t == kBeginSentence || t == kEndSentence; };
  std::map<std::string, long long> raw_counts;
  for (const auto& sentence : corpus) {
    for (const auto& token : sentence) {
      if (!is_marker(token)) ++raw_counts[token];
    }
  }
  for (const auto& [token, count] : raw_counts) {
    if (static_cast<std::size_t>(count) >= options.unk_threshold) model.intern(token);
  }

  std::vector<std::vector<WordId>> mapped;
  mapped.reserve(corpus.size());
  for (const auto& sentence : corpus) {
    std::vector<WordId> ids;
    ids.reserve(sentence.size() + 1);
    for (const auto& token : sentence) ids.push_back(model.id_of(token));
    ids.push_back(kEosId);
    mapped.push_back(std::move(ids));
  }

  const std::size_t vocab_size = model.words_.size();  // includes <s>
  const std::size_t predictable = vocab_size - 1;

  // MLE unigram table over the <unk>-mapped corpus, </s> included.
  std::vector<long long> unigram_counts(vocab_size, 0);
  long long events = 0;
  for (const auto& ids : mapped) {
    for (WordId id : ids) ++unigram_counts[id];
    events += static_cast<long long>(ids.size());
  }
  model.unigram_mle_.assign(vocab_size, 0.0);
  for (WordId id = 1; id < vocab_size; ++id) {
    model.unigram_mle_[id] =
        unigram_counts[id] > 0
            ? std::log(static_cast<double>(unigram_counts[id]) / static_cast<double>(events))
            : std::log(kUnseenUnkProbability);
  }

  const auto n = static_cast<std::size_t>(options.order);
  model.ngrams_.assign(n, Table{});
  model.backoffs_.assign(n, Table{});

  if (n == 1) {
    for (WordId id = 1; id < vocab_size; ++id) model.ngrams_[0][{id}] = model.unigram_mle_[id];
    return model;
  }

  // counts[k-1]: raw counts at the top order, continuation counts below.
  std::vector<CountTable> counts(n);
  for (const auto& ids : mapped) {
    std::vector<WordId> padded(n - 1, kBosId);
    padded.insert(padded.end(), ids.begin(), ids.end());
    for (std::size_t i = n - 1; i < padded.size(); ++i) {
      ++counts[n - 1][std::vector<WordId>(padded.begin() + static_cast<long>(i - n + 1),
                                          padded.begin() + static_cast<long>(i + 1))];
    }
  }
  for (std::size_t k = n - 1; k >= 1; --k) {
    for (const auto& [key, count] : counts[k]) {
      ++counts[k - 1][std::vector<WordId>(key.begin() + 1, key.end())];
    }
  }

  const double d = options.discount;
  for (std::size_t k = 1; k <= n; ++k) {
    std::map<std::vector<WordId>, HistoryStats> stats;
    for (const auto& [key, count] : counts[k - 1]) {
      auto& s = stats[std::vector<WordId>(key.begin(), key.end() - 1)];
      s.total += count;
      ++s.types;
    }
    if (k == 1) {
      const auto& s = stats[{}];
      const double total = static_cast<double>(s.total);
      const double uniform_weight = d * static_cast<double>(s.types) / total;
      for (WordId id = 1; id < vocab_size; ++id) {
        auto it = counts[0].find({id});
        const double c = it == counts[0].end() ? 0.0 : static_cast<double>(it->second);
        const double p = std::max(c - d, 0.0) / total +
                         uniform_weight / static_cast<double>(predictable);
        model.ngrams_[0][{id}] = std::log(p);
      }
      continue;
    }
    for (const auto& [history, s] : stats) {
      model.backoffs_[k - 1][history] =
          std::log(d * static_cast<double>(s.types) / static_cast<double>(s.total));
    }
    for (const auto& [key, count] : counts[k - 1]) {
      const std::vector<WordId> history(key.begin(), key.end() - 1);
      const auto& s = stats.at(history);
      const double gamma = d * static_cast<double>(s.types) / static_cast<double>(s.total);
      const double lower =
          std::exp(model.logprob_ids(std::span<const WordId>(history).subspan(1), key.back()));
      const double p = (static_cast<double>(count) - d) / static_cast<double>(s.total) +
                       gamma * lower;
      model.ngrams_[k - 1][key] = std::log(p);
    }
  }
  return model;
}

double NGramModel::logprob_ids(std::span<const WordId> history, WordId word) const {
  const std::size_t k = history.size() + 1;
  if (k == 1) {
    auto it = ngrams_[0].find({word});
    if (it == ngrams_[0].end()) {
      fail(ErrorCode::kFormatError, "model has no unigram entry for '" + words_[word] + "'");
    }
    return it->second;
  }
  std::vector<WordId> key(history.begin(), history.end());
  key.push_back(word);
  if (auto it = ngrams_[k - 1].find(key); it != ngrams_[k - 1].end()) return it->second;
  key.pop_back();
  double backoff = 0.0;
  if (auto it = backoffs_[k - 1].find(key); it != backoffs_[k - 1].end()) backoff = it->second;
  return backoff + logprob_ids(history.subspan(1), word);
}

double NGramModel::conditional_logprob(std::span<const std::string> history,
                                       std::string_view word) const {
  const std::size_t keep = std::min(history.size(), static_cast<std::size_t>(order_ - 1));
  std::vector<WordId> ids;
  ids.reserve(keep);
  for (std::size_t i = history.size() - keep; i < history.size(); ++i) {
    ids.push_back(history[i] == kBeginSentence ? kBosId : id_of(history[i]));
  }
  return logprob_ids(ids, id_of(word));
}

double NGramModel::unigram_table_logprob(std::string_view token) const {
  return unigram_mle_[id_of(token)];
}

SentenceLogProb NGramModel::sentence_logprob(std::span<const std::string> tokens) const {
  require(!tokens.empty(), ErrorCode::kPrecondition, "cannot score an empty sequence");
  const auto context = static_cast<std::size_t>(order_ - 1);
  std::vector<WordId> padded(context, kBosId);
  padded.reserve(context + tokens.size() + 1);
  for (const auto& token : tokens) padded.push_back(id_of(token));
  padded.push_back(kEosId);

  double total = 0.0;
  for (std::size_t i = context; i < padded.size(); ++i) {
    total += logprob_ids(std::span<const WordId>(padded).subspan(i - context, context), padded[i]);
  }
  return {total, tokens.size() + 1};
}

double NGramModel::unigram_logprob(std::span<const std::string> tokens) const {
  double total = unigram_mle_[kEosId];
  for (const auto& token : tokens) total += unigram_mle_[id_of(token)];
  return total;
}

std::vector<std::vector<std::string>> NGramModel::histories() const {
  std::vector<std::vector<std::string>> out{{}};
  for (std::size_t k = 2; k <= backoffs_.size(); ++k) {
    for (const auto& [history, value] : backoffs_[k - 1]) {
      std::vector<std::string> tokens;
      for (WordId id : history) tokens.push_back(words_[id]);
      out.push_back(std::move(tokens));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void NGramModel::write_table(std::ostream& out, const Table& table) const {
  std::vector<std::pair<std::string, double>> rows;
  rows.reserve(table.size());
  for (const auto& [key, value] : table) {
    std::string joined;
    for (std::size_t i = 0; i < key.size(); ++i) {
      if (i) joined.push_back(' ');
      joined += words_[key[i]];
    }
    rows.emplace_back(std::move(joined), value);
  }
  std::sort(rows.begin(), rows.end());
  for (const auto& [joined, value] : rows) out << io::format_double(value) << '\t' << joined << '\n';
}

void NGramModel::save(std::ostream& out) const {
  out << "#nglm v1 order=" << order_ << " discount=" << io::format_double(discount_) << '\n';
  Table unigrams;
  for (WordId id = 1; id < words_.size(); ++id) unigrams[{id}] = unigram_mle_[id];
  out << "\\unigram-mle:\n";
  write_table(out, unigrams);
  for (std::size_t k = 1; k <= ngrams_.size(); ++k) {
    out << '\\' << k << "-grams:\n";
    write_table(out, ngrams_[k - 1]);
    if (k >= 2) {
      out << '\\' << k << "-backoff:\n";
      write_table(out, backoffs_[k - 1]);
    }
  }
  out << "\\end\\\n";
}

void NGramModel::save(const std::filesystem::path& path) const {
  std::ostringstream out;
  save(out);
  io::write_file_atomic(path, out.str());
}

NGramModel NGramModel::load(const std::filesystem::path& path) {
  std::istringstream in(io::read_file(path));
  return load(in);
}

NGramModel NGramModel::load(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const auto lines = io::split_lines(buffer.str());
  std::size_t line_no = 0;
  auto bad = [&](const std::string& why) -> void {
    fail(ErrorCode::kFormatError, "line " + std::to_string(line_no) + ": " + why);
  };

  if (lines.empty()) fail(ErrorCode::kFormatError, "empty model file");
  NGramModel model;
  {
    line_no = 1;
    std::istringstream header(lines[0]);
    std::string magic, version, order_field, discount_field, extra;
    header >> magic >> version >> order_field >> discount_field;
    if (magic != "#nglm" || version != "v1" || !order_field.starts_with("order=") ||
        !discount_field.starts_with("discount=") || (header >> extra)) {
      bad("bad header '" + lines[0] + "'");
    }
    try {
      std::size_t used = 0;
      const std::string digits = order_field.substr(6);
      model.order_ = std::stoi(digits, &used);
      if (used != digits.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      bad("bad order");
    }
    if (model.order_ < 1) bad("order must be at least 1");
    model.discount_ = io::parse_double(discount_field.substr(9));
    if (!(model.discount_ > 0.0 && model.discount_ < 1.0)) bad("discount outside (0, 1)");
  }

  // Parse every block first; ids are assigned once the 1-gram vocabulary is known.
  std::vector<std::pair<std::vector<std::string>, double>> unigram_rows;
  std::vector<std::vector<std::pair<std::vector<std::string>, double>>> gram_rows(
      static_cast<std::size_t>(model.order_));
  std::vector<std::vector<std::pair<std::vector<std::string>, double>>> backoff_rows(
      static_cast<std::size_t>(model.order_));
  std::vector<std::pair<std::vector<std::string>, double>>* current = nullptr;
  std::size_t expected_len = 0;
  bool ended = false;
  std::vector<bool> seen_grams(static_cast<std::size_t>(model.order_), false);

  for (line_no = 2; line_no <= lines.size(); ++line_no) {
    const std::string& line = lines[line_no - 1];
    if (ended) {
      if (!line.empty()) bad("content after \\end\\");
      continue;
    }
    if (line.empty()) continue;
    if (line.front() == '\\') {
      if (line == "\\end\\") {
        ended = true;
        continue;
      }
      if (line == "\\unigram-mle:") {
        current = &unigram_rows;
        expected_len = 1;
        continue;
      }
      std::size_t k = 0;
      std::size_t pos = 1;
      while (pos < line.size() && std::isdigit(static_cast<unsigned char>(line[pos]))) {
        k = k * 10 + static_cast<std::size_t>(line[pos] - '0');
        ++pos;
      }
      const std::string suffix = line.substr(pos);
      if (k < 1 || k > static_cast<std::size_t>(model.order_)) bad("block order out of range");
      if (suffix == "-grams:") {
        current = &gram_rows[k - 1];
        expected_len = k;
        seen_grams[k - 1] = true;
      } else if (suffix == "-backoff:" && k >= 2) {
        current = &backoff_rows[k - 1];
        expected_len = k - 1;
      } else {
        bad("unknown block '" + line + "'");
      }
      continue;
    }
    if (!current) bad("entry outside of a block");
    const auto tab = line.find('\t');
    if (tab == std::string::npos) bad("expected logprob<TAB>ngram");
    const double value = io::parse_double(std::string_view(line).substr(0, tab));
    if (!std::isfinite(value)) bad("non-finite value");
    std::vector<std::string> tokens;
    for (auto field : io::split(std::string_view(line).substr(tab + 1), ' ')) {
      if (field.empty()) bad("empty token");
      tokens.emplace_back(field);
    }
    if (tokens.size() != expected_len) bad("wrong n-gram length");
    current->emplace_back(std::move(tokens), value);
  }
  if (!ended) fail(ErrorCode::kFormatError, "missing \\end\\ marker");
  for (std::size_t k = 0; k < seen_grams.size(); ++k) {
    if (!seen_grams[k]) fail(ErrorCode::kFormatError, "missing \\" + std::to_string(k + 1) + "-grams: block");
  }

  model.intern(std::string(kBeginSentence));
  model.intern(std::string(kEndSentence));
  model.intern(std::string(kUnknownToken));
  for (const auto& [tokens, value] : gram_rows[0]) {
    if (tokens[0] == kBeginSentence) fail(ErrorCode::kFormatError, "<s> cannot be predicted");
    model.intern(tokens[0]);
  }

  const std::size_t vocab_size = model.words_.size();
  auto lookup = [&](const std::string& token, bool allow_bos) -> WordId {
    auto it = model.ids_.find(token);
    if (it == model.ids_.end() || (it->second == kBosId && !allow_bos)) {
      fail(ErrorCode::kFormatError, "token '" + token + "' not in the 1-gram vocabulary");
    }
    return it->second;
  };
  auto check_prob = [](double value) {
    if (value > 0.0) fail(ErrorCode::kFormatError, "log-probability above 0");
  };

  model.ngrams_.assign(static_cast<std::size_t>(model.order_), Table{});
  model.backoffs_.assign(static_cast<std::size_t>(model.order_), Table{});
  model.unigram_mle_.assign(vocab_size, 0.0);
  std::vector<bool> has_unigram(vocab_size, false);
  for (const auto& [tokens, value] : unigram_rows) {
    check_prob(value);
    const WordId id = lookup(tokens[0], false);
    model.unigram_mle_[id] = value;
    has_unigram[id] = true;
  }
  for (WordId id = 1; id < vocab_size; ++id) {
    if (!has_unigram[id]) {
      fail(ErrorCode::kFormatError, "no \\unigram-mle: entry for '" + model.words_[id] + "'");
    }
  }
  for (std::size_t k = 1; k <= gram_rows.size(); ++k) {
    for (const auto& [tokens, value] : gram_rows[k - 1]) {
      check_prob(value);
      std::vector<WordId> key;
      for (std::size_t i = 0; i < tokens.size(); ++i) key.push_back(lookup(tokens[i], i + 1 < tokens.size()));
      if (!model.ngrams_[k - 1].emplace(std::move(key), value).second) {
        fail(ErrorCode::kFormatError, "duplicate n-gram entry");
      }
    }
    for (const auto& [tokens, value] : backoff_rows[k - 1]) {
      std::vector<WordId> key;
      for (const auto& token : tokens) key.push_back(lookup(token, true));
      if (!model.backoffs_[k - 1].emplace(std::move(key), value).second) {
        fail(ErrorCode::kFormatError, "duplicate backoff entry");
      }
    }
  }
  for (WordId id : {kEosId, kUnkId}) {
    if (!model.ngrams_[0].contains({id})) {
      fail(ErrorCode::kFormatError, "1-grams must include " + model.words_[id]);
    }
  }
  return model;
}

}  // namespace fluency
