#include "fluency/scorers.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "fluency/error.hpp"
#include "fluency/io.hpp"

namespace fluency {

std::string_view to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kSlor: return "slor";
    case ScoreKind::kNce: return "nce";
    case ScoreKind::kPpl: return "ppl";
  }
  return "?";
}

std::string_view to_string(UnitSpace space) {
  return space == UnitSpace::kWord ? "word" : "wordpiece";
}

std::optional<ScoreKind> parse_score_kind(std::string_view text) {
  if (text == "slor") return ScoreKind::kSlor;
  if (text == "nce") return ScoreKind::kNce;
  if (text == "ppl") return ScoreKind::kPpl;
  return std::nullopt;
}

FluencyScore slor(double log_prob, double unigram_log_prob, std::size_t scored_length,
                  UnitSpace space) {
  require(scored_length >= 1, ErrorCode::kZeroLength, "scored length must be positive");
  return {(log_prob - unigram_log_prob) / static_cast<double>(scored_length), ScoreKind::kSlor,
          space};
}

FluencyScore nce(double log_prob, std::size_t scored_length, UnitSpace space) {
  require(scored_length >= 1, ErrorCode::kZeroLength, "scored length must be positive");
  return {log_prob / static_cast<double>(scored_length), ScoreKind::kNce, space};
}

FluencyScore ppl(double log_prob, std::size_t scored_length, UnitSpace space) {
  return {std::exp(-nce(log_prob, scored_length, space).value), ScoreKind::kPpl, space};
}

namespace {

FluencyScore from_parts(double log_prob, double unigram_log_prob, std::size_t length,
                        ScoreKind kind, UnitSpace space) {
  switch (kind) {
    case ScoreKind::kSlor: return slor(log_prob, unigram_log_prob, length, space);
    case ScoreKind::kNce: return nce(log_prob, length, space);
    case ScoreKind::kPpl: return ppl(log_prob, length, space);
  }
  fail(ErrorCode::kInvalidArgument, "unknown score kind");
}

}  // namespace

void ExternalScoreTable::insert(std::string id, ExternalScore score) {
  require(score.scored_length >= 1, ErrorCode::kZeroLength, "scored length must be positive");
  require(score.log_prob <= 0.0 && score.unigram_log_prob <= 0.0, ErrorCode::kOutOfRange,
          "log-probabilities must be <= 0");
  if (!rows_.emplace(std::move(id), score).second) {
    fail(ErrorCode::kDuplicateId, "duplicate external score id");
  }
}

const ExternalScore* ExternalScoreTable::find(std::string_view id) const {
  auto it = rows_.find(id);
  return it == rows_.end() ? nullptr : &it->second;
}

void ExternalScoreTable::save(std::ostream& out) const {
  out << "#extscores v1\n";
  for (const auto& [id, s] : rows_) {
    out << id << '\t' << io::format_double(s.log_prob) << '\t' << s.scored_length << '\t'
        << io::format_double(s.unigram_log_prob) << '\n';
  }
}

ExternalScoreTable ExternalScoreTable::load(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const auto lines = io::split_lines(buffer.str());
  if (lines.empty() || lines[0] != "#extscores v1") {
    fail(ErrorCode::kFormatError, "missing '#extscores v1' header");
  }
  ExternalScoreTable table;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = io::split(lines[i], '\t');
    const std::string where = "external scores line " + std::to_string(i + 1);
    if (fields.size() != 4) fail(ErrorCode::kFormatError, where + ": expected 4 fields");
    try {
      const std::string length_text(fields[2]);
      std::size_t used = 0;
      const long long length = std::stoll(length_text, &used);
      if (used != length_text.size() || length < 1) throw std::invalid_argument("");
      table.insert(std::string(fields[0]),
                   {io::parse_double(fields[1]), static_cast<std::size_t>(length),
                    io::parse_double(fields[3])});
    } catch (const Error& e) {
      fail(ErrorCode::kFormatError, where + ": " + e.what());
    } catch (const std::exception&) {
      fail(ErrorCode::kFormatError, where + ": bad scored_length");
    }
  }
  return table;
}

FluencyScore score_sentence(const NGramModel& model, const TokenSequence& tokens, ScoreKind kind,
                            UnitSpace space, const SubwordVocabulary* vocab) {
  if (space == UnitSpace::kWord) {
    const auto lp = model.sentence_logprob(tokens);
    return from_parts(lp.log_prob, model.unigram_logprob(tokens), lp.scored_length, kind, space);
  }
  if (!vocab) fail(ErrorCode::kMissingVocabulary, "WordPiece scoring needs a subword vocabulary");
  const auto pieces = segment_sequence(tokens, *vocab);
  const auto lp = model.sentence_logprob(pieces);
  return from_parts(lp.log_prob, model.unigram_logprob(pieces), lp.scored_length, kind, space);
}

std::map<std::string, FluencyScore> score_dataset(const NGramModel& model,
                                                  std::span<const Sentence> sentences,
                                                  ScoreKind kind, UnitSpace space,
                                                  const SubwordVocabulary* vocab) {
  if (space == UnitSpace::kWordPiece && !vocab) {
    fail(ErrorCode::kMissingVocabulary, "WordPiece scoring needs a subword vocabulary");
  }
  std::map<std::string, FluencyScore> out;
  for (const auto& sentence : sentences) {
    const auto score = score_sentence(model, normalize(sentence.text), kind, space, vocab);
    if (!out.emplace(sentence.id, score).second) {
      fail(ErrorCode::kDuplicateId, "duplicate sentence id '" + sentence.id + "'");
    }
  }
  return out;
}

std::map<std::string, FluencyScore> score_dataset(const ExternalScoreTable& table,
                                                  std::span<const Sentence> sentences,
                                                  ScoreKind kind, UnitSpace space) {
  std::map<std::string, FluencyScore> out;
  for (const auto& sentence : sentences) {
    const auto* row = table.find(sentence.id);
    if (!row) fail(ErrorCode::kMissingExternalScore, "no external score for id '" + sentence.id + "'");
    out.emplace(sentence.id,
                from_parts(row->log_prob, row->unigram_log_prob, row->scored_length, kind, space));
  }
  return out;
}

}  // namespace fluency
