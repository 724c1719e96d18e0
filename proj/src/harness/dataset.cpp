#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fluency/error.hpp"
#include "fluency/harness.hpp"
#include "fluency/io.hpp"
#include "fluency/overlap.hpp"
#include "fluency/stats.hpp"

namespace fluency {
namespace {

using nlohmann::json;

[[noreturn]] void parse_error(std::size_t line, const std::string& why) {
  fail(ErrorCode::kParseError, "line " + std::to_string(line) + ": " + why);
}

std::string string_field(const json& obj, const char* key, bool required, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) parse_error(line, std::string("missing field '") + key + "'");
    return {};
  }
  if (!it->is_string()) parse_error(line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

void require_sentence(const std::string& text, std::size_t line, const char* what) {
  try {
    (void)normalize(text);
  } catch (const Error&) {
    parse_error(line, std::string(what) + " is empty");
  }
}

}  // namespace

std::vector<DatasetRecord> parse_dataset(std::string_view jsonl) {
  std::vector<DatasetRecord> records;
  std::set<std::string> ids;
  const auto lines = io::split_lines(jsonl);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (std::all_of(lines[i].begin(), lines[i].end(), [](char c) { return c == ' ' || c == '\t'; })) {
      continue;
    }
    json obj;
    try {
      obj = json::parse(lines[i]);
    } catch (const json::parse_error& e) {
      parse_error(line_no, e.what());
    }
    if (!obj.is_object()) parse_error(line_no, "record must be a JSON object");

    DatasetRecord r;
    r.id = string_field(obj, "id", true, line_no);
    if (r.id.empty()) parse_error(line_no, "empty id");
    r.system = string_field(obj, "system", false, line_no);
    r.domain = string_field(obj, "domain", false, line_no);
    r.output = string_field(obj, "output", true, line_no);
    require_sentence(r.output, line_no, "output");

    if (auto it = obj.find("references"); it != obj.end()) {
      if (!it->is_array()) parse_error(line_no, "'references' must be an array");
      for (const auto& ref : *it) {
        if (!ref.is_string()) parse_error(line_no, "references must be strings");
        r.references.push_back(ref.get<std::string>());
        require_sentence(r.references.back(), line_no, "reference");
      }
    }

    auto ratings = obj.find("fluency_ratings");
    if (ratings == obj.end() || !ratings->is_array() || ratings->empty()) {
      parse_error(line_no, "'fluency_ratings' must be a non-empty array");
    }
    for (const auto& value : *ratings) {
      if (!value.is_number()) parse_error(line_no, "ratings must be numbers");
      const double rating = value.get<double>();
      if (!(rating >= kMinRating && rating <= kMaxRating)) {
        fail(ErrorCode::kRatingOutOfRange,
             "line " + std::to_string(line_no) + ": rating " + io::format_double(rating) +
                 " outside [1, 3]");
      }
      r.fluency_ratings.push_back(rating);
    }

    if (!ids.insert(r.id).second) {
      fail(ErrorCode::kDuplicateId, "line " + std::to_string(line_no) + ": duplicate id '" + r.id + "'");
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path) {
  return parse_dataset(io::read_file(path));
}

std::string dataset_to_jsonl(std::span<const DatasetRecord> records) {
  std::string out;
  for (const auto& r : records) {
    json obj = {{"id", r.id},          {"system", r.system},         {"domain", r.domain},
                {"output", r.output}, {"references", r.references}, {"fluency_ratings", r.fluency_ratings}};
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

double aggregate_ratings(const DatasetRecord& record) {
  require(!record.fluency_ratings.empty(), ErrorCode::kPrecondition, "record has no ratings");
  return stats::mean(record.fluency_ratings);
}

std::optional<double> rating_agreement(std::span<const DatasetRecord> records) {
  std::size_t raters = 0;
  for (const auto& r : records) raters = std::max(raters, r.fluency_ratings.size());
  auto category = [](double rating) { return static_cast<int>(std::lround(rating)); };

  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < raters; ++a) {
    for (std::size_t b = a + 1; b < raters; ++b) {
      std::vector<int> first, second;
      for (const auto& r : records) {
        if (r.fluency_ratings.size() > b) {
          first.push_back(category(r.fluency_ratings[a]));
          second.push_back(category(r.fluency_ratings[b]));
        }
      }
      if (first.size() < 2) continue;
      // Skip pairs where both raters used a single identical category.
      const bool constant =
          std::all_of(first.begin(), first.end(), [&](int v) { return v == first[0]; }) &&
          std::all_of(second.begin(), second.end(), [&](int v) { return v == first[0]; });
      if (constant) continue;
      sum += stats::quadratic_weighted_kappa(first, second, 3);
      ++pairs;
    }
  }
  if (pairs == 0) return std::nullopt;
  return sum / static_cast<double>(pairs);
}

std::vector<Sentence> to_sentences(std::span<const DatasetRecord> records) {
  std::vector<Sentence> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.id, r.output});
  return out;
}

std::string ScoreTable::serialize() const {
  std::string out = "#scores v1 metric=" + metric;
  if (!refs.empty()) out += " refs=" + refs;
  out.push_back('\n');
  for (const auto& [id, value] : values) {
    out += id;
    out.push_back('\t');
    out += io::format_double(value);
    out.push_back('\n');
  }
  return out;
}

ScoreTable ScoreTable::parse(std::string_view text) {
  const auto lines = io::split_lines(text);
  if (lines.empty()) fail(ErrorCode::kFormatError, "empty score file");
  ScoreTable table;
  {
    const auto fields = io::split(lines[0], ' ');
    if (fields.size() < 3 || fields[0] != "#scores" || fields[1] != "v1" ||
        !fields[2].starts_with("metric=") || fields[2].size() == 7) {
      fail(ErrorCode::kFormatError, "bad score header '" + lines[0] + "'");
    }
    table.metric = std::string(fields[2].substr(7));
    for (std::size_t i = 3; i < fields.size(); ++i) {
      if (fields[i].starts_with("refs=")) {
        table.refs = std::string(fields[i].substr(5));
      } else if (!fields[i].empty()) {
        fail(ErrorCode::kFormatError, "unknown score header field '" + std::string(fields[i]) + "'");
      }
    }
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = io::split(lines[i], '\t');
    if (fields.size() != 2 || fields[0].empty()) {
      fail(ErrorCode::kFormatError, "score line " + std::to_string(i + 1) + ": expected id<TAB>value");
    }
    const double value = io::parse_double(fields[1]);
    if (!table.values.emplace(std::string(fields[0]), value).second) {
      fail(ErrorCode::kDuplicateId, "score line " + std::to_string(i + 1) + ": duplicate id");
    }
  }
  return table;
}

void ScoreTable::save(const std::filesystem::path& path) const {
  io::write_file_atomic(path, serialize());
}

ScoreTable ScoreTable::load(const std::filesystem::path& path) {
  return parse(io::read_file(path));
}

ScoreTable make_score_table(std::string metric, std::string refs,
                            const std::map<std::string, FluencyScore>& scores) {
  ScoreTable table{std::move(metric), std::move(refs), {}};
  for (const auto& [id, score] : scores) table.values.emplace(id, score.value);
  return table;
}

std::string_view to_string(OverlapMetric metric) {
  switch (metric) {
    case OverlapMetric::kRougeLSingle: return "ROUGE-L-single";
    case OverlapMetric::kRougeLMulti: return "ROUGE-L-mult";
    case OverlapMetric::kLr2F: return "LR2-F-mult";
    case OverlapMetric::kLr2R: return "LR2-R-mult";
    case OverlapMetric::kLr3F: return "LR3-F-mult";
    case OverlapMetric::kLr3R: return "LR3-R-mult";
  }
  return "?";
}

std::optional<OverlapMetric> parse_overlap_metric(std::string_view text) {
  if (text == "rouge-l-single") return OverlapMetric::kRougeLSingle;
  if (text == "rouge-l-mult") return OverlapMetric::kRougeLMulti;
  if (text == "lr2-f") return OverlapMetric::kLr2F;
  if (text == "lr2-r") return OverlapMetric::kLr2R;
  if (text == "lr3-f") return OverlapMetric::kLr3F;
  if (text == "lr3-r") return OverlapMetric::kLr3R;
  return std::nullopt;
}

ScoreTable overlap_scores(std::span<const DatasetRecord> records, OverlapMetric metric) {
  ScoreTable table;
  table.metric = std::string(to_string(metric));
  std::size_t min_refs = SIZE_MAX, max_refs = 0;
  for (const auto& r : records) {
    if (r.references.empty()) {
      fail(ErrorCode::kNoReferences, "record '" + r.id + "' has no references");
    }
    const auto candidate = normalize(r.output);
    std::vector<TokenSequence> refs;
    if (metric == OverlapMetric::kRougeLSingle) {
      refs.push_back(normalize(r.references.front()));
    } else {
      for (const auto& ref : r.references) refs.push_back(normalize(ref));
    }
    min_refs = std::min(min_refs, refs.size());
    max_refs = std::max(max_refs, refs.size());

    double value = 0.0;
    switch (metric) {
      case OverlapMetric::kRougeLSingle:
      case OverlapMetric::kRougeLMulti: value = rouge_l_multi(candidate, refs).f_score; break;
      case OverlapMetric::kLr2F: value = ngram_overlap(candidate, refs, 2, OverlapMeasure::kFScore).f_score; break;
      case OverlapMetric::kLr2R: value = ngram_overlap(candidate, refs, 2, OverlapMeasure::kRecall).recall; break;
      case OverlapMetric::kLr3F: value = ngram_overlap(candidate, refs, 3, OverlapMeasure::kFScore).f_score; break;
      case OverlapMetric::kLr3R: value = ngram_overlap(candidate, refs, 3, OverlapMeasure::kRecall).recall; break;
    }
    table.values.emplace(r.id, value);
  }
  if (records.empty()) {
    table.refs = "0";
  } else if (min_refs == max_refs) {
    table.refs = std::to_string(min_refs);
  } else {
    table.refs = std::to_string(min_refs) + "-" + std::to_string(max_refs);
  }
  return table;
}

}  // namespace fluency
