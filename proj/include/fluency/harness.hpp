#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fluency/ngram_lm.hpp"
#include "fluency/scorers.hpp"
#include "fluency/subword.hpp"

namespace fluency {

// ---------------------------------------------------------------- dataset

inline constexpr double kMinRating = 1.0;
inline constexpr double kMaxRating = 3.0;

struct DatasetRecord {
  std::string id;
  std::string system;
  std::string domain;
  std::string output;
  std::vector<std::string> references;
  std::vector<double> fluency_ratings;
};

/// JSONL, one record per line. Throws kParseError (with line number),
/// kDuplicateId, kRatingOutOfRange.
std::vector<DatasetRecord> parse_dataset(std::string_view jsonl);
std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path);
std::string dataset_to_jsonl(std::span<const DatasetRecord> records);

/// Unweighted mean of the record's ratings.
double aggregate_ratings(const DatasetRecord& record);

/// Quadratic weighted kappa averaged over all pairs of rater positions,
/// each pair restricted to records rated by both. Ratings are rounded to
/// the nearest category in 1..3. Empty when no pair is usable.
std::optional<double> rating_agreement(std::span<const DatasetRecord> records);

std::vector<Sentence> to_sentences(std::span<const DatasetRecord> records);

// ----------------------------------------------------------- score tables

/// Metric scores keyed by record id. File format: header
/// `#scores v1 metric=<name>[ refs=<label>]`, then `id<TAB>value` rows.
struct ScoreTable {
  std::string metric;
  std::string refs = "0";
  std::map<std::string, double> values;

  std::string serialize() const;
  static ScoreTable parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static ScoreTable load(const std::filesystem::path& path);
};

ScoreTable make_score_table(std::string metric, std::string refs,
                            const std::map<std::string, FluencyScore>& scores);

enum class OverlapMetric { kRougeLSingle, kRougeLMulti, kLr2F, kLr2R, kLr3F, kLr3R };

std::string_view to_string(OverlapMetric metric);
std::optional<OverlapMetric> parse_overlap_metric(std::string_view text);

/// Reference-based scores for every record. Throws kNoReferences when a
/// record has none.
ScoreTable overlap_scores(std::span<const DatasetRecord> records, OverlapMetric metric);

// ------------------------------------------------------------- evaluation

enum class GroupBy { kNone, kSystem, kDomain };

std::string_view to_string(GroupBy group_by);
std::optional<GroupBy> parse_group_by(std::string_view text);

inline constexpr double kSignificanceLevel = 0.05;

struct ReportCell {
  std::optional<double> value;    // empty: degenerate variance or too few samples
  std::optional<double> p_value;  // test against the best metric of the column
  bool best = false;
  bool significantly_worse = false;
};

struct MetricRow {
  std::string name;
  std::string refs;
  ReportCell overall_pearson;
  ReportCell overall_mse;
  std::vector<ReportCell> group_pearson;  // parallel to MetricReport::groups
  std::vector<ReportCell> group_mse;
};

struct MetricReport {
  GroupBy group_by = GroupBy::kNone;
  std::size_t total = 0;
  std::vector<std::string> groups;
  std::vector<std::size_t> group_sizes;
  std::vector<MetricRow> rows;
  std::optional<double> rating_kappa;
};

/// Pearson and linear-fit MSE against aggregated ratings, overall and per
/// group. With several metrics, every column is tested against its best
/// metric (Fisher z for Pearson, Welch t on squared residuals for MSE).
/// Throws kMissingScore when a record has no score.
MetricReport evaluate(std::span<const ScoreTable> metrics, std::span<const DatasetRecord> records,
                      GroupBy group_by);

MetricReport evaluate(const std::map<std::string, double>& metric_scores,
                      std::span<const DatasetRecord> records, GroupBy group_by);

/// Markdown table: metric, refs, Pearson and MSE columns with significance stars.
std::string render_table(const MetricReport& report);
std::string render_json(const MetricReport& report);

// ------------------------------------------------------------ combination

struct Normalization {
  double mean;
  double variance;

  double apply(double x) const;
};

Normalization fit_normalization(const std::map<std::string, double>& values,
                                std::span<const std::string> ids);

struct RidgeWeights {
  double rouge;
  double slor;
  double intercept;
  double lambda;
  double dev_mse;
};

struct CombinedMetric {
  std::string name;  // "ROUGE-LM" or "trained"
  Normalization rouge;
  Normalization slor;
  std::optional<RidgeWeights> ridge;

  double apply(double rouge_score, double slor_score) const;
  std::string to_json() const;
};

struct CombinedScores {
  CombinedMetric metric;
  std::map<std::string, double> values;
};

/// z_rouge + z_slor, with normalization statistics taken over `fit_ids`.
/// Both maps must hold the same ids. Throws kDegenerateVariance / kMissingScore.
CombinedScores combine_rouge_lm(const std::map<std::string, double>& rouge,
                                const std::map<std::string, double>& slor,
                                std::span<const std::string> fit_ids);

inline constexpr std::size_t kMinTrainingPoints = 10;
inline constexpr double kRidgeGrid[] = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};

/// Ridge regression on the two train-set z-scored features; the penalty is
/// chosen on `dev_ids` by MSE. Throws kTooFewSamples.
CombinedMetric train_combiner(const std::map<std::string, std::pair<double, double>>& features,
                              const std::map<std::string, double>& targets,
                              std::span<const std::string> train_ids,
                              std::span<const std::string> dev_ids);

// ------------------------------------------------------------------ split

struct SplitSizes {
  std::size_t train;
  std::size_t dev;
  std::size_t test;
};

struct DatasetSplit {
  std::uint64_t seed = 0;
  std::vector<std::string> train;
  std::vector<std::string> dev;
  std::vector<std::string> test;

  std::string serialize() const;
  static DatasetSplit parse(std::string_view text);
};

/// Sorts ids, shuffles them with a seeded Fisher-Yates and slices
/// contiguous train/dev/test blocks. Throws kSizesExceedDataset.
DatasetSplit split_dataset(std::span<const std::string> ids, SplitSizes sizes, std::uint64_t seed);

}  // namespace fluency
