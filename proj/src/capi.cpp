#include "fluency/fluency.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "fluency/error.hpp"
#include "fluency/harness.hpp"
#include "fluency/io.hpp"
#include "fluency/ngram_lm.hpp"
#include "fluency/overlap.hpp"
#include "fluency/scorers.hpp"
#include "fluency/stats.hpp"
#include "fluency/subword.hpp"
#include "fluency/text.hpp"

struct flu_vocab {
  fluency::SubwordVocabulary value;
};
struct flu_lm {
  fluency::NGramModel value;
};
struct flu_external {
  fluency::ExternalScoreTable value;
};
struct flu_dataset {
  std::vector<fluency::DatasetRecord> records;
};
struct flu_scores {
  fluency::ScoreTable value;
};
struct flu_report {
  fluency::MetricReport value;
};
struct flu_split {
  fluency::DatasetSplit value;
};

namespace {

using fluency::ErrorCode;

thread_local std::string g_last_error;

flu_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return FLU_E_INVALID_ARGUMENT;
    case ErrorCode::kPrecondition: return FLU_E_PRECONDITION;
    case ErrorCode::kEmptyInput: return FLU_E_EMPTY_INPUT;
    case ErrorCode::kCorpusEmpty: return FLU_E_CORPUS_EMPTY;
    case ErrorCode::kTargetTooSmall: return FLU_E_TARGET_TOO_SMALL;
    case ErrorCode::kInvalidDiscount: return FLU_E_INVALID_DISCOUNT;
    case ErrorCode::kFormatError: return FLU_E_FORMAT;
    case ErrorCode::kZeroLength: return FLU_E_ZERO_LENGTH;
    case ErrorCode::kMissingVocabulary: return FLU_E_MISSING_VOCABULARY;
    case ErrorCode::kMissingExternalScore: return FLU_E_MISSING_EXTERNAL_SCORE;
    case ErrorCode::kNoReferences: return FLU_E_NO_REFERENCES;
    case ErrorCode::kDegenerateVariance: return FLU_E_DEGENERATE_VARIANCE;
    case ErrorCode::kLengthMismatch: return FLU_E_LENGTH_MISMATCH;
    case ErrorCode::kOutOfRange: return FLU_E_OUT_OF_RANGE;
    case ErrorCode::kDegenerateR: return FLU_E_DEGENERATE_R;
    case ErrorCode::kParseError: return FLU_E_PARSE;
    case ErrorCode::kDuplicateId: return FLU_E_DUPLICATE_ID;
    case ErrorCode::kRatingOutOfRange: return FLU_E_RATING_OUT_OF_RANGE;
    case ErrorCode::kMissingScore: return FLU_E_MISSING_SCORE;
    case ErrorCode::kTooFewSamples: return FLU_E_TOO_FEW_SAMPLES;
    case ErrorCode::kSizesExceedDataset: return FLU_E_SIZES_EXCEED_DATASET;
    case ErrorCode::kIoError: return FLU_E_IO;
  }
  return FLU_E_INTERNAL;
}

template <typename F>
flu_status guarded(F&& body) noexcept {
  try {
    body();
    return FLU_OK;
  } catch (const fluency::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FLU_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FLU_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return FLU_E_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) fluency::fail(ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Handle, typename... Args>
void emit(Handle** out, Args&&... args) {
  need(out, "output handle");
  *out = new Handle{std::forward<Args>(args)...};
}

fluency::ScoreKind kind_of(flu_score_kind kind) {
  switch (kind) {
    case FLU_SLOR: return fluency::ScoreKind::kSlor;
    case FLU_NCE: return fluency::ScoreKind::kNce;
    case FLU_PPL: return fluency::ScoreKind::kPpl;
  }
  fluency::fail(ErrorCode::kInvalidArgument, "unknown score kind");
}

std::string kind_label(flu_score_kind kind) {
  switch (kind) {
    case FLU_SLOR: return "SLOR";
    case FLU_NCE: return "NCE";
    case FLU_PPL: return "PPL";
  }
  return "?";
}

const std::vector<std::string>* part_ids(const flu_split* split, flu_split_part part) {
  if (!split) return nullptr;
  switch (part) {
    case FLU_PART_TRAIN: return &split->value.train;
    case FLU_PART_DEV: return &split->value.dev;
    case FLU_PART_TEST: return &split->value.test;
    case FLU_PART_ALL: return nullptr;
  }
  fluency::fail(ErrorCode::kInvalidArgument, "unknown split part");
}

}  // namespace

extern "C" {

const char* flu_version(void) { return "1.0.0"; }

const char* flu_last_error_message(void) { return g_last_error.c_str(); }

const char* flu_status_name(flu_status status) {
  switch (status) {
    case FLU_OK: return "OK";
    case FLU_E_INTERNAL: return "Internal";
    default: break;
  }
  if (status >= FLU_E_INVALID_ARGUMENT && status <= FLU_E_IO) {
    static const ErrorCode order[] = {
        ErrorCode::kInvalidArgument, ErrorCode::kPrecondition, ErrorCode::kEmptyInput,
        ErrorCode::kCorpusEmpty, ErrorCode::kTargetTooSmall, ErrorCode::kInvalidDiscount,
        ErrorCode::kFormatError, ErrorCode::kZeroLength, ErrorCode::kMissingVocabulary,
        ErrorCode::kMissingExternalScore, ErrorCode::kNoReferences, ErrorCode::kDegenerateVariance,
        ErrorCode::kLengthMismatch, ErrorCode::kOutOfRange, ErrorCode::kDegenerateR,
        ErrorCode::kParseError, ErrorCode::kDuplicateId, ErrorCode::kRatingOutOfRange,
        ErrorCode::kMissingScore, ErrorCode::kTooFewSamples, ErrorCode::kSizesExceedDataset,
        ErrorCode::kIoError};
    return fluency::to_string(order[status - 1]).data();
  }
  return "Unknown";
}

void flu_string_free(char* s) { std::free(s); }

flu_status flu_normalize(const char* sentence, char** out_tokens) {
  return guarded([&] {
    need(sentence, "sentence");
    need(out_tokens, "output");
    *out_tokens = copy_string(fluency::normalize(sentence).join());
  });
}

// ----------------------------------------------------------------- vocab

flu_status flu_vocab_learn(const char* corpus_path, size_t target_size, flu_vocab** out) {
  return guarded([&] {
    need(corpus_path, "corpus path");
    const auto corpus = fluency::read_corpus(fluency::io::read_file(corpus_path));
    emit(out, fluency::learn_vocabulary(corpus, target_size));
  });
}

flu_status flu_vocab_load(const char* path, flu_vocab** out) {
  return guarded([&] {
    need(path, "path");
    std::istringstream in(fluency::io::read_file(path));
    emit(out, fluency::SubwordVocabulary::load(in));
  });
}

flu_status flu_vocab_save(const flu_vocab* vocab, const char* path) {
  return guarded([&] {
    need(vocab, "vocab");
    need(path, "path");
    std::ostringstream text;
    vocab->value.save(text);
    fluency::io::write_file_atomic(path, text.str());
  });
}

size_t flu_vocab_size(const flu_vocab* vocab) { return vocab ? vocab->value.size() : 0; }

flu_status flu_vocab_segment(const flu_vocab* vocab, const char* sentence, char** out_pieces) {
  return guarded([&] {
    need(vocab, "vocab");
    need(sentence, "sentence");
    need(out_pieces, "output");
    *out_pieces =
        copy_string(fluency::segment_sequence(fluency::normalize(sentence), vocab->value).join());
  });
}

void flu_vocab_free(flu_vocab* vocab) { delete vocab; }

// -------------------------------------------------------------------- lm

flu_lm_options flu_lm_options_default(void) {
  const fluency::LmOptions defaults;
  return {defaults.order, defaults.unk_threshold, defaults.discount};
}

flu_status flu_lm_train(const char* corpus_path, const flu_lm_options* options,
                        const flu_vocab* vocab, flu_lm** out) {
  return guarded([&] {
    need(corpus_path, "corpus path");
    need(options, "options");
    const fluency::LmOptions opts{options->order, options->unk_threshold, options->discount};
    const auto corpus = fluency::read_corpus(fluency::io::read_file(corpus_path));
    if (!vocab) {
      emit(out, fluency::NGramModel::train(corpus, opts));
      return;
    }
    std::vector<fluency::PieceSequence> pieces;
    pieces.reserve(corpus.size());
    for (const auto& s : corpus) pieces.push_back(fluency::segment_sequence(s, vocab->value));
    emit(out, fluency::NGramModel::train(pieces, opts));
  });
}

flu_status flu_lm_load(const char* path, flu_lm** out) {
  return guarded([&] {
    need(path, "path");
    emit(out, fluency::NGramModel::load(std::filesystem::path(path)));
  });
}

flu_status flu_lm_save(const flu_lm* lm, const char* path) {
  return guarded([&] {
    need(lm, "model");
    need(path, "path");
    lm->value.save(std::filesystem::path(path));
  });
}

int flu_lm_order(const flu_lm* lm) { return lm ? lm->value.order() : 0; }

flu_status flu_lm_sentence(const flu_lm* lm, const flu_vocab* vocab, const char* sentence,
                           double* log_prob, double* unigram_log_prob, size_t* scored_length) {
  return guarded([&] {
    need(lm, "model");
    need(sentence, "sentence");
    const auto tokens = fluency::normalize(sentence);
    fluency::SentenceLogProb lp;
    double unigram;
    if (vocab) {
      const auto pieces = fluency::segment_sequence(tokens, vocab->value);
      lp = lm->value.sentence_logprob(pieces);
      unigram = lm->value.unigram_logprob(pieces);
    } else {
      lp = lm->value.sentence_logprob(tokens);
      unigram = lm->value.unigram_logprob(tokens);
    }
    if (log_prob) *log_prob = lp.log_prob;
    if (unigram_log_prob) *unigram_log_prob = unigram;
    if (scored_length) *scored_length = lp.scored_length;
  });
}

void flu_lm_free(flu_lm* lm) { delete lm; }

// --------------------------------------------------------------- scalars

flu_status flu_slor(double log_prob, double unigram_log_prob, size_t scored_length, double* out) {
  return guarded([&] {
    need(out, "output");
    *out = fluency::slor(log_prob, unigram_log_prob, scored_length).value;
  });
}

flu_status flu_nce(double log_prob, size_t scored_length, double* out) {
  return guarded([&] {
    need(out, "output");
    *out = fluency::nce(log_prob, scored_length).value;
  });
}

flu_status flu_ppl(double log_prob, size_t scored_length, double* out) {
  return guarded([&] {
    need(out, "output");
    *out = fluency::ppl(log_prob, scored_length).value;
  });
}

// -------------------------------------------------------------- external

flu_status flu_external_load(const char* path, flu_external** out) {
  return guarded([&] {
    need(path, "path");
    std::istringstream in(fluency::io::read_file(path));
    emit(out, fluency::ExternalScoreTable::load(in));
  });
}

size_t flu_external_size(const flu_external* table) { return table ? table->value.size() : 0; }

void flu_external_free(flu_external* table) { delete table; }

// --------------------------------------------------------------- dataset

flu_status flu_dataset_load(const char* path, flu_dataset** out) {
  return guarded([&] {
    need(path, "path");
    emit(out, fluency::load_dataset(path));
  });
}

size_t flu_dataset_size(const flu_dataset* dataset) { return dataset ? dataset->records.size() : 0; }

const char* flu_dataset_id(const flu_dataset* dataset, size_t index) {
  if (!dataset || index >= dataset->records.size()) return nullptr;
  return dataset->records[index].id.c_str();
}

flu_status flu_dataset_rating(const flu_dataset* dataset, size_t index, double* out) {
  return guarded([&] {
    need(dataset, "dataset");
    need(out, "output");
    if (index >= dataset->records.size()) fluency::fail(ErrorCode::kOutOfRange, "record index");
    *out = fluency::aggregate_ratings(dataset->records[index]);
  });
}

flu_status flu_dataset_kappa(const flu_dataset* dataset, double* out) {
  return guarded([&] {
    need(dataset, "dataset");
    need(out, "output");
    const auto kappa = fluency::rating_agreement(dataset->records);
    if (!kappa) fluency::fail(ErrorCode::kDegenerateVariance, "no usable rater pair");
    *out = *kappa;
  });
}

void flu_dataset_free(flu_dataset* dataset) { delete dataset; }

// ---------------------------------------------------------------- scores

flu_status flu_scores_load(const char* path, flu_scores** out) {
  return guarded([&] {
    need(path, "path");
    emit(out, fluency::ScoreTable::load(path));
  });
}

flu_status flu_scores_save(const flu_scores* scores, const char* path) {
  return guarded([&] {
    need(scores, "scores");
    need(path, "path");
    scores->value.save(path);
  });
}

size_t flu_scores_size(const flu_scores* scores) { return scores ? scores->value.values.size() : 0; }

const char* flu_scores_metric(const flu_scores* scores) {
  return scores ? scores->value.metric.c_str() : nullptr;
}

flu_status flu_scores_get(const flu_scores* scores, const char* id, double* out) {
  return guarded([&] {
    need(scores, "scores");
    need(id, "id");
    need(out, "output");
    auto it = scores->value.values.find(id);
    if (it == scores->value.values.end()) {
      fluency::fail(ErrorCode::kMissingScore, std::string("no score for id '") + id + "'");
    }
    *out = it->second;
  });
}

void flu_scores_free(flu_scores* scores) { delete scores; }

flu_status flu_score_dataset_lm(const flu_lm* lm, const flu_vocab* vocab, const flu_dataset* dataset,
                                flu_score_kind kind, const char* name, flu_scores** out) {
  return guarded([&] {
    need(lm, "model");
    need(dataset, "dataset");
    const auto space = vocab ? fluency::UnitSpace::kWordPiece : fluency::UnitSpace::kWord;
    const auto sentences = fluency::to_sentences(dataset->records);
    const auto scores = fluency::score_dataset(lm->value, sentences, kind_of(kind), space,
                                               vocab ? &vocab->value : nullptr);
    const std::string metric = name ? name : (vocab ? "WP" : "Word") + kind_label(kind);
    emit(out, fluency::make_score_table(metric, "0", scores));
  });
}

flu_status flu_score_dataset_external(const flu_external* table, const flu_dataset* dataset,
                                      flu_score_kind kind, const char* name, flu_scores** out) {
  return guarded([&] {
    need(table, "external table");
    need(dataset, "dataset");
    const auto sentences = fluency::to_sentences(dataset->records);
    const auto scores = fluency::score_dataset(table->value, sentences, kind_of(kind));
    const std::string metric = name ? name : "External" + kind_label(kind);
    emit(out, fluency::make_score_table(metric, "0", scores));
  });
}

flu_status flu_score_dataset_overlap(const flu_dataset* dataset, flu_overlap_metric metric,
                                     flu_scores** out) {
  return guarded([&] {
    need(dataset, "dataset");
    fluency::OverlapMetric m;
    switch (metric) {
      case FLU_ROUGE_L_SINGLE: m = fluency::OverlapMetric::kRougeLSingle; break;
      case FLU_ROUGE_L_MULTI: m = fluency::OverlapMetric::kRougeLMulti; break;
      case FLU_LR2_F: m = fluency::OverlapMetric::kLr2F; break;
      case FLU_LR2_R: m = fluency::OverlapMetric::kLr2R; break;
      case FLU_LR3_F: m = fluency::OverlapMetric::kLr3F; break;
      case FLU_LR3_R: m = fluency::OverlapMetric::kLr3R; break;
      default: fluency::fail(ErrorCode::kInvalidArgument, "unknown overlap metric");
    }
    emit(out, fluency::overlap_scores(dataset->records, m));
  });
}

flu_status flu_rouge_l(const char* candidate, const char* reference, double* precision,
                       double* recall, double* f_score) {
  return guarded([&] {
    need(candidate, "candidate");
    need(reference, "reference");
    const auto score = fluency::rouge_l(fluency::normalize(candidate), fluency::normalize(reference));
    if (precision) *precision = score.precision;
    if (recall) *recall = score.recall;
    if (f_score) *f_score = score.f_score;
  });
}

// ------------------------------------------------------------ evaluation

flu_status flu_evaluate(const flu_scores* const* metrics, size_t metric_count,
                        const flu_dataset* dataset, flu_group_by group_by, flu_report** out) {
  return guarded([&] {
    need(metrics, "metrics");
    need(dataset, "dataset");
    std::vector<fluency::ScoreTable> tables;
    for (size_t i = 0; i < metric_count; ++i) {
      need(metrics[i], "metric");
      tables.push_back(metrics[i]->value);
    }
    fluency::GroupBy g;
    switch (group_by) {
      case FLU_GROUP_NONE: g = fluency::GroupBy::kNone; break;
      case FLU_GROUP_SYSTEM: g = fluency::GroupBy::kSystem; break;
      case FLU_GROUP_DOMAIN: g = fluency::GroupBy::kDomain; break;
      default: fluency::fail(ErrorCode::kInvalidArgument, "unknown grouping");
    }
    emit(out, fluency::evaluate(tables, dataset->records, g));
  });
}

flu_status flu_report_table(const flu_report* report, char** out_text) {
  return guarded([&] {
    need(report, "report");
    need(out_text, "output");
    *out_text = copy_string(fluency::render_table(report->value));
  });
}

flu_status flu_report_json(const flu_report* report, char** out_json) {
  return guarded([&] {
    need(report, "report");
    need(out_json, "output");
    *out_json = copy_string(fluency::render_json(report->value));
  });
}

void flu_report_free(flu_report* report) { delete report; }

// ----------------------------------------------------------------- split

flu_status flu_split_create(const flu_dataset* dataset, size_t train_size, size_t dev_size,
                            size_t test_size, uint64_t seed, flu_split** out) {
  return guarded([&] {
    need(dataset, "dataset");
    std::vector<std::string> ids;
    for (const auto& r : dataset->records) ids.push_back(r.id);
    if (test_size == SIZE_MAX) {
      if (train_size > ids.size() || dev_size > ids.size() - train_size) {
        fluency::fail(ErrorCode::kSizesExceedDataset, "train + dev exceed the dataset");
      }
      test_size = ids.size() - train_size - dev_size;
    }
    emit(out, fluency::split_dataset(ids, {train_size, dev_size, test_size}, seed));
  });
}

flu_status flu_split_load(const char* path, flu_split** out) {
  return guarded([&] {
    need(path, "path");
    emit(out, fluency::DatasetSplit::parse(fluency::io::read_file(path)));
  });
}

flu_status flu_split_save(const flu_split* split, const char* path) {
  return guarded([&] {
    need(split, "split");
    need(path, "path");
    fluency::io::write_file_atomic(path, split->value.serialize());
  });
}

size_t flu_split_part_size(const flu_split* split, flu_split_part part) {
  if (!split) return 0;
  switch (part) {
    case FLU_PART_TRAIN: return split->value.train.size();
    case FLU_PART_DEV: return split->value.dev.size();
    case FLU_PART_TEST: return split->value.test.size();
    case FLU_PART_ALL:
      return split->value.train.size() + split->value.dev.size() + split->value.test.size();
  }
  return 0;
}

void flu_split_free(flu_split* split) { delete split; }

// ----------------------------------------------------------- combination

flu_status flu_combine_rouge_lm(const flu_scores* rouge, const flu_scores* slor,
                                const flu_split* split, flu_split_part fit_part, flu_scores** out,
                                char** out_model_json) {
  return guarded([&] {
    need(rouge, "rouge scores");
    need(slor, "slor scores");
    std::vector<std::string> fit;
    if (const auto* ids = part_ids(split, fit_part)) {
      fit = *ids;
    } else {
      for (const auto& [id, value] : rouge->value.values) fit.push_back(id);
    }
    auto combined = fluency::combine_rouge_lm(rouge->value.values, slor->value.values, fit);
    fluency::ScoreTable table{"ROUGE-LM", rouge->value.refs, std::move(combined.values)};
    std::string model = combined.metric.to_json();
    emit(out, std::move(table));
    if (out_model_json) *out_model_json = copy_string(model);
  });
}

flu_status flu_combine_trained(const flu_scores* rouge, const flu_scores* slor,
                               const flu_dataset* dataset, const flu_split* split, flu_scores** out,
                               char** out_model_json) {
  return guarded([&] {
    need(rouge, "rouge scores");
    need(slor, "slor scores");
    need(dataset, "dataset");
    need(split, "split");
    std::map<std::string, std::pair<double, double>> features;
    for (const auto& [id, r] : rouge->value.values) {
      auto it = slor->value.values.find(id);
      if (it != slor->value.values.end()) features.emplace(id, std::make_pair(r, it->second));
    }
    std::map<std::string, double> targets;
    for (const auto& record : dataset->records) {
      targets.emplace(record.id, fluency::aggregate_ratings(record));
    }
    const auto metric =
        fluency::train_combiner(features, targets, split->value.train, split->value.dev);
    fluency::ScoreTable table{"ROUGE+SLOR-trained", rouge->value.refs, {}};
    for (const auto& [id, f] : features) table.values.emplace(id, metric.apply(f.first, f.second));
    std::string model = metric.to_json();
    emit(out, std::move(table));
    if (out_model_json) *out_model_json = copy_string(model);
  });
}

// ----------------------------------------------------------------- stats

flu_status flu_pearson(const double* x, const double* y, size_t n, double* out) {
  return guarded([&] {
    need(x, "x");
    need(y, "y");
    need(out, "output");
    *out = fluency::stats::pearson({std::vector<double>(x, x + n), std::vector<double>(y, y + n)});
  });
}

flu_status flu_linear_mse(const double* x, const double* y, size_t n, double* out) {
  return guarded([&] {
    need(x, "x");
    need(y, "y");
    need(out, "output");
    *out = fluency::stats::mse({std::vector<double>(x, x + n), std::vector<double>(y, y + n)});
  });
}

flu_status flu_quadratic_weighted_kappa(const int* r1, const int* r2, size_t n, int categories,
                                        double* out) {
  return guarded([&] {
    need(r1, "r1");
    need(r2, "r2");
    need(out, "output");
    *out = fluency::stats::quadratic_weighted_kappa({r1, n}, {r2, n}, categories);
  });
}

flu_status flu_fisher_z_test(double r_a, double r_b, size_t n_a, size_t n_b, double* out) {
  return guarded([&] {
    need(out, "output");
    *out = fluency::stats::fisher_z_test(r_a, r_b, n_a, n_b);
  });
}

flu_status flu_two_sample_t_test(const double* a, size_t n_a, const double* b, size_t n_b,
                                 double* out) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(out, "output");
    *out = fluency::stats::two_sample_t_test({a, n_a}, {b, n_b});
  });
}

}  // extern "C"
