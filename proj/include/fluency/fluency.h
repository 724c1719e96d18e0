/*
 * C interface to the fluency toolkit: referenceless fluency scores (SLOR,
 * NCE, PPL) over word or WordPiece n-gram language models, reference-based
 * overlap baselines, and metric-vs-human evaluation.
 *
 * Every object is an opaque handle released with its *_free function.
 * Functions return FLU_OK or an error status; the message for the most
 * recent failure on the calling thread is available from
 * flu_last_error_message(). Strings returned through char** out-parameters
 * are owned by the caller and released with flu_string_free().
 */
#ifndef FLUENCY_FLUENCY_H
#define FLUENCY_FLUENCY_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FLU_BUILDING_LIBRARY)
#    define FLU_API __declspec(dllexport)
#  else
#    define FLU_API __declspec(dllimport)
#  endif
#else
#  define FLU_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum flu_status {
  FLU_OK = 0,
  FLU_E_INVALID_ARGUMENT = 1,
  FLU_E_PRECONDITION = 2,
  FLU_E_EMPTY_INPUT = 3,
  FLU_E_CORPUS_EMPTY = 4,
  FLU_E_TARGET_TOO_SMALL = 5,
  FLU_E_INVALID_DISCOUNT = 6,
  FLU_E_FORMAT = 7,
  FLU_E_ZERO_LENGTH = 8,
  FLU_E_MISSING_VOCABULARY = 9,
  FLU_E_MISSING_EXTERNAL_SCORE = 10,
  FLU_E_NO_REFERENCES = 11,
  FLU_E_DEGENERATE_VARIANCE = 12,
  FLU_E_LENGTH_MISMATCH = 13,
  FLU_E_OUT_OF_RANGE = 14,
  FLU_E_DEGENERATE_R = 15,
  FLU_E_PARSE = 16,
  FLU_E_DUPLICATE_ID = 17,
  FLU_E_RATING_OUT_OF_RANGE = 18,
  FLU_E_MISSING_SCORE = 19,
  FLU_E_TOO_FEW_SAMPLES = 20,
  FLU_E_SIZES_EXCEED_DATASET = 21,
  FLU_E_IO = 22,
  FLU_E_INTERNAL = 99
} flu_status;

typedef enum flu_score_kind { FLU_SLOR = 0, FLU_NCE = 1, FLU_PPL = 2 } flu_score_kind;

typedef enum flu_group_by {
  FLU_GROUP_NONE = 0,
  FLU_GROUP_SYSTEM = 1,
  FLU_GROUP_DOMAIN = 2
} flu_group_by;

typedef enum flu_overlap_metric {
  FLU_ROUGE_L_SINGLE = 0,
  FLU_ROUGE_L_MULTI = 1,
  FLU_LR2_F = 2,
  FLU_LR2_R = 3,
  FLU_LR3_F = 4,
  FLU_LR3_R = 5
} flu_overlap_metric;

typedef enum flu_split_part {
  FLU_PART_ALL = 0,
  FLU_PART_TRAIN = 1,
  FLU_PART_DEV = 2,
  FLU_PART_TEST = 3
} flu_split_part;

typedef struct flu_vocab flu_vocab;
typedef struct flu_lm flu_lm;
typedef struct flu_external flu_external;
typedef struct flu_dataset flu_dataset;
typedef struct flu_scores flu_scores;
typedef struct flu_report flu_report;
typedef struct flu_split flu_split;

typedef struct flu_lm_options {
  int order;
  size_t unk_threshold;
  double discount;
} flu_lm_options;

FLU_API const char* flu_version(void);
FLU_API const char* flu_last_error_message(void);
FLU_API const char* flu_status_name(flu_status status);
FLU_API void flu_string_free(char* s);

/* Text. Writes the normalized tokens joined by single spaces. */
FLU_API flu_status flu_normalize(const char* sentence, char** out_tokens);

/* Subword vocabulary. Corpus files are UTF-8, one sentence per line. */
FLU_API flu_status flu_vocab_learn(const char* corpus_path, size_t target_size, flu_vocab** out);
FLU_API flu_status flu_vocab_load(const char* path, flu_vocab** out);
FLU_API flu_status flu_vocab_save(const flu_vocab* vocab, const char* path);
FLU_API size_t flu_vocab_size(const flu_vocab* vocab);
/* Normalizes `sentence` and writes its pieces joined by single spaces. */
FLU_API flu_status flu_vocab_segment(const flu_vocab* vocab, const char* sentence, char** out_pieces);
FLU_API void flu_vocab_free(flu_vocab* vocab);

/* Language model. With a non-null vocab the corpus is segmented into pieces first. */
FLU_API flu_lm_options flu_lm_options_default(void);
FLU_API flu_status flu_lm_train(const char* corpus_path, const flu_lm_options* options,
                                const flu_vocab* vocab, flu_lm** out);
FLU_API flu_status flu_lm_load(const char* path, flu_lm** out);
FLU_API flu_status flu_lm_save(const flu_lm* lm, const char* path);
FLU_API int flu_lm_order(const flu_lm* lm);
/* Natural-log sentence and unigram probabilities and the number of scored
 * events (tokens or pieces plus the end marker). `vocab` selects WordPiece units. */
FLU_API flu_status flu_lm_sentence(const flu_lm* lm, const flu_vocab* vocab, const char* sentence,
                                   double* log_prob, double* unigram_log_prob,
                                   size_t* scored_length);
FLU_API void flu_lm_free(flu_lm* lm);

/* Scalar scores. */
FLU_API flu_status flu_slor(double log_prob, double unigram_log_prob, size_t scored_length,
                            double* out);
FLU_API flu_status flu_nce(double log_prob, size_t scored_length, double* out);
FLU_API flu_status flu_ppl(double log_prob, size_t scored_length, double* out);

/* External LM scores: TSV with header `#extscores v1`. */
FLU_API flu_status flu_external_load(const char* path, flu_external** out);
FLU_API size_t flu_external_size(const flu_external* table);
FLU_API void flu_external_free(flu_external* table);

/* Dataset JSONL. */
FLU_API flu_status flu_dataset_load(const char* path, flu_dataset** out);
FLU_API size_t flu_dataset_size(const flu_dataset* dataset);
FLU_API const char* flu_dataset_id(const flu_dataset* dataset, size_t index);
FLU_API flu_status flu_dataset_rating(const flu_dataset* dataset, size_t index, double* out);
/* Mean pairwise quadratic weighted kappa; FLU_E_DEGENERATE_VARIANCE when no pair is usable. */
FLU_API flu_status flu_dataset_kappa(const flu_dataset* dataset, double* out);
FLU_API void flu_dataset_free(flu_dataset* dataset);

/* Score tables: TSV with header `#scores v1 metric=<name>[ refs=<label>]`. */
FLU_API flu_status flu_scores_load(const char* path, flu_scores** out);
FLU_API flu_status flu_scores_save(const flu_scores* scores, const char* path);
FLU_API size_t flu_scores_size(const flu_scores* scores);
FLU_API const char* flu_scores_metric(const flu_scores* scores);
FLU_API flu_status flu_scores_get(const flu_scores* scores, const char* id, double* out);
FLU_API void flu_scores_free(flu_scores* scores);

/* `vocab` non-null selects WordPiece units. `name` may be null for a default. */
FLU_API flu_status flu_score_dataset_lm(const flu_lm* lm, const flu_vocab* vocab,
                                        const flu_dataset* dataset, flu_score_kind kind,
                                        const char* name, flu_scores** out);
FLU_API flu_status flu_score_dataset_external(const flu_external* table, const flu_dataset* dataset,
                                              flu_score_kind kind, const char* name,
                                              flu_scores** out);
FLU_API flu_status flu_score_dataset_overlap(const flu_dataset* dataset, flu_overlap_metric metric,
                                             flu_scores** out);

/* Overlap of two single sentences (both normalized first). */
FLU_API flu_status flu_rouge_l(const char* candidate, const char* reference, double* precision,
                               double* recall, double* f_score);

/* Evaluation report against aggregated human ratings. */
FLU_API flu_status flu_evaluate(const flu_scores* const* metrics, size_t metric_count,
                                const flu_dataset* dataset, flu_group_by group_by,
                                flu_report** out);
FLU_API flu_status flu_report_table(const flu_report* report, char** out_text);
FLU_API flu_status flu_report_json(const flu_report* report, char** out_json);
FLU_API void flu_report_free(flu_report* report);

/* Train/dev/test split. `test_size` SIZE_MAX takes the remainder. */
FLU_API flu_status flu_split_create(const flu_dataset* dataset, size_t train_size, size_t dev_size,
                                    size_t test_size, uint64_t seed, flu_split** out);
FLU_API flu_status flu_split_load(const char* path, flu_split** out);
FLU_API flu_status flu_split_save(const flu_split* split, const char* path);
FLU_API size_t flu_split_part_size(const flu_split* split, flu_split_part part);
FLU_API void flu_split_free(flu_split* split);

/* ROUGE-LM: z-normalized ROUGE plus z-normalized SLOR. Normalization
 * statistics come from `fit_part` of `split` (all scored ids when split is
 * null or part is FLU_PART_ALL). `out_model_json` may be null. */
FLU_API flu_status flu_combine_rouge_lm(const flu_scores* rouge, const flu_scores* slor,
                                        const flu_split* split, flu_split_part fit_part,
                                        flu_scores** out, char** out_model_json);
/* Trained combiner fit on the split's train part, tuned on dev, applied to
 * every id present in both score tables. */
FLU_API flu_status flu_combine_trained(const flu_scores* rouge, const flu_scores* slor,
                                       const flu_dataset* dataset, const flu_split* split,
                                       flu_scores** out, char** out_model_json);

/* Statistics over plain arrays. */
FLU_API flu_status flu_pearson(const double* x, const double* y, size_t n, double* out);
FLU_API flu_status flu_linear_mse(const double* x, const double* y, size_t n, double* out);
FLU_API flu_status flu_quadratic_weighted_kappa(const int* r1, const int* r2, size_t n,
                                                int categories, double* out);
FLU_API flu_status flu_fisher_z_test(double r_a, double r_b, size_t n_a, size_t n_b, double* out);
FLU_API flu_status flu_two_sample_t_test(const double* a, size_t n_a, const double* b, size_t n_b,
                                         double* out);

#ifdef __cplusplus
}
#endif

#endif /* FLUENCY_FLUENCY_H */
