// fluency: command-line front end over the libfluency C API.
#include <CLI11.hpp>

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <unistd.h>
#include <vector>

#include "fluency/fluency.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(flu_status status, const std::string& what) {
  if (status == FLU_OK) return;
  throw RuntimeError(what + ": " + flu_last_error_message());
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

using Vocab = std::unique_ptr<flu_vocab, Deleter<flu_vocab, flu_vocab_free>>;
using Model = std::unique_ptr<flu_lm, Deleter<flu_lm, flu_lm_free>>;
using External = std::unique_ptr<flu_external, Deleter<flu_external, flu_external_free>>;
using Dataset = std::unique_ptr<flu_dataset, Deleter<flu_dataset, flu_dataset_free>>;
using Scores = std::unique_ptr<flu_scores, Deleter<flu_scores, flu_scores_free>>;
using Report = std::unique_ptr<flu_report, Deleter<flu_report, flu_report_free>>;
using Split = std::unique_ptr<flu_split, Deleter<flu_split, flu_split_free>>;
using CString = std::unique_ptr<char, Deleter<char, flu_string_free>>;

void input_file(const std::string& path, const char* flag) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw ValidationError(std::string(flag) + ": no such file: " + path);
  }
}

void output_file(const std::string& path, const char* flag) {
  if (path.empty()) throw ValidationError(std::string(flag) + " is required");
  std::error_code ec;
  if (fs::is_directory(path, ec)) throw ValidationError(std::string(flag) + ": is a directory: " + path);
  fs::path parent = fs::path(path).parent_path();
  if (parent.empty()) parent = ".";
  if (!fs::is_directory(parent, ec)) {
    throw ValidationError(std::string(flag) + ": directory does not exist: " + parent.string());
  }
}

void write_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) throw RuntimeError("cannot write " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw RuntimeError("cannot rename onto " + path);
  }
}

Dataset load_dataset(const std::string& path) {
  flu_dataset* raw = nullptr;
  check(flu_dataset_load(path.c_str(), &raw), "loading " + path);
  return Dataset(raw);
}

Scores load_scores(const std::string& path) {
  flu_scores* raw = nullptr;
  check(flu_scores_load(path.c_str(), &raw), "loading " + path);
  return Scores(raw);
}

Split load_split(const std::string& path) {
  flu_split* raw = nullptr;
  check(flu_split_load(path.c_str(), &raw), "loading " + path);
  return Split(raw);
}

Vocab load_vocab(const std::string& path) {
  flu_vocab* raw = nullptr;
  check(flu_vocab_load(path.c_str(), &raw), "loading " + path);
  return Vocab(raw);
}

size_t parse_size(const std::string& text, const char* flag) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw ValidationError(std::string(flag) + ": expected a non-negative integer, got '" + text + "'");
  }
  errno = 0;
  const unsigned long long v = std::strtoull(text.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ValidationError(std::string(flag) + ": value out of range");
  return static_cast<size_t>(v);
}

// ------------------------------------------------------------ subcommands

struct TrainSubword {
  std::string corpus, out;
  size_t target_size = 0;

  void validate() const {
    input_file(corpus, "--corpus");
    output_file(out, "--out");
    if (target_size == 0) throw ValidationError("--target-size must be positive");
  }
  void run() const {
    flu_vocab* raw = nullptr;
    check(flu_vocab_learn(corpus.c_str(), target_size, &raw), "learning vocabulary");
    Vocab vocab(raw);
    check(flu_vocab_save(vocab.get(), out.c_str()), "saving vocabulary");
    std::cerr << "vocabulary: " << flu_vocab_size(vocab.get()) << " pieces -> " << out << "\n";
  }
};

struct TrainLm {
  std::string corpus, out, vocab;
  flu_lm_options options = flu_lm_options_default();

  void validate() const {
    input_file(corpus, "--corpus");
    if (!vocab.empty()) input_file(vocab, "--vocab");
    output_file(out, "--out");
    if (options.order < 1) throw ValidationError("--order must be at least 1");
    if (!(options.discount > 0.0 && options.discount < 1.0)) {
      throw ValidationError("--discount must lie in (0, 1)");
    }
    if (options.unk_threshold < 1) throw ValidationError("--unk-threshold must be at least 1");
  }
  void run() const {
    Vocab v;
    if (!vocab.empty()) v = load_vocab(vocab);
    flu_lm* raw = nullptr;
    check(flu_lm_train(corpus.c_str(), &options, v.get(), &raw), "training model");
    Model model(raw);
    check(flu_lm_save(model.get(), out.c_str()), "saving model");
    std::cerr << "model: order " << flu_lm_order(model.get()) << " -> " << out << "\n";
  }
};

flu_score_kind parse_kind(const std::string& kind) {
  if (kind == "slor") return FLU_SLOR;
  if (kind == "nce") return FLU_NCE;
  if (kind == "ppl") return FLU_PPL;
  throw ValidationError("--kind must be one of slor, nce, ppl");
}

struct Score {
  std::string lm, vocab, external, kind = "slor", data, out, name;

  void validate() const {
    parse_kind(kind);
    if (lm.empty() == external.empty()) throw ValidationError("exactly one of --lm, --external is required");
    if (!lm.empty()) input_file(lm, "--lm");
    if (!external.empty()) {
      input_file(external, "--external");
      if (!vocab.empty()) throw ValidationError("--vocab cannot be combined with --external");
    }
    if (!vocab.empty()) input_file(vocab, "--vocab");
    input_file(data, "--data");
    output_file(out, "--out");
  }
  void run() const {
    Dataset dataset = load_dataset(data);
    const char* label = name.empty() ? nullptr : name.c_str();
    flu_scores* raw = nullptr;
    if (!lm.empty()) {
      flu_lm* model_raw = nullptr;
      check(flu_lm_load(lm.c_str(), &model_raw), "loading " + lm);
      Model model(model_raw);
      Vocab v;
      if (!vocab.empty()) v = load_vocab(vocab);
      check(flu_score_dataset_lm(model.get(), v.get(), dataset.get(), parse_kind(kind), label, &raw),
            "scoring");
    } else {
      flu_external* table_raw = nullptr;
      check(flu_external_load(external.c_str(), &table_raw), "loading " + external);
      External table(table_raw);
      check(flu_score_dataset_external(table.get(), dataset.get(), parse_kind(kind), label, &raw),
            "scoring");
    }
    Scores scores(raw);
    check(flu_scores_save(scores.get(), out.c_str()), "saving scores");
    std::cerr << flu_scores_metric(scores.get()) << ": " << flu_scores_size(scores.get())
              << " rows -> " << out << "\n";
  }
};

flu_overlap_metric parse_overlap(const std::string& metric) {
  if (metric == "rouge-l-single") return FLU_ROUGE_L_SINGLE;
  if (metric == "rouge-l-mult") return FLU_ROUGE_L_MULTI;
  if (metric == "lr2-f") return FLU_LR2_F;
  if (metric == "lr2-r") return FLU_LR2_R;
  if (metric == "lr3-f") return FLU_LR3_F;
  if (metric == "lr3-r") return FLU_LR3_R;
  throw ValidationError(
      "--metric must be one of rouge-l-single, rouge-l-mult, lr2-f, lr2-r, lr3-f, lr3-r");
}

struct Rouge {
  std::string data, out, metric = "rouge-l-mult";

  void validate() const {
    parse_overlap(metric);
    input_file(data, "--data");
    output_file(out, "--out");
  }
  void run() const {
    Dataset dataset = load_dataset(data);
    flu_scores* raw = nullptr;
    check(flu_score_dataset_overlap(dataset.get(), parse_overlap(metric), &raw), "scoring");
    Scores scores(raw);
    check(flu_scores_save(scores.get(), out.c_str()), "saving scores");
    std::cerr << flu_scores_metric(scores.get()) << ": " << flu_scores_size(scores.get())
              << " rows -> " << out << "\n";
  }
};

flu_group_by parse_group(const std::string& group) {
  if (group == "none") return FLU_GROUP_NONE;
  if (group == "system") return FLU_GROUP_SYSTEM;
  if (group == "domain") return FLU_GROUP_DOMAIN;
  throw ValidationError("--group-by must be one of none, system, domain");
}

struct Evaluate {
  std::vector<std::string> scores;
  std::string data, group_by = "none", out, table;

  void validate() const {
    parse_group(group_by);
    if (scores.empty()) throw ValidationError("at least one --scores file is required");
    for (const auto& s : scores) input_file(s, "--scores");
    input_file(data, "--data");
    if (!out.empty()) output_file(out, "--out");
    if (!table.empty()) output_file(table, "--table");
  }
  void run() const {
    Dataset dataset = load_dataset(data);
    std::vector<Scores> owned;
    std::vector<const flu_scores*> metrics;
    for (const auto& path : scores) {
      owned.push_back(load_scores(path));
      metrics.push_back(owned.back().get());
    }
    flu_report* raw = nullptr;
    check(flu_evaluate(metrics.data(), metrics.size(), dataset.get(), parse_group(group_by), &raw),
          "evaluating");
    Report report(raw);
    char* text_raw = nullptr;
    check(flu_report_table(report.get(), &text_raw), "rendering table");
    CString text(text_raw);
    char* json_raw = nullptr;
    check(flu_report_json(report.get(), &json_raw), "rendering report");
    CString json(json_raw);
    if (!table.empty()) write_atomic(table, text.get());
    if (!out.empty()) write_atomic(out, json.get());
    std::cout << text.get();
  }
};

flu_split_part parse_part(const std::string& part) {
  if (part == "all") return FLU_PART_ALL;
  if (part == "train") return FLU_PART_TRAIN;
  if (part == "dev") return FLU_PART_DEV;
  if (part == "test") return FLU_PART_TEST;
  throw ValidationError("--fit-set must be one of all, train, dev, test");
}

struct Combine {
  std::string mode = "rouge-lm", rouge, slor, data, split, fit_set = "all", out, model;

  void validate() const {
    if (mode != "rouge-lm" && mode != "trained") {
      throw ValidationError("--mode must be rouge-lm or trained");
    }
    parse_part(fit_set);
    input_file(rouge, "--rouge");
    input_file(slor, "--slor");
    if (mode == "trained") {
      if (data.empty() || split.empty()) throw ValidationError("--mode trained needs --data and --split");
      input_file(data, "--data");
    } else if (fit_set != "all" && split.empty()) {
      throw ValidationError("--fit-set other than all needs --split");
    }
    if (!split.empty()) input_file(split, "--split");
    output_file(out, "--out");
    if (!model.empty()) output_file(model, "--model");
  }
  void run() const {
    Scores r = load_scores(rouge);
    Scores s = load_scores(slor);
    Split sp;
    if (!split.empty()) sp = load_split(split);
    flu_scores* raw = nullptr;
    char* json_raw = nullptr;
    if (mode == "rouge-lm") {
      check(flu_combine_rouge_lm(r.get(), s.get(), sp.get(), parse_part(fit_set), &raw, &json_raw),
            "combining");
    } else {
      Dataset dataset = load_dataset(data);
      check(flu_combine_trained(r.get(), s.get(), dataset.get(), sp.get(), &raw, &json_raw),
            "training combiner");
    }
    Scores combined(raw);
    CString json(json_raw);
    check(flu_scores_save(combined.get(), out.c_str()), "saving scores");
    if (!model.empty()) write_atomic(model, json.get());
    std::cerr << flu_scores_metric(combined.get()) << ": " << flu_scores_size(combined.get())
              << " rows -> " << out << "\n";
  }
};

struct SplitCmd {
  std::string data, sizes, out;
  uint64_t seed = 0;
  bool seed_given = false;
  size_t train = 0, dev = 0, test = 0;

  void validate() {
    input_file(data, "--data");
    output_file(out, "--out");
    if (!seed_given) throw ValidationError("--seed is required");
    std::vector<std::string> parts;
    size_t start = 0;
    while (true) {
      const size_t comma = sizes.find(',', start);
      parts.push_back(sizes.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (parts.size() != 3) throw ValidationError("--sizes expects TRAIN,DEV,TEST");
    train = parse_size(parts[0], "--sizes");
    dev = parse_size(parts[1], "--sizes");
    test = parts[2] == "rest" ? SIZE_MAX : parse_size(parts[2], "--sizes");
  }
  void run() const {
    Dataset dataset = load_dataset(data);
    flu_split* raw = nullptr;
    check(flu_split_create(dataset.get(), train, dev, test, seed, &raw), "splitting");
    Split split(raw);
    check(flu_split_save(split.get(), out.c_str()), "saving split");
    std::cerr << "split: " << flu_split_part_size(split.get(), FLU_PART_TRAIN) << "/"
              << flu_split_part_size(split.get(), FLU_PART_DEV) << "/"
              << flu_split_part_size(split.get(), FLU_PART_TEST) << " -> " << out << "\n";
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentence fluency scoring and metric evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", flu_version());

  TrainSubword train_subword;
  auto* c_subword = app.add_subcommand("train-subword", "Learn a WordPiece vocabulary from a corpus");
  c_subword->add_option("--corpus", train_subword.corpus, "Tokenized corpus, one sentence per line")->required();
  c_subword->add_option("--target-size", train_subword.target_size, "Vocabulary size")->required();
  c_subword->add_option("--out", train_subword.out, "Vocabulary output path")->required();

  TrainLm train_lm;
  auto* c_lm = app.add_subcommand("train-lm", "Train a Kneser-Ney n-gram model");
  c_lm->add_option("--corpus", train_lm.corpus, "Tokenized corpus, one sentence per line")->required();
  c_lm->add_option("--out", train_lm.out, "Model output path")->required();
  c_lm->add_option("--order", train_lm.options.order, "N-gram order")->capture_default_str();
  c_lm->add_option("--discount", train_lm.options.discount, "Absolute discount")->capture_default_str();
  c_lm->add_option("--unk-threshold", train_lm.options.unk_threshold,
                   "Tokens seen fewer times become <unk>")->capture_default_str();
  c_lm->add_option("--vocab", train_lm.vocab, "Train over WordPiece units from this vocabulary");

  Score score;
  auto* c_score = app.add_subcommand("score", "Score dataset outputs with SLOR, NCE or PPL");
  c_score->add_option("--lm", score.lm, "Model file");
  c_score->add_option("--vocab", score.vocab, "WordPiece vocabulary (model trained on pieces)");
  c_score->add_option("--external", score.external, "Precomputed per-sentence log-probabilities");
  c_score->add_option("--kind", score.kind, "slor, nce or ppl")->capture_default_str();
  c_score->add_option("--data", score.data, "Dataset JSONL")->required();
  c_score->add_option("--out", score.out, "Score table output path")->required();
  c_score->add_option("--name", score.name, "Metric name in the score header");

  Rouge rouge;
  auto* c_rouge = app.add_subcommand("rouge", "Score dataset outputs by reference overlap");
  c_rouge->add_option("--data", rouge.data, "Dataset JSONL")->required();
  c_rouge->add_option("--out", rouge.out, "Score table output path")->required();
  c_rouge->add_option("--metric", rouge.metric,
                      "rouge-l-single, rouge-l-mult, lr2-f, lr2-r, lr3-f or lr3-r")->capture_default_str();

  Evaluate evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "Correlate metrics with human fluency ratings");
  c_eval->add_option("--scores", evaluate.scores, "Score table (repeatable)")->required();
  c_eval->add_option("--data", evaluate.data, "Dataset JSONL")->required();
  c_eval->add_option("--group-by", evaluate.group_by, "none, system or domain")->capture_default_str();
  c_eval->add_option("--out", evaluate.out, "JSON report output path");
  c_eval->add_option("--table", evaluate.table, "Also write the Markdown table here");

  Combine combine;
  auto* c_combine = app.add_subcommand("combine", "Combine ROUGE and SLOR scores");
  c_combine->add_option("--mode", combine.mode, "rouge-lm or trained")->capture_default_str();
  c_combine->add_option("--rouge", combine.rouge, "ROUGE score table")->required();
  c_combine->add_option("--slor", combine.slor, "SLOR score table")->required();
  c_combine->add_option("--data", combine.data, "Dataset JSONL (trained mode)");
  c_combine->add_option("--split", combine.split, "Split file");
  c_combine->add_option("--fit-set", combine.fit_set,
                        "Part used for normalization statistics (rouge-lm mode)")->capture_default_str();
  c_combine->add_option("--out", combine.out, "Combined score table output path")->required();
  c_combine->add_option("--model", combine.model, "Write fitted parameters as JSON");

  SplitCmd split;
  auto* c_split = app.add_subcommand("split", "Split dataset ids into train/dev/test");
  c_split->add_option("--data", split.data, "Dataset JSONL")->required();
  c_split->add_option("--sizes", split.sizes, "TRAIN,DEV,TEST; TEST may be 'rest'")->required();
  auto* seed_opt = c_split->add_option("--seed", split.seed, "Shuffle seed")->required();
  c_split->add_option("--out", split.out, "Split output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }
  split.seed_given = seed_opt->count() > 0;

  try {
    if (*c_subword) {
      train_subword.validate();
      train_subword.run();
    } else if (*c_lm) {
      train_lm.validate();
      train_lm.run();
    } else if (*c_score) {
      score.validate();
      score.run();
    } else if (*c_rouge) {
      rouge.validate();
      rouge.run();
    } else if (*c_eval) {
      evaluate.validate();
      evaluate.run();
    } else if (*c_combine) {
      combine.validate();
      combine.run();
    } else if (*c_split) {
      split.validate();
      split.run();
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const RuntimeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
