#include <doctest.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <set>

#include <json.hpp>

#include "fluency/error.hpp"
#include "fluency/harness.hpp"
#include "fluency/stats.hpp"
#include "support.hpp"

using namespace fluency;

namespace {

DatasetRecord record(std::string id, std::string system, std::vector<double> ratings,
                     std::string output = "a fine sentence", std::vector<std::string> refs = {"a fine sentence"}) {
  return {std::move(id), std::move(system), "news", std::move(output), std::move(refs), std::move(ratings)};
}

// n records over systems A/B/C with varied ratings in [1, 3].
std::vector<DatasetRecord> synthetic_records(std::size_t n, std::uint64_t seed) {
  testing_support::Gen gen(seed);
  std::vector<DatasetRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "r%05zu", i);
    auto r = record(id, std::string(1, static_cast<char>('A' + i % 3)),
                    {double(gen.integer(1, 3)), double(gen.integer(1, 3)), double(gen.integer(1, 3))});
    r.domain = i % 2 ? "news" : "legal";
    out.push_back(std::move(r));
  }
  return out;
}

std::map<std::string, double> ratings_map(const std::vector<DatasetRecord>& records) {
  std::map<std::string, double> out;
  for (const auto& r : records) out[r.id] = aggregate_ratings(r);
  return out;
}

// Ridge with an unpenalized intercept, solved as a 3x3 system by Gaussian elimination.
std::array<double, 3> ridge_oracle(const std::vector<std::array<double, 2>>& z, const std::vector<double>& y,
                                   double lambda) {
  double a[3][4] = {};
  const double n = static_cast<double>(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double row[3] = {1.0, z[i][0], z[i][1]};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) a[r][c] += row[r] * row[c] / n;
      a[r][3] += row[r] * y[i] / n;
    }
  }
  a[1][1] += lambda;
  a[2][2] += lambda;
  for (int p = 0; p < 3; ++p) {
    for (int r = p + 1; r < 3; ++r) {
      const double f = a[r][p] / a[p][p];
      for (int c = p; c < 4; ++c) a[r][c] -= f * a[p][c];
    }
  }
  std::array<double, 3> x{};
  for (int r = 2; r >= 0; --r) {
    double s = a[r][3];
    for (int c = r + 1; c < 3; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return x;  // intercept, w_rouge, w_slor
}

}  // namespace

TEST_CASE("dataset parsing") {
  const std::string good =
      R"({"id":"1","system":"s1","domain":"news","output":"The cat.","references":["A cat."],"fluency_ratings":[1,2,3]})"
      "\n"
      R"({"id":"2","output":"Dog.","fluency_ratings":[3]})"
      "\n\n"
      R"({"id":"3","system":"s2","output":"Bird!","references":[],"fluency_ratings":[2.5,1]})"
      "\n";
  const auto records = parse_dataset(good);
  REQUIRE(records.size() == 3);
  CHECK(records[0].references == std::vector<std::string>{"A cat."});
  CHECK(records[1].system.empty());
  CHECK(aggregate_ratings(records[2]) == 1.75);
  CHECK(parse_dataset(dataset_to_jsonl(records)).size() == 3);

  CHECK_THROWS_WITH_AS(parse_dataset(R"({"id":"1","output":"x","fluency_ratings":[4.0]})"),
                       doctest::Contains("RatingOutOfRange"), Error);
  CHECK_THROWS_WITH_AS(parse_dataset(R"({"id":"1","output":"x","fluency_ratings":[0.5]})"),
                       doctest::Contains("RatingOutOfRange"), Error);
  CHECK_THROWS_WITH_AS(parse_dataset(std::string(R"({"id":"1","output":"x","fluency_ratings":[1]})") + "\n" +
                                     R"({"id":"1","output":"y","fluency_ratings":[1]})"),
                       doctest::Contains("DuplicateId"), Error);
  for (const char* bad : {"{", "[]", R"({"output":"x","fluency_ratings":[1]})", R"({"id":"1","fluency_ratings":[1]})",
                          R"({"id":"1","output":"x"})", R"({"id":"1","output":"x","fluency_ratings":[]})",
                          R"({"id":"1","output":" ","fluency_ratings":[1]})", R"({"id":1,"output":"x","fluency_ratings":[1]})",
                          R"({"id":"1","output":"x","fluency_ratings":["2"]})"}) {
    CHECK_THROWS_WITH_AS(parse_dataset(bad), doctest::Contains("ParseError"), Error);
  }
}

TEST_CASE("rating aggregation") {
  CHECK(aggregate_ratings(record("a", "s", {1, 1, 1})) == 1.0);
  CHECK(aggregate_ratings(record("a", "s", {1, 2, 3})) == 2.0);
  CHECK(aggregate_ratings(record("a", "s", {1, 1, 2, 3, 3})) == 2.0);
}

TEST_CASE("rater agreement is the mean pairwise weighted kappa") {
  std::vector<DatasetRecord> records{record("1", "s", {1, 1}), record("2", "s", {2, 3}),
                                     record("3", "s", {3, 3}), record("4", "s", {1, 2})};
  const std::vector<int> a{1, 2, 3, 1}, b{1, 3, 3, 2};
  REQUIRE(rating_agreement(records).has_value());
  CHECK(*rating_agreement(records) == doctest::Approx(stats::quadratic_weighted_kappa(a, b, 3)));
  std::vector<DatasetRecord> single{record("1", "s", {2}), record("2", "s", {3})};
  CHECK_FALSE(rating_agreement(single).has_value());
}

TEST_CASE("score table format") {
  ScoreTable t{"WPSLOR", "0", {{"b", -0.25}, {"a", 1e-300}, {"c", 3.0}}};
  const auto text = t.serialize();
  CHECK(text == "#scores v1 metric=WPSLOR refs=0\na\t1e-300\nb\t-0.25\nc\t3\n");
  const auto back = ScoreTable::parse(text);
  CHECK(back.metric == "WPSLOR");
  CHECK(back.values == t.values);
  CHECK(ScoreTable::parse("#scores v1 metric=x\nid\t2\n").refs == "0");
  for (const char* bad : {"", "#scores v2 metric=x\n", "#scores v1 metric=\n", "#scores v1 metric=x\nid 2\n",
                          "#scores v1 metric=x\nid\tnope\n", "#scores v1 metric=x bogus=1\n"}) {
    CHECK_THROWS_AS(ScoreTable::parse(bad), Error);
  }
  CHECK_THROWS_WITH_AS(ScoreTable::parse("#scores v1 metric=x\na\t1\na\t2\n"), doctest::Contains("DuplicateId"), Error);
}

TEST_CASE("overlap score tables") {
  std::vector<DatasetRecord> records{record("1", "s", {2}, "a b c", {"a b x", "y b c"}),
                                     record("2", "s", {2}, "a b", {"a b c d"})};
  const auto lr2 = overlap_scores(records, OverlapMetric::kLr2R);
  CHECK(lr2.metric == "LR2-R-mult");
  CHECK(lr2.refs == "1-2");
  CHECK(lr2.values.at("1") == 0.5);
  const auto single = overlap_scores(records, OverlapMetric::kRougeLSingle);
  CHECK(single.refs == "1");
  CHECK(single.values.at("2") == doctest::Approx(2.0 / 3.0));
  records.push_back(record("3", "s", {2}, "x", {}));
  CHECK_THROWS_WITH_AS(overlap_scores(records, OverlapMetric::kRougeLMulti), doctest::Contains("NoReferences"), Error);
}

TEST_CASE("a metric equal to the ratings is perfect everywhere") {
  const auto records = synthetic_records(60, 1);
  const auto report = evaluate(ratings_map(records), records, GroupBy::kSystem);
  REQUIRE(report.rows.size() == 1);
  CHECK(*report.rows[0].overall_pearson.value == doctest::Approx(1.0));
  CHECK(*report.rows[0].overall_mse.value == doctest::Approx(0.0).epsilon(1e-12));
  REQUIRE(report.groups == std::vector<std::string>{"A", "B", "C"});
  for (std::size_t g = 0; g < 3; ++g) {
    CHECK(report.group_sizes[g] == 20);
    CHECK(*report.rows[0].group_pearson[g].value == doctest::Approx(1.0));
    CHECK(*report.rows[0].group_mse[g].value == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("affine transforms of a metric leave the report unchanged") {
  const auto records = synthetic_records(90, 2);
  testing_support::Gen gen(3);
  std::map<std::string, double> noisy, scaled;
  for (const auto& [id, y] : ratings_map(records)) {
    noisy[id] = y + gen.normal();
    scaled[id] = noisy[id] * 4.0 - 3.0;
  }
  for (auto g : {GroupBy::kNone, GroupBy::kSystem, GroupBy::kDomain}) {
    const auto a = evaluate(noisy, records, g);
    const auto b = evaluate(scaled, records, g);
    CHECK(*a.rows[0].overall_pearson.value == doctest::Approx(*b.rows[0].overall_pearson.value).epsilon(1e-12));
    CHECK(*a.rows[0].overall_mse.value == doctest::Approx(*b.rows[0].overall_mse.value).epsilon(1e-12));
    CHECK(render_table(a) == render_table(b));
  }
}

TEST_CASE("a noisy metric is flagged against the exact one at n = 500") {
  const auto records = synthetic_records(500, 4);
  testing_support::Gen gen(5);
  const auto exact = ratings_map(records);
  ScoreTable good{"exact", "0", {}}, bad{"noisy", "0", {}};
  for (const auto& [id, y] : exact) {
    good.values[id] = y + 0.05 * gen.normal();
    bad.values[id] = y + 2.0 * gen.normal();
  }
  const std::vector<ScoreTable> tables{bad, good};
  const auto report = evaluate(tables, records, GroupBy::kNone);
  CHECK(report.rows[1].overall_pearson.best);
  CHECK(report.rows[1].overall_mse.best);
  CHECK(report.rows[0].overall_pearson.significantly_worse);
  CHECK(report.rows[0].overall_mse.significantly_worse);
  CHECK(*report.rows[0].overall_pearson.p_value < 0.05);
  CHECK(*report.rows[0].overall_mse.p_value < 0.05);

  const auto table = render_table(report);
  CHECK(table.find("| noisy | 0 |") != std::string::npos);
  CHECK(table.find("*") != std::string::npos);
  const auto json = nlohmann::json::parse(render_json(report));
  CHECK(json["metrics"][1]["overall"]["pearson"]["best"] == true);
  CHECK(json["metrics"][0]["overall"]["mse"]["significantly_worse"] == true);
}

TEST_CASE("degenerate groups render as n/a") {
  std::vector<DatasetRecord> records{record("1", "A", {1}), record("2", "A", {3}), record("3", "B", {2}),
                                     record("4", "B", {2}), record("5", "A", {2})};
  const std::map<std::string, double> scores{{"1", 0.1}, {"2", 0.9}, {"3", 0.4}, {"4", 0.6}, {"5", 0.5}};
  const auto report = evaluate(scores, records, GroupBy::kSystem);
  CHECK(report.rows[0].group_pearson[0].value.has_value());
  CHECK_FALSE(report.rows[0].group_pearson[1].value.has_value());
  CHECK(render_table(report).find("n/a") != std::string::npos);
  std::map<std::string, double> missing = scores;
  missing.erase("3");
  CHECK_THROWS_WITH_AS(evaluate(missing, records, GroupBy::kNone), doctest::Contains("MissingScore"), Error);
}

TEST_CASE("evaluate is deterministic to the byte") {
  const auto records = synthetic_records(120, 9);
  testing_support::Gen gen(10);
  std::vector<ScoreTable> tables;
  for (const char* name : {"m1", "m2", "m3"}) {
    ScoreTable t{name, "1", {}};
    for (const auto& r : records) t.values[r.id] = aggregate_ratings(r) + gen.normal();
    tables.push_back(t);
  }
  const auto a = evaluate(tables, records, GroupBy::kDomain);
  const auto b = evaluate(tables, records, GroupBy::kDomain);
  CHECK(render_table(a) == render_table(b));
  CHECK(render_json(a) == render_json(b));
}

TEST_CASE("rouge-lm combination") {
  // already standardized inputs: the combination is the plain sum
  const std::map<std::string, double> r{{"a", -1}, {"b", 1}}, s{{"a", 1}, {"b", -1}};
  const std::vector<std::string> all{"a", "b"};
  const auto sum = combine_rouge_lm(r, s, all);
  CHECK(sum.values.at("a") == 0.0);
  CHECK(sum.values.at("b") == 0.0);

  // three records: rouge (0, 3, 6) -> z (-1.2247, 0, 1.2247); slor (1, 1, 4) -> z (-0.7071, -0.7071, 1.4142)
  const std::map<std::string, double> r3{{"x", 0}, {"y", 3}, {"z", 6}}, s3{{"x", 1}, {"y", 1}, {"z", 4}};
  const std::vector<std::string> ids{"x", "y", "z"};
  const auto c = combine_rouge_lm(r3, s3, ids);
  CHECK(c.values.at("x") == doctest::Approx(-std::sqrt(1.5) - std::sqrt(0.5)));
  CHECK(c.values.at("y") == doctest::Approx(-std::sqrt(0.5)));
  CHECK(c.values.at("z") == doctest::Approx(std::sqrt(1.5) + std::sqrt(2.0)));

  std::map<std::string, double> shifted;
  for (const auto& [id, v] : r3) shifted[id] = 10 * v + 5;
  const auto c2 = combine_rouge_lm(shifted, s3, ids);
  for (const auto& id : ids) CHECK(c2.values.at(id) == doctest::Approx(c.values.at(id)).epsilon(1e-14));

  const std::map<std::string, double> flat{{"x", 1}, {"y", 1}, {"z", 1}};
  CHECK_THROWS_WITH_AS(combine_rouge_lm(flat, s3, ids), doctest::Contains("DegenerateVariance"), Error);
  const std::map<std::string, double> partial{{"x", 1}, {"y", 1}};
  CHECK_THROWS_WITH_AS(combine_rouge_lm(partial, s3, ids), doctest::Contains("MissingScore"), Error);
}

TEST_CASE("ridge combiner matches the closed-form oracle") {
  testing_support::Gen gen(12);
  std::map<std::string, std::pair<double, double>> features;
  std::map<std::string, double> targets;
  std::vector<std::string> train, dev;
  for (int i = 0; i < 200; ++i) {
    const std::string id = "i" + std::to_string(i);
    const double r = gen.normal(), s = gen.normal();
    features[id] = {0.3 * r + 0.4, 2.0 * s - 1.0};
    targets[id] = 2.0 + 0.6 * r - 0.2 * s + 0.3 * gen.normal();
    (i < 120 ? train : dev).push_back(id);
  }
  const auto metric = train_combiner(features, targets, train, dev);
  REQUIRE(metric.ridge.has_value());

  std::vector<std::array<double, 2>> z;
  std::vector<double> y;
  for (const auto& id : train) {
    z.push_back({metric.rouge.apply(features[id].first), metric.slor.apply(features[id].second)});
    y.push_back(targets[id]);
  }
  double best_mse = INFINITY, best_lambda = 0;
  for (double lambda : kRidgeGrid) {
    const auto w = ridge_oracle(z, y, lambda);
    double sse = 0;
    for (const auto& id : dev) {
      const double p = w[0] + w[1] * metric.rouge.apply(features[id].first) + w[2] * metric.slor.apply(features[id].second);
      sse += (p - targets[id]) * (p - targets[id]);
    }
    const double m = sse / dev.size();
    if (m < best_mse) {
      best_mse = m;
      best_lambda = lambda;
    }
    if (lambda == metric.ridge->lambda) {
      CHECK(metric.ridge->intercept == doctest::Approx(w[0]).epsilon(1e-10));
      CHECK(metric.ridge->rouge == doctest::Approx(w[1]).epsilon(1e-10));
      CHECK(metric.ridge->slor == doctest::Approx(w[2]).epsilon(1e-10));
    }
  }
  CHECK(metric.ridge->lambda == best_lambda);
  CHECK(metric.ridge->dev_mse == doctest::Approx(best_mse).epsilon(1e-10));
  CHECK(nlohmann::json::parse(metric.to_json())["lambda"] == best_lambda);
}

TEST_CASE("ridge combiner limiting cases") {
  testing_support::Gen gen(13);
  std::map<std::string, std::pair<double, double>> features;
  std::map<std::string, double> exact_rouge, zsum;
  std::vector<std::string> train, dev;
  for (int i = 0; i < 100; ++i) {
    const std::string id = "k" + std::to_string(i);
    features[id] = {gen.normal(), gen.normal()};
    exact_rouge[id] = features[id].first;
    (i < 60 ? train : dev).push_back(id);
  }
  const auto m1 = train_combiner(features, exact_rouge, train, dev);
  // target = rouge = sd * z + mean, so the weight is the train sd up to shrinkage
  CHECK(m1.ridge->rouge == doctest::Approx(std::sqrt(m1.rouge.variance)).epsilon(1e-3));
  CHECK(std::abs(m1.ridge->slor) < 1e-3);
  CHECK(m1.ridge->dev_mse < 1e-6);

  std::map<std::string, double> r, s;
  for (const auto& [id, f] : features) {
    r[id] = f.first;
    s[id] = f.second;
  }
  const auto plain = combine_rouge_lm(r, s, train);
  for (const auto& [id, v] : plain.values) zsum[id] = v;
  const auto m2 = train_combiner(features, zsum, train, dev);
  for (const auto& id : dev) {
    CHECK(m2.apply(features[id].first, features[id].second) == doctest::Approx(zsum[id]).epsilon(1e-3));
  }

  const std::vector<std::string> five(train.begin(), train.begin() + 5);
  CHECK_THROWS_WITH_AS(train_combiner(features, zsum, five, dev), doctest::Contains("TooFewSamples"), Error);
  CHECK_THROWS_AS(train_combiner(features, zsum, train, train), Error);
  CHECK_THROWS_AS(train_combiner(features, zsum, train, {}), Error);
}

TEST_CASE("dataset split") {
  std::vector<std::string> ids;
  for (int i = 0; i < 2955; ++i) ids.push_back("id" + std::to_string(i));
  const auto split = split_dataset(ids, {500, 500, 1955}, 42);
  CHECK(split.train.size() == 500);
  CHECK(split.dev.size() == 500);
  CHECK(split.test.size() == 1955);
  std::set<std::string> all(split.train.begin(), split.train.end());
  all.insert(split.dev.begin(), split.dev.end());
  all.insert(split.test.begin(), split.test.end());
  CHECK(all.size() == 2955);

  const auto again = split_dataset(ids, {500, 500, 1955}, 42);
  CHECK(again.train == split.train);
  CHECK(again.dev == split.dev);
  CHECK(again.test == split.test);
  std::vector<std::string> shuffled(ids.rbegin(), ids.rend());
  CHECK(split_dataset(shuffled, {500, 500, 1955}, 42).train == split.train);
  CHECK(split_dataset(ids, {500, 500, 1955}, 43).train != split.train);

  CHECK_THROWS_WITH_AS(split_dataset(ids, {2000, 1000, 0}, 1), doctest::Contains("SizesExceedDataset"), Error);
  CHECK(split_dataset(ids, {10, 10, 10}, 1).test.size() == 10);

  const auto parsed = DatasetSplit::parse(split.serialize());
  CHECK(parsed.seed == 42);
  CHECK(parsed.train == split.train);
  CHECK(parsed.test == split.test);
  for (const char* bad : {"", "#split v1 seed=x\n", "#split v1 seed=1\na\tsomewhere\n", "#split v1 seed=1\na\ttrain\na\tdev\n"}) {
    CHECK_THROWS_AS(DatasetSplit::parse(bad), Error);
  }
}
