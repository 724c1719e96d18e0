#include <cmath>
#include <set>

#include <json.hpp>

#include "fluency/error.hpp"
#include "fluency/harness.hpp"
#include "fluency/stats.hpp"

namespace fluency {
namespace {

double value_at(const std::map<std::string, double>& values, const std::string& id) {
  auto it = values.find(id);
  if (it == values.end()) fail(ErrorCode::kMissingScore, "no score for id '" + id + "'");
  return it->second;
}

}  // namespace

double Normalization::apply(double x) const { return (x - mean) / std::sqrt(variance); }

Normalization fit_normalization(const std::map<std::string, double>& values,
                                std::span<const std::string> ids) {
  require(!ids.empty(), ErrorCode::kPrecondition, "normalization needs at least one id");
  std::vector<double> xs;
  xs.reserve(ids.size());
  for (const auto& id : ids) xs.push_back(value_at(values, id));
  Normalization n{stats::mean(xs), stats::variance(xs)};
  require(n.variance > 0.0, ErrorCode::kDegenerateVariance, "metric is constant over the fit ids");
  return n;
}

double CombinedMetric::apply(double rouge_score, double slor_score) const {
  const double zr = rouge.apply(rouge_score);
  const double zs = slor.apply(slor_score);
  if (!ridge) return zr + zs;
  return ridge->intercept + ridge->rouge * zr + ridge->slor * zs;
}

std::string CombinedMetric::to_json() const {
  nlohmann::ordered_json out;
  out["name"] = name;
  out["normalization"] = {
      {"rouge", {{"mean", rouge.mean}, {"variance", rouge.variance}}},
      {"slor", {{"mean", slor.mean}, {"variance", slor.variance}}},
  };
  if (ridge) {
    out["regressor"] = "ridge regression over z-scored features (linear stand-in for an RBF SVR)";
    out["weights"] = {{"rouge", ridge->rouge}, {"slor", ridge->slor}, {"intercept", ridge->intercept}};
    out["lambda"] = ridge->lambda;
    out["dev_mse"] = ridge->dev_mse;
  } else {
    out["regressor"] = "none (z_rouge + z_slor)";
  }
  return out.dump(2) + "\n";
}

CombinedScores combine_rouge_lm(const std::map<std::string, double>& rouge,
                                const std::map<std::string, double>& slor,
                                std::span<const std::string> fit_ids) {
  for (const auto& [id, value] : rouge) (void)value_at(slor, id);
  for (const auto& [id, value] : slor) (void)value_at(rouge, id);
  CombinedScores out;
  out.metric.name = "ROUGE-LM";
  out.metric.rouge = fit_normalization(rouge, fit_ids);
  out.metric.slor = fit_normalization(slor, fit_ids);
  for (const auto& [id, r] : rouge) out.values.emplace(id, out.metric.apply(r, slor.at(id)));
  return out;
}

CombinedMetric train_combiner(const std::map<std::string, std::pair<double, double>>& features,
                              const std::map<std::string, double>& targets,
                              std::span<const std::string> train_ids,
                              std::span<const std::string> dev_ids) {
  if (train_ids.size() < kMinTrainingPoints) {
    fail(ErrorCode::kTooFewSamples, "need at least " + std::to_string(kMinTrainingPoints) +
                                        " training points, got " + std::to_string(train_ids.size()));
  }
  require(!dev_ids.empty(), ErrorCode::kTooFewSamples, "development set is empty");
  const std::set<std::string> train_set(train_ids.begin(), train_ids.end());
  for (const auto& id : dev_ids) {
    require(!train_set.contains(id), ErrorCode::kInvalidArgument, "train and dev ids overlap");
  }

  auto feature = [&](const std::string& id) -> const std::pair<double, double>& {
    auto it = features.find(id);
    if (it == features.end()) fail(ErrorCode::kMissingScore, "no features for id '" + id + "'");
    return it->second;
  };
  std::map<std::string, double> rouge, slor;
  for (const auto& id : train_ids) {
    rouge[id] = feature(id).first;
    slor[id] = feature(id).second;
  }

  CombinedMetric metric;
  metric.name = "trained";
  metric.rouge = fit_normalization(rouge, train_ids);
  metric.slor = fit_normalization(slor, train_ids);

  // Second moments of the centered problem; z features have zero train mean.
  const double n = static_cast<double>(train_ids.size());
  double y_mean = 0.0;
  for (const auto& id : train_ids) y_mean += value_at(targets, id);
  y_mean /= n;
  double c11 = 0.0, c12 = 0.0, c22 = 0.0, b1 = 0.0, b2 = 0.0;
  for (const auto& id : train_ids) {
    const double z1 = metric.rouge.apply(feature(id).first);
    const double z2 = metric.slor.apply(feature(id).second);
    const double y = value_at(targets, id) - y_mean;
    c11 += z1 * z1;
    c12 += z1 * z2;
    c22 += z2 * z2;
    b1 += z1 * y;
    b2 += z2 * y;
  }
  c11 /= n, c12 /= n, c22 /= n, b1 /= n, b2 /= n;

  std::optional<RidgeWeights> best;
  for (double lambda : kRidgeGrid) {
    const double a11 = c11 + lambda, a22 = c22 + lambda;
    const double det = a11 * a22 - c12 * c12;
    if (!(det > 0.0)) continue;
    RidgeWeights w{(a22 * b1 - c12 * b2) / det, (a11 * b2 - c12 * b1) / det, y_mean, lambda, 0.0};
    double sse = 0.0;
    for (const auto& id : dev_ids) {
      const double pred = w.intercept + w.rouge * metric.rouge.apply(feature(id).first) +
                          w.slor * metric.slor.apply(feature(id).second);
      const double r = pred - value_at(targets, id);
      sse += r * r;
    }
    w.dev_mse = sse / static_cast<double>(dev_ids.size());
    if (!best || w.dev_mse < best->dev_mse) best = w;
  }
  if (!best) fail(ErrorCode::kDegenerateVariance, "ridge system is singular for every penalty");
  metric.ridge = best;
  return metric;
}

}  // namespace fluency
