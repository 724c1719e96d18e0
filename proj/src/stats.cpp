#include "fluency/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>

#include "fluency/error.hpp"

namespace fluency::stats {

PairedSamples::PairedSamples(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  require(x_.size() == y_.size(), ErrorCode::kLengthMismatch, "x and y differ in length");
  require(x_.size() >= 2, ErrorCode::kPrecondition, "need at least two paired samples");
}

double mean(std::span<const double> v) {
  require(!v.empty(), ErrorCode::kPrecondition, "mean of an empty sample");
  double sum = 0.0;
  for (double value : v) sum += value;
  return sum / static_cast<double>(v.size());
}

double covariance(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorCode::kLengthMismatch, "x and y differ in length");
  const double mx = mean(x);
  const double my = mean(y);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += (x[i] - mx) * (y[i] - my);
  return sum / static_cast<double>(x.size());
}

double variance(std::span<const double> v) { return covariance(v, v); }

double pearson(const PairedSamples& s) {
  const double vx = variance(s.x());
  const double vy = variance(s.y());
  require(vx > 0.0 && vy > 0.0, ErrorCode::kDegenerateVariance, "Pearson needs non-constant x and y");
  const double r = covariance(s.x(), s.y()) / std::sqrt(vx * vy);
  return std::clamp(r, -1.0, 1.0);
}

LinearFit fit_linear(const PairedSamples& s) {
  const double vx = variance(s.x());
  require(vx > 0.0, ErrorCode::kDegenerateVariance, "linear fit needs non-constant x");
  const double slope = covariance(s.x(), s.y()) / vx;
  return {slope, mean(s.y()) - slope * mean(s.x())};
}

std::vector<double> squared_residuals(const PairedSamples& s) {
  const LinearFit f = fit_linear(s);
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double r = f(s.x()[i]) - s.y()[i];
    out[i] = r * r;
  }
  return out;
}

double mse(const PairedSamples& s) { return mean(squared_residuals(s)); }

double quadratic_weighted_kappa(std::span<const int> r1, std::span<const int> r2, int categories) {
  require(r1.size() == r2.size(), ErrorCode::kLengthMismatch, "rating lists differ in length");
  require(!r1.empty(), ErrorCode::kPrecondition, "no ratings");
  require(categories >= 2, ErrorCode::kInvalidArgument, "need at least two categories");
  const auto k = static_cast<std::size_t>(categories);
  std::vector<double> observed(k * k, 0.0), rows(k, 0.0), cols(k, 0.0);
  for (std::size_t i = 0; i < r1.size(); ++i) {
    if (r1[i] < 1 || r1[i] > categories || r2[i] < 1 || r2[i] > categories) {
      fail(ErrorCode::kOutOfRange, "rating outside 1.." + std::to_string(categories));
    }
    const auto a = static_cast<std::size_t>(r1[i] - 1);
    const auto b = static_cast<std::size_t>(r2[i] - 1);
    observed[a * k + b] += 1.0;
    rows[a] += 1.0;
    cols[b] += 1.0;
  }
  const double n = static_cast<double>(r1.size());
  const double scale = static_cast<double>((k - 1) * (k - 1));
  double weighted_observed = 0.0, weighted_expected = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double d = static_cast<double>(i) - static_cast<double>(j);
      const double w = d * d / scale;
      weighted_observed += w * observed[i * k + j];
      weighted_expected += w * rows[i] * cols[j] / n;
    }
  }
  if (weighted_observed == 0.0) return 1.0;
  return 1.0 - weighted_observed / weighted_expected;
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double fisher_z_test(double r_a, double r_b, std::size_t n_a, std::size_t n_b) {
  require(n_a >= 4 && n_b >= 4, ErrorCode::kPrecondition, "Fisher z-test needs n >= 4");
  if (!(std::abs(r_a) < 1.0) || !(std::abs(r_b) < 1.0)) {
    fail(ErrorCode::kDegenerateR, "correlation of magnitude 1 has no z-transform");
  }
  const double se = std::sqrt(1.0 / static_cast<double>(n_a - 3) + 1.0 / static_cast<double>(n_b - 3));
  return normal_upper_tail((std::atanh(r_a) - std::atanh(r_b)) / se);
}

double two_sample_t_test(std::span<const double> a, std::span<const double> b) {
  require(a.size() >= 2 && b.size() >= 2, ErrorCode::kPrecondition,
          "t-test needs at least two values per sample");
  auto unbiased_variance = [](std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    return variance(v) * n / (n - 1.0);
  };
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = unbiased_variance(a) / na;
  const double vb = unbiased_variance(b) / nb;
  require(va + vb > 0.0, ErrorCode::kDegenerateVariance, "both samples are constant");
  const double t = (mean(a) - mean(b)) / std::sqrt(va + vb);
  const double df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  return boost::math::cdf(boost::math::students_t(df), t);
}

}  // namespace fluency::stats
