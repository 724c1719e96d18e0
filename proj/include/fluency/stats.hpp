#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fluency::stats {

/// Metric scores `x` paired with human ratings `y`. Requires equal lengths
/// and at least two pairs.
class PairedSamples {
 public:
  PairedSamples(std::vector<double> x, std::vector<double> y);

  std::span<const double> x() const noexcept { return x_; }
  std::span<const double> y() const noexcept { return y_; }
  std::size_t size() const noexcept { return x_.size(); }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

struct LinearFit {
  double slope;
  double intercept;

  double operator()(double x) const { return slope * x + intercept; }
};

// Moments use the 1/n convention throughout.
double mean(std::span<const double> v);
double variance(std::span<const double> v);
double covariance(std::span<const double> x, std::span<const double> y);

/// Throws kDegenerateVariance when either side is constant.
double pearson(const PairedSamples& s);

/// Least-squares line predicting y from x. Throws kDegenerateVariance when x is constant.
LinearFit fit_linear(const PairedSamples& s);

/// Mean squared residual of the least-squares fit.
double mse(const PairedSamples& s);

/// Squared residuals of the least-squares fit, one per pair.
std::vector<double> squared_residuals(const PairedSamples& s);

/// Quadratic weighted kappa for ordinal ratings in 1..categories.
/// Throws kLengthMismatch / kOutOfRange.
double quadratic_weighted_kappa(std::span<const int> r1, std::span<const int> r2, int categories);

/// One-tailed p-value for H1: r_a > r_b via Fisher's z-transformation.
/// Requires n >= 4 per sample; throws kDegenerateR at |r| = 1.
double fisher_z_test(double r_a, double r_b, std::size_t n_a, std::size_t n_b);

/// Welch two-sample t-test, one-tailed p-value for H1: mean(a) < mean(b).
/// Requires two or more values per sample; throws kDegenerateVariance when
/// both samples are constant.
double two_sample_t_test(std::span<const double> a, std::span<const double> b);

/// Standard normal upper tail P(Z > z).
double normal_upper_tail(double z);

}  // namespace fluency::stats
