#include <doctest.h>

#include <cmath>
#include <limits>

#include "fluency/error.hpp"
#include "fluency/stats.hpp"
#include "support.hpp"

using namespace fluency;
using namespace fluency::stats;

namespace {

PairedSamples paired(std::vector<double> x, std::vector<double> y) { return {std::move(x), std::move(y)}; }

// Pearson straight from the definition, in long double.
double definitional_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

double residual_mse(const std::vector<double>& x, const std::vector<double>& y, double a, double b) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (y[i] - (a * x[i] + b)) * (y[i] - (a * x[i] + b));
  return s / static_cast<double>(x.size());
}

// Coarse-to-fine grid search for the least-squares line.
double grid_mse(const std::vector<double>& x, const std::vector<double>& y) {
  double ca = 0, cb = 0, span = 64;
  double best = residual_mse(x, y, ca, cb);
  for (int level = 0; level < 60; ++level) {
    double na = ca, nb = cb;
    for (int i = -10; i <= 10; ++i) {
      for (int j = -10; j <= 10; ++j) {
        const double a = ca + span * i / 10, b = cb + span * j / 10;
        const double m = residual_mse(x, y, a, b);
        if (m < best) {
          best = m;
          na = a;
          nb = b;
        }
      }
    }
    ca = na;
    cb = nb;
    span /= 2;
  }
  return best;
}

}  // namespace

TEST_CASE("pearson examples") {
  CHECK(pearson(paired({1, 2, 3, 4}, {1, 2, 3, 4})) == 1.0);
  CHECK(pearson(paired({1, 2, 3, 4}, {5, 3, 1, -1})) == -1.0);
  // centered x = (-1.5,-.5,.5,1.5), y = (-1.5,.5,-.5,1.5): sxy = 4, sxx = syy = 5
  CHECK(pearson(paired({1, 2, 3, 4}, {1, 3, 2, 4})) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK_THROWS_WITH_AS(pearson(paired({1, 1, 1}, {1, 2, 3})), doctest::Contains("DegenerateVariance"), Error);
  CHECK_THROWS_WITH_AS(paired({1, 2}, {1}), doctest::Contains("LengthMismatch"), Error);
  CHECK_THROWS_AS(paired({1}, {1}), Error);
}

TEST_CASE("pearson matches the definition and is affine invariant") {
  testing_support::Gen gen(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + gen.index(60);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = gen.normal();
      y[i] = 0.5 * x[i] + gen.normal();
    }
    const double r = pearson(paired(x, y));
    CHECK(r == doctest::Approx(definitional_pearson(x, y)).epsilon(1e-12));
    CHECK(std::abs(r) <= 1.0);

    // power-of-two scaling is exact in binary floating point
    std::vector<double> x2(x), y2(y);
    for (auto& v : x2) v *= 8.0;
    for (auto& v : y2) v *= 0.25;
    CHECK(pearson(paired(x2, y2)) == r);

    const double a = gen.uniform(0.1, 10), b = gen.uniform(-10, 10);
    std::vector<double> xa(x);
    for (auto& v : xa) v = a * v + b;
    CHECK(std::abs(pearson(paired(xa, y)) - r) <= 1e-12);
    for (auto& v : xa) v = -v;
    CHECK(std::abs(pearson(paired(xa, y)) + r) <= 1e-12);
  }
}

TEST_CASE("linear fit examples") {
  const auto exact = paired({1, 2, 3, 4}, {3, 5, 7, 9});
  const auto f = fit_linear(exact);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(mse(exact) == doctest::Approx(0.0).epsilon(1e-12));

  const auto flat = fit_linear(paired({0, 1}, {0, 0}));
  CHECK(flat.slope == 0.0);
  CHECK(flat.intercept == 0.0);
  CHECK(mse(paired({0, 1}, {0, 0})) == 0.0);

  CHECK(std::abs(mse(paired({1, 2, 3}, {1, 2, 4})) - grid_mse({1, 2, 3}, {1, 2, 4})) < 1e-6);
  CHECK(mse(paired({1, 2, 3}, {1, 2, 4})) == doctest::Approx(1.0 / 18.0));
}

TEST_CASE("least squares oracles on random samples") {
  testing_support::Gen gen(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + gen.index(30);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = gen.uniform(-3, 3);
      y[i] = gen.uniform(-2, 2) * x[i] + gen.normal();
    }
    const auto s = paired(x, y);
    const double m = mse(s);
    CHECK(std::abs(m - grid_mse(x, y)) < 1e-6);
    const double r = pearson(s);
    CHECK(std::abs(m - variance(y) * (1 - r * r)) < 1e-9);

    double sum = 0;
    for (double v : squared_residuals(s)) sum += v;
    CHECK(sum / static_cast<double>(n) == doctest::Approx(m).epsilon(1e-12));
  }
}

TEST_CASE("mse is not symmetric in its arguments") {
  const auto xy = paired({1, 2, 3, 4}, {10, 30, 20, 40});
  const auto yx = paired({10, 30, 20, 40}, {1, 2, 3, 4});
  CHECK(pearson(xy) == pearson(yx));
  CHECK(mse(xy) != doctest::Approx(mse(yx)));
}

TEST_CASE("quadratic weighted kappa") {
  const std::vector<int> r{1, 2, 3, 1, 2};
  CHECK(quadratic_weighted_kappa(r, r, 3) == 1.0);
  const std::vector<int> a{1, 2, 3, 1}, b{1, 3, 3, 2};
  // weighted observed disagreement 0.5 over expected 1.625
  CHECK(quadratic_weighted_kappa(a, b, 3) == doctest::Approx(9.0 / 13.0).epsilon(1e-12));
  CHECK(std::abs(quadratic_weighted_kappa(a, b, 3) - 9.0 / 13.0) < 1e-12);
  const std::vector<int> up{1, 2, 3}, down{3, 2, 1};
  CHECK(quadratic_weighted_kappa(up, down, 3) == doctest::Approx(-1.0));
  const std::vector<int> bad{1, 4};
  CHECK_THROWS_AS(quadratic_weighted_kappa(bad, std::vector<int>{1, 1}, 3), Error);
  CHECK_THROWS_AS(quadratic_weighted_kappa(a, up, 3), Error);
}

TEST_CASE("fisher z test") {
  CHECK(fisher_z_test(0.4, 0.4, 50, 80) == 0.5);
  CHECK(fisher_z_test(0.9, 0.1, 1000, 1000) < 0.001);
  CHECK(fisher_z_test(0.1, 0.9, 1000, 1000) > 0.999);
  // closed form: z = (atanh .5 - atanh .3) / sqrt(1/97 + 1/97)
  const double z = (std::atanh(0.5) - std::atanh(0.3)) / std::sqrt(2.0 / 97.0);
  CHECK(fisher_z_test(0.5, 0.3, 100, 100) == doctest::Approx(0.5 * std::erfc(z / std::sqrt(2.0))).epsilon(1e-14));
  CHECK_THROWS_WITH_AS(fisher_z_test(0.5, 0.3, 3, 100), doctest::Contains("Precondition"), Error);
  CHECK_THROWS_WITH_AS(fisher_z_test(1.0, 0.3, 10, 10), doctest::Contains("DegenerateR"), Error);
}

TEST_CASE("welch t test") {
  const std::vector<double> a{0.1, 0.5, 0.3, 0.9};
  CHECK(two_sample_t_test(a, a) == 0.5);
  const std::vector<double> zeros{0.0, 1e-6, 0.0, 2e-6, 0.0}, ones{1.0, 1.0 + 1e-6, 1.0, 1.0 - 1e-6, 1.0};
  CHECK(two_sample_t_test(zeros, ones) < 1e-10);
  CHECK(two_sample_t_test(ones, zeros) > 1 - 1e-10);
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(two_sample_t_test(one, a), Error);
}

TEST_CASE("welch t test matches a hand evaluation") {
  // a: mean 2, s^2 = 1 (n 3); b: mean 4, s^2 = 4 (n 3)
  const std::vector<double> a{1, 2, 3}, b{2, 4, 6};
  const double t = (2.0 - 4.0) / std::sqrt(1.0 / 3 + 4.0 / 3);
  const double df = std::pow(5.0 / 3, 2) / (std::pow(1.0 / 3, 2) / 2 + std::pow(4.0 / 3, 2) / 2);
  CHECK(t == doctest::Approx(-1.5491933384829668));
  CHECK(df == doctest::Approx(2.9411764705882355));
  // Student t CDF at t with df degrees of freedom, by numeric integration of the density
  const double lo = -60.0;
  const int steps = 400000;
  const double h = (t - lo) / steps;
  auto density = [&](double u) { return std::pow(1 + u * u / df, -(df + 1) / 2); };
  double area = 0;
  for (int i = 0; i < steps; ++i) area += h * (density(lo + i * h) + 4 * density(lo + (i + 0.5) * h) + density(lo + (i + 1) * h)) / 6;
  const double norm = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI);
  CHECK(two_sample_t_test(a, b) == doctest::Approx(area * norm).epsilon(1e-5));
}

TEST_CASE("normal tail") {
  CHECK(normal_upper_tail(0.0) == 0.5);
  CHECK(normal_upper_tail(1.959963984540054) == doctest::Approx(0.025).epsilon(1e-12));
}
