#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace qrg {

struct Interval {
  double lo = 0;
  double hi = 0;
  bool contains(double x) const { return lo <= x && x <= hi; }
  double width() const { return hi - lo; }
};

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // unbiased
double std_error(std::span<const double> xs);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  int points = 0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Empirical log-survival log P(X > s) for integer s in [s_lo, s_hi], keeping only s with at
// least `min_count` exceedances, fitted by a line.
LinearFit log_survival_fit(std::span<const int> samples, int s_lo, int s_hi, int min_count = 10);

double chi_square_pvalue(std::span<const long long> observed, std::span<const double> expected_prob);

// Percentile bootstrap for a statistic computed from resampled row indices.
Interval bootstrap_ci(std::size_t rows, int resamples, std::uint64_t seed,
                      const std::function<double(std::span<const std::size_t>)>& stat,
                      double level = 0.95);

// Two halves of a sequence have means within `z` combined standard errors.
bool halves_agree(std::span<const double> xs, double z = 3.0);

}  // namespace qrg
