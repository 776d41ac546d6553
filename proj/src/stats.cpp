#include "qrg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "qrg/error.hpp"
#include "qrg/rng.hpp"

namespace qrg {

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / (xs.size() - 1);
}

double std_error(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  return std::sqrt(variance(xs) / xs.size());
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), Errc::invalid_input, "fit size mismatch");
  LinearFit f;
  f.points = static_cast<int>(x.size());
  if (x.size() < 2) return f;
  const double mx = mean(x), my = mean(y);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

LinearFit log_survival_fit(std::span<const int> samples, int s_lo, int s_hi, int min_count) {
  std::vector<int> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> xs, ys;
  const double total = static_cast<double>(sorted.size());
  for (int s = s_lo; s <= s_hi; ++s) {
    auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), s);
    if (above < min_count) break;
    xs.push_back(s);
    ys.push_back(std::log(above / total));
  }
  return linear_fit(xs, ys);
}

double chi_square_pvalue(std::span<const long long> observed, std::span<const double> expected_prob) {
  require(observed.size() == expected_prob.size() && observed.size() >= 2, Errc::invalid_input,
          "chi-square needs matching categories");
  const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = total * expected_prob[i];
    stat += (observed[i] - e) * (observed[i] - e) / e;
  }
  boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

Interval bootstrap_ci(std::size_t rows, int resamples, std::uint64_t seed,
                      const std::function<double(std::span<const std::size_t>)>& stat, double level) {
  Rng rng(seed);
  std::vector<double> values;
  values.reserve(resamples);
  std::vector<std::size_t> idx(rows);
  for (int b = 0; b < resamples; ++b) {
    for (auto& i : idx) i = uniform_below(rng, rows);
    values.push_back(stat(idx));
  }
  std::sort(values.begin(), values.end());
  const double a = (1.0 - level) / 2.0;
  auto pick = [&](double q) {
    std::size_t k = static_cast<std::size_t>(std::floor(q * (values.size() - 1)));
    return values[k];
  };
  return {pick(a), pick(1.0 - a)};
}

bool halves_agree(std::span<const double> xs, double z) {
  const std::size_t h = xs.size() / 2;
  auto a = xs.subspan(0, h), b = xs.subspan(h);
  const double se = std::sqrt(variance(a) / a.size() + variance(b) / b.size());
  return std::abs(mean(a) - mean(b)) <= z * se;
}

}  // namespace qrg
