#include "learnrate/ks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace learnrate::stats {

MeanError mean_and_stderr(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty sample");
  // Welford
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (double x : xs) {
    ++k;
    const double d = x - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (x - mean);
  }
  const double n = static_cast<double>(xs.size());
  const double var = xs.size() > 1 ? m2 / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

double quantile(std::span<const double> xs, double p) {
  if (xs.empty()) throw std::invalid_argument("quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level must be in [0, 1]");
  std::vector<double> v(xs.begin(), xs.end());
  const double n = static_cast<double>(v.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n));
  if (rank == 0) rank = 1;
  auto nth = v.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(v.begin(), nth, v.end());
  return *nth;
}

double median(std::span<const double> xs) { return quantile(xs, 0.5); }

double relative_iqr(std::span<const double> xs) {
  return (quantile(xs, 0.75) - quantile(xs, 0.25)) / median(xs);
}

double ks_one_sample(std::span<const double> xs,
                     const std::function<double(double)>& cdf) {
  if (xs.empty()) throw std::invalid_argument("KS statistic of empty sample");
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = cdf(v[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f,
                  f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("KS statistic of empty sample");
  }
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx -
                             static_cast<double>(j) / ny));
  }
  return d;
}

double ks_two_sample_critical(double alpha, std::size_t m, std::size_t n) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double dm = static_cast<double>(m);
  const double dn = static_cast<double>(n);
  return c * std::sqrt((dm + dn) / (dm * dn));
}

double hill_estimator(std::span<const double> xs, std::size_t k) {
  if (k == 0 || k >= xs.size()) {
    throw std::invalid_argument("Hill estimator needs 0 < k < sample size");
  }
  std::vector<double> v(xs.begin(), xs.end());
  std::partial_sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k + 1),
                    v.end(), std::greater<>());
  const double threshold = std::log(v[k]);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(v[i]) - threshold;
  return static_cast<double>(k) / sum;
}

double chi_square_uniform(std::span<const std::int64_t> counts) {
  if (counts.empty()) throw std::invalid_argument("no cells");
  const double total = static_cast<double>(
      std::accumulate(counts.begin(), counts.end(), std::int64_t{0}));
  const double expected = total / static_cast<double>(counts.size());
  double chi2 = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  return chi2;
}

}  // namespace learnrate::stats
