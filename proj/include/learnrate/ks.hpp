#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

// Small sample-statistics toolkit used by the limit-law checks.

namespace learnrate::stats {

struct MeanError {
  double mean = 0.0;
  double stderr_ = 0.0;  // standard error of the mean
};

MeanError mean_and_stderr(std::span<const double> xs);

// Smallest sample value v with (#samples <= v) >= p * size. p in [0, 1].
double quantile(std::span<const double> xs, double p);
double median(std::span<const double> xs);
// (Q3 - Q1) / median.
double relative_iqr(std::span<const double> xs);

// sup_x |F_n(x) - cdf(x)|.
double ks_one_sample(std::span<const double> xs,
                     const std::function<double(double)>& cdf);

// sup_x |F_a(x) - F_b(x)|; ties across samples handled by stepping both
// ECDFs past equal values together.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

// Asymptotic critical value of the two-sample statistic at level alpha.
double ks_two_sample_critical(double alpha, std::size_t m, std::size_t n);

// Hill estimate of the tail exponent from the top `k` order statistics.
double hill_estimator(std::span<const double> xs, std::size_t k);

// Pearson chi-square statistic of observed counts against equal expected
// counts.
double chi_square_uniform(std::span<const std::int64_t> counts);

}  // namespace learnrate::stats
