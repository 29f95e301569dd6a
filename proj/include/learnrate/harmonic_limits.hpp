#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "learnrate/distributions.hpp"

namespace learnrate {

// Asymptotic behaviour of X_n = mean(1/x_i) selected by the sign of beta.
enum class Regime {
  Logarithmic,   // beta = 0: X_n - c log n has an alpha = 1 stable limit
  Concentrated,  // beta > 0: X_n -> E(1/x)
  HeavyTail,     // -1 < beta < 0: n^(1 - 1/alpha) X_n has an alpha < 1 limit
};

Regime regime_of(double beta);

// X_n = (1/n) sum 1/x_i. Throws on empty input or nonpositive gaps.
double reciprocal_mean(std::span<const double> gaps);

// The Y_n statistic whose law converges:
//   beta = 0:  X_n - c log n
//   beta > 0:  X_n
//   beta < 0:  n^(1 - 1/(1 + beta)) X_n
double centered_statistic(double x_n, std::size_t n, double beta, double c);

// Norming for sums S_k of y = 1/x with the stable law they are attracted to.
// All in-scope summands are positive, so the law is totally skewed (p = 1).
struct StableLawSpec {
  double alpha = 1.0;
  double p = 1.0;
  double q = 0.0;
  // 1 - F(t) ~ tail_constant * t^-alpha for y = 1/x.
  double tail_constant = 1.0;
  double mean = 0.0;  // E(y), only meaningful for alpha > 1
  double log_constant = 1.0;  // c in b_k = c log k, alpha = 1

  double scale(double k) const;   // a_k = k^(-1/alpha)
  double centre(double k) const;  // b_k
};

StableLawSpec stable_law_for(const OverlapDistribution& dist);

struct LimitSample {
  std::size_t n = 0;
  double beta = 0.0;
  std::size_t trials = 0;
  std::vector<double> x;  // X_n per trial
  std::vector<double> h;  // H_n = 1 / X_n per trial
  std::vector<double> y;  // centered_statistic per trial
};

// `trials` independent draws of n gaps each; trial t uses
// derive_seed(seed, t), so results do not depend on `jobs`.
LimitSample sample_limit(const OverlapDistribution& dist, std::size_t n,
                         std::size_t trials, std::uint64_t seed,
                         unsigned jobs = 1);

struct LimitEstimate {
  std::size_t n = 0;
  std::string statistic;  // "H_log_n", "mu_H" or "H_over_n_pow"
  double estimate = 0.0;
  double stderr_ = 0.0;
};

// Per n: mean of H_n log n (beta = 0), mu H_n (beta > 0) or
// H_n / n^(1 - 1/(1 + beta)) (beta < 0), with its standard error. Grid
// point g is sampled with sample_limit(..., derive_seed(seed, g), ...).
std::vector<LimitEstimate> estimate_limit_constant(
    const OverlapDistribution& dist, std::span<const std::size_t> n_grid,
    std::size_t trials, std::uint64_t seed, unsigned jobs = 1);

// Fraction of trials with |H_n log n - 1/c| > tol (beta = 0) or
// |H_n - 1/mu| > tol (beta > 0). Throws std::domain_error for beta < 0.
double lln_check(const OverlapDistribution& dist, std::size_t n,
                 std::size_t trials, double tol, std::uint64_t seed,
                 unsigned jobs = 1);

// Statistic of H_n whose limit law is the reflected stable law:
//   beta = 0:  log n (H_n log n - 1/c)
//   beta > 0:  n^(1 - 1/alpha) (H_n - 1/mu)
//   beta < 0:  H_n / n^(1 - 1/alpha)
double harmonic_statistic(double h_n, std::size_t n,
                          const OverlapDistribution& dist);

// Inverse of the (decreasing) map centered_statistic -> harmonic_statistic.
double centered_from_harmonic(double h_stat, std::size_t n,
                              const OverlapDistribution& dist);

// max over evaluation points h of |F_H(h) - (1 - F_Y(phi^-1(h)-))|, with
// F_H, F_Y the ECDFs of the harmonic and centered statistics of the same
// trials. Exact identity; evaluated between sample points to stay clear of
// rounding at the jumps.
double transform_discrepancy(const LimitSample& sample,
                             const OverlapDistribution& dist);

struct SelfConsistency {
  double ks = 0.0;             // two-sample KS of Y_n vs Y_4n
  double critical_1pct = 0.0;  // two-sample KS critical value at 1%
  double transform = 0.0;      // transform_discrepancy of the n sample
};

SelfConsistency limit_law_selfconsistency(const OverlapDistribution& dist,
                                          std::size_t n, std::size_t trials,
                                          std::uint64_t seed,
                                          unsigned jobs = 1);

// Totally skewed positive stable law with Laplace transform exp(-s^alpha),
// by Kanter's representation. Throws unless 0 < alpha < 1.
std::vector<double> sample_one_sided_stable(double alpha, std::size_t size,
                                            std::uint64_t seed);

}  // namespace learnrate
