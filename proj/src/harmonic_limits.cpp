#include "learnrate/harmonic_limits.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>

#include "learnrate/ks.hpp"
#include "learnrate/parallel.hpp"
#include "learnrate/seeding.hpp"

namespace learnrate {

Regime regime_of(double beta) {
  if (!(beta > -1.0)) throw std::invalid_argument("beta must be > -1");
  if (beta == 0.0) return Regime::Logarithmic;
  return beta > 0.0 ? Regime::Concentrated : Regime::HeavyTail;
}

double reciprocal_mean(std::span<const double> gaps) {
  if (gaps.empty()) throw std::invalid_argument("reciprocal_mean: empty input");
  double sum = 0.0;
  for (double g : gaps) {
    if (!(g > 0.0)) throw std::invalid_argument("reciprocal_mean: gaps must be > 0");
    sum += 1.0 / g;
  }
  return sum / static_cast<double>(gaps.size());
}

double centered_statistic(double x_n, std::size_t n, double beta, double c) {
  const double dn = static_cast<double>(n);
  switch (regime_of(beta)) {
    case Regime::Logarithmic:
      return x_n - c * std::log(dn);
    case Regime::Concentrated:
      return x_n;
    case Regime::HeavyTail:
      return std::pow(dn, 1.0 - 1.0 / (1.0 + beta)) * x_n;
  }
  return x_n;
}

double StableLawSpec::scale(double k) const { return std::pow(k, -1.0 / alpha); }

double StableLawSpec::centre(double k) const {
  if (alpha < 1.0) return 0.0;
  if (alpha == 1.0) return log_constant * std::log(k);
  return std::pow(k, 1.0 - 1.0 / alpha) * mean;
}

StableLawSpec stable_law_for(const OverlapDistribution& dist) {
  StableLawSpec spec;
  spec.alpha = dist.stable_exponent();
  spec.mean = dist.reciprocal_mean();
  spec.log_constant = dist.c;
  // P(1/x > t) = P(x < 1/t) ~ c t^-(1+beta) / (1 + beta).
  spec.tail_constant =
      dist.family == Family::Empirical ? 0.0 : dist.c / (1.0 + dist.beta);
  return spec;
}

LimitSample sample_limit(const OverlapDistribution& dist, std::size_t n,
                         std::size_t trials, std::uint64_t seed,
                         unsigned jobs) {
  if (n == 0 || trials == 0) {
    throw std::invalid_argument("sample_limit needs n >= 1 and trials >= 1");
  }
  LimitSample s;
  s.n = n;
  s.beta = dist.beta;
  s.trials = trials;
  s.x.resize(trials);
  s.h.resize(trials);
  s.y.resize(trials);
  parallel_for(trials, jobs, [&](std::size_t t) {
    const auto gaps = sample_gaps(dist, n, derive_seed(seed, t));
    const double x = reciprocal_mean(gaps);
    s.x[t] = x;
    s.h[t] = 1.0 / x;
    s.y[t] = centered_statistic(x, n, dist.beta, dist.c);
  });
  return s;
}

std::vector<LimitEstimate> estimate_limit_constant(
    const OverlapDistribution& dist, std::span<const std::size_t> n_grid,
    std::size_t trials, std::uint64_t seed, unsigned jobs) {
  if (!std::is_sorted(n_grid.begin(), n_grid.end())) {
    throw std::invalid_argument("n grid must be increasing");
  }
  const Regime regime = regime_of(dist.beta);
  const double mu = dist.reciprocal_mean();
  std::vector<LimitEstimate> out;
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    const std::size_t n = n_grid[gi];
    const auto sample =
        sample_limit(dist, n, trials, derive_seed(seed, gi), jobs);
    const double dn = static_cast<double>(n);
    std::vector<double> stat(trials);
    LimitEstimate e;
    e.n = n;
    for (std::size_t t = 0; t < trials; ++t) {
      switch (regime) {
        case Regime::Logarithmic:
          stat[t] = sample.h[t] * std::log(dn);
          break;
        case Regime::Concentrated:
          stat[t] = mu * sample.h[t];
          break;
        case Regime::HeavyTail:
          stat[t] =
              sample.h[t] / std::pow(dn, 1.0 - 1.0 / (1.0 + dist.beta));
          break;
      }
    }
    e.statistic = regime == Regime::Logarithmic    ? "H_log_n"
                  : regime == Regime::Concentrated ? "mu_H"
                                                   : "H_over_n_pow";
    const auto me = stats::mean_and_stderr(stat);
    e.estimate = me.mean;
    e.stderr_ = me.stderr_;
    out.push_back(std::move(e));
  }
  return out;
}

double lln_check(const OverlapDistribution& dist, std::size_t n,
                 std::size_t trials, double tol, std::uint64_t seed,
                 unsigned jobs) {
  const Regime regime = regime_of(dist.beta);
  if (regime == Regime::HeavyTail) {
    throw std::domain_error("no law of large numbers for beta < 0");
  }
  const auto sample = sample_limit(dist, n, trials, seed, jobs);
  const double log_n = std::log(static_cast<double>(n));
  const double limit = regime == Regime::Logarithmic
                           ? 1.0 / dist.c
                           : 1.0 / dist.reciprocal_mean();
  std::size_t violations = 0;
  for (double h : sample.h) {
    const double stat = regime == Regime::Logarithmic ? h * log_n : h;
    if (std::abs(stat - limit) > tol) ++violations;
  }
  return static_cast<double>(violations) / static_cast<double>(trials);
}

double harmonic_statistic(double h_n, std::size_t n,
                          const OverlapDistribution& dist) {
  const double dn = static_cast<double>(n);
  const double alpha = dist.stable_exponent();
  switch (regime_of(dist.beta)) {
    case Regime::Logarithmic: {
      const double log_n = std::log(dn);
      return log_n * (h_n * log_n - 1.0 / dist.c);
    }
    case Regime::Concentrated:
      return std::pow(dn, 1.0 - 1.0 / alpha) *
             (h_n - 1.0 / dist.reciprocal_mean());
    case Regime::HeavyTail:
      return h_n / std::pow(dn, 1.0 - 1.0 / alpha);
  }
  return h_n;
}

double centered_from_harmonic(double h_stat, std::size_t n,
                              const OverlapDistribution& dist) {
  const double dn = static_cast<double>(n);
  const double alpha = dist.stable_exponent();
  switch (regime_of(dist.beta)) {
    case Regime::Logarithmic: {
      const double log_n = std::log(dn);
      return log_n / (h_stat / log_n + 1.0 / dist.c) - dist.c * log_n;
    }
    case Regime::Concentrated:
      return 1.0 / (h_stat / std::pow(dn, 1.0 - 1.0 / alpha) +
                    1.0 / dist.reciprocal_mean());
    case Regime::HeavyTail:
      return 1.0 / h_stat;
  }
  return h_stat;
}

double transform_discrepancy(const LimitSample& sample,
                             const OverlapDistribution& dist) {
  const auto m = sample.trials;
  std::vector<double> hs(m);
  for (std::size_t t = 0; t < m; ++t) {
    hs[t] = harmonic_statistic(sample.h[t], sample.n, dist);
  }
  std::vector<double> ys = sample.y;
  std::sort(hs.begin(), hs.end());
  std::sort(ys.begin(), ys.end());
  const double dm = static_cast<double>(m);

  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < m; ++k) {
    if (hs[k] == hs[k + 1]) continue;
    const double point = hs[k] + 0.5 * (hs[k + 1] - hs[k]);
    const double y = centered_from_harmonic(point, sample.n, dist);
    const auto below = std::lower_bound(ys.begin(), ys.end(), y) - ys.begin();
    // Counts, not fractions: m F_H = k + 1 against m (1 - F_Y(y-)).
    const auto diff = static_cast<std::ptrdiff_t>(k + 1) -
                      (static_cast<std::ptrdiff_t>(m) - below);
    worst = std::max(worst, std::abs(static_cast<double>(diff)) / dm);
  }
  return worst;
}

SelfConsistency limit_law_selfconsistency(const OverlapDistribution& dist,
                                          std::size_t n, std::size_t trials,
                                          std::uint64_t seed, unsigned jobs) {
  const auto small = sample_limit(dist, n, trials, derive_seed(seed, 0), jobs);
  const auto large =
      sample_limit(dist, 4 * n, trials, derive_seed(seed, 1), jobs);
  SelfConsistency r;
  r.ks = stats::ks_two_sample(small.y, large.y);
  r.critical_1pct = stats::ks_two_sample_critical(0.01, trials, trials);
  r.transform = transform_discrepancy(small, dist);
  return r;
}

std::vector<double> sample_one_sided_stable(double alpha, std::size_t size,
                                            std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("one-sided stable sampler needs 0 < alpha < 1");
  }
  Rng rng(seed);
  std::vector<double> out(size);
  const double inv_alpha = 1.0 / alpha;
  const double power = (1.0 - alpha) / alpha;
  for (auto& value : out) {
    const double v = std::numbers::pi * rng.uniform_open();
    const double e = rng.exponential();
    value = std::sin(alpha * v) / std::pow(std::sin(v), inv_alpha) *
            std::pow(std::sin((1.0 - alpha) * v) / e, power);
  }
  return out;
}

}  // namespace learnrate
