#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "learnrate/distributions.hpp"
#include "learnrate/ks.hpp"
#include "learnrate/learners.hpp"
#include "learnrate/seeding.hpp"
#include "learnrate/spectral.hpp"
#include "oracles.hpp"

using namespace learnrate;

namespace {

LearnerInstance from_overlaps(std::initializer_list<double> a) {
  const std::vector<double> v(a);
  return LearnerInstance::from_overlaps(v);
}

const auto kUniform = make_distribution(Family::Uniform);

bool within_binomial_3sigma(double observed, double p, std::size_t trials) {
  const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(trials));
  return std::abs(observed - p) <= 3 * sigma + 1e-12;
}

}  // namespace

TEST(ExactSuccess, DisjointSets) {
  EXPECT_EQ(exact_success_probability(from_overlaps({1, 0}), 1), 1.0);
  EXPECT_EQ(exact_success_probability(from_overlaps({1, 0}), 0), 0.5);
}

TEST(ExactSuccess, TwoSetClosedForm) {
  const auto inst = from_overlaps({1, 0.5});
  EXPECT_DOUBLE_EQ(exact_success_probability(inst, 1), 0.75);
  EXPECT_DOUBLE_EQ(exact_success_probability(inst, 3), 0.9375);
  for (std::int64_t n = 0; n < 60; ++n) {
    EXPECT_DOUBLE_EQ(exact_success_probability(inst, n), 1 - std::ldexp(1.0, -static_cast<int>(n) - 1));
  }
  // Agrees with 1 - C lambda*^N, C = 1/2, lambda* = 1/2.
  const auto spectral = spectral_success_probability(inst, 3);
  ASSERT_TRUE(spectral.has_value());
  EXPECT_NEAR(spectral->q11, 0.9375, 1e-14);
}

TEST(ExactSuccess, RoutesAgreeWithDenseOracle) {
  for (std::uint64_t s = 0; s < 12; ++s) {
    const std::size_t n = 3 + 4 * s;
    const auto inst = make_instance(make_distribution(Family::PowerGap, s % 3 == 0 ? -0.5 : 1.0), n, s);
    const auto fail = oracle::failure_curve(inst, 400);
    const auto curve = success_curve(inst, 400);
    for (std::int64_t k : {0, 1, 7, 50, 400}) {
      EXPECT_NEAR(curve[k], 1 - fail[k], 1e-12);
      EXPECT_NEAR(exact_success_probability(inst, k), 1 - fail[k], 1e-12);
      EXPECT_NEAR(success_probability_by_squaring(inst, k), 1 - fail[k], 1e-10);
    }
  }
}

TEST(ExactSuccess, SpectralRemainderBoundHolds) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto inst = make_instance(kUniform, 5 + s, s);
    const auto fail = oracle::failure_curve(inst, 300);
    for (std::int64_t k : {0, 3, 30, 300}) {
      const auto sp = spectral_success_probability(inst, k);
      ASSERT_TRUE(sp.has_value());
      EXPECT_LE(std::abs((1 - fail[k]) - sp->q11), sp->remainder + 1e-13) << s << " " << k;
    }
  }
}

TEST(ExactSuccess, LargeHorizonUsesSpectralForm) {
  const auto inst = make_instance(kUniform, 40, 3);
  const double mu = smallest_derivative_root(inst.gaps());
  const auto big = static_cast<std::int64_t>(2e6);
  const double q = exact_success_probability(inst, big);
  const double lambda = 1 - 40.0 / 39.0 * mu;
  const double c = eigen_constant(inst).value();
  EXPECT_NEAR(1 - q, c * std::pow(lambda, double(big)), 1e-15);
}

TEST(ExactSuccess, NondecreasingInN) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto curve = success_curve(make_instance(kUniform, 30, s), 2000);
    for (std::size_t k = 1; k < curve.size(); ++k) ASSERT_GE(curve[k], curve[k - 1]);
    EXPECT_LE(curve.back(), 1.0);
  }
}

TEST(ExactSuccess, TailSlopeIsLogLambda) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto inst = make_instance(kUniform, 12, 100 + s);
    const auto ev = oracle::sorted_eigenvalues(inst);
    const double rho = std::max(std::abs(ev[2]), std::abs(ev.back()));
    const auto n0 = static_cast<std::int64_t>(std::ceil(std::log(1e-3) / std::log(rho / ev[1])));
    const auto fail = oracle::failure_curve(inst, n0 + 40);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::int64_t k = n0; k <= n0 + 40; ++k) {
      const double y = std::log(fail[k]);
      sx += double(k);
      sy += y;
      sxx += double(k) * double(k);
      sxy += double(k) * y;
    }
    const double m = 41;
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    EXPECT_NEAR(slope, std::log(second_eigenvalue(inst)), 1e-4);
  }
}

TEST(SimulateMemoryless, DisjointSetsAlwaysDoneAfterOneSample) {
  const std::int64_t cp[] = {1};
  EXPECT_EQ(simulate_memoryless(from_overlaps({1, 0}), cp, 100000, 1)[0], 1.0);
}

TEST(SimulateMemoryless, TwoSetsMatchClosedForm) {
  const std::int64_t cp[] = {3};
  const double f = simulate_memoryless(from_overlaps({1, 0.5}), cp, 100000, 2)[0];
  EXPECT_TRUE(within_binomial_3sigma(f, 0.9375, 100000)) << f;
}

TEST(SimulateMemoryless, RandomInstanceMatchesExact) {
  const auto inst = make_instance(kUniform, 10, 77);
  const std::int64_t cp[] = {0, 10, 50, 200};
  const auto f = simulate_memoryless(inst, cp, 20000, 5);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_TRUE(within_binomial_3sigma(f[i], exact_success_probability(inst, cp[i]), 20000)) << cp[i];
  }
}

TEST(SimulateMemoryless, IndependentOfJobs) {
  const auto inst = make_instance(kUniform, 25, 3);
  EXPECT_EQ(memoryless_absorption_times(inst, 500, 9, 1), memoryless_absorption_times(inst, 500, 9, 3));
}

TEST(DwellTime, MeanIsReciprocalGap) {
  Rng rng(42);
  const double gap = 0.1;  // overlap 0.9
  const std::size_t draws = 100000;
  std::vector<double> d(draws);
  for (auto& v : d) v = static_cast<double>(rng.dwell(gap));
  const double sigma = std::sqrt(0.9) / gap / std::sqrt(double(draws));
  EXPECT_NEAR(stats::mean_and_stderr(d).mean, 1 / gap, 3 * sigma);
  EXPECT_GE(*std::min_element(d.begin(), d.end()), 1.0);
}

TEST(NDeltaMemoryless, TwoSetExamples) {
  const auto inst = from_overlaps({1, 0.5});
  EXPECT_EQ(n_delta_memoryless(inst, 0.1).n_delta, 3);
  // Q11(0) = 1/2 meets the weak threshold 1 - 0.5.
  EXPECT_EQ(n_delta_memoryless(inst, 0.5).n_delta, 0);
  EXPECT_THROW(n_delta_memoryless(inst, 0.0), std::invalid_argument);
  EXPECT_THROW(n_delta_memoryless(inst, 1.0), std::invalid_argument);
}

TEST(NDeltaMemoryless, SmallestSatisfyingN) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto inst = make_instance(kUniform, 20 + s, s);
    for (double delta : {0.3, 0.01}) {
      const auto r = n_delta_memoryless(inst, delta);
      EXPECT_GE(exact_success_probability(inst, r.n_delta), 1 - delta);
      if (r.n_delta > 0) EXPECT_LT(exact_success_probability(inst, r.n_delta - 1), 1 - delta);
    }
  }
}

TEST(NDeltaMemoryless, WithinSandwichOfHarmonicPrediction) {
  const auto inst = make_instance(kUniform, 100, 2718);
  const auto r = n_delta_memoryless(inst, 0.01);
  const double pred = std::abs(std::log(0.01)) * 99 / harmonic_mean(inst.gaps());
  EXPECT_GE(double(r.n_delta), 0.5 * pred);
  EXPECT_LE(double(r.n_delta), 2.0 * pred);
  EXPECT_NEAR(r.spectral_prediction, std::abs(std::log(0.01)) / smallest_derivative_root(inst.gaps()), 1e-9);
}

TEST(FullMemory, PositionIsUniform) {
  const auto inst = make_instance(kUniform, 6, 13);
  const auto sim = simulate_full_memory(inst, 100000, 4);
  std::vector<std::int64_t> counts(6, 0);
  for (auto p : sim.position) {
    ASSERT_GE(p, 1);
    ASSERT_LE(p, 6);
    ++counts[static_cast<std::size_t>(p - 1)];
  }
  EXPECT_LT(stats::chi_square_uniform(counts), 15.0863);  // chi^2_5, 1% level
  for (std::size_t t = 0; t < 100; ++t) EXPECT_EQ(sim.jumps[t] + 1, sim.position[t]);
}

TEST(FullMemory, EqualOverlapsMeanTime) {
  const auto inst = from_overlaps({1, 0.5, 0.5});
  EXPECT_DOUBLE_EQ(expected_time_full_memory(inst), 2.0);
  EXPECT_DOUBLE_EQ(oracle::enumerate_full_memory_time({0.5, 0.5}), 2.0);
  const auto sim = simulate_full_memory(inst, 100000, 8);
  std::vector<double> t(sim.total_samples.begin(), sim.total_samples.end());
  const auto me = stats::mean_and_stderr(t);
  EXPECT_NEAR(me.mean, 2.0, 3 * me.stderr_);
}

TEST(FullMemory, SingleDisjointSet) {
  EXPECT_DOUBLE_EQ(expected_time_full_memory(from_overlaps({1, 0})), 0.5);
}

TEST(FullMemory, ExpectedTimeMatchesEnumeration) {
  std::mt19937_64 gen(5);
  for (std::size_t n = 2; n <= 6; ++n) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto inst = make_instance(kUniform, n, gen());
      const std::vector<double> gaps(inst.gaps().begin(), inst.gaps().end());
      EXPECT_NEAR(expected_time_full_memory(inst), oracle::enumerate_full_memory_time(gaps),
                  1e-12 * expected_time_full_memory(inst));
    }
  }
}

TEST(FullMemory, AnalyticNDeltaLimits) {
  const auto inst = make_instance(kUniform, 300, 6);
  const double n = 300;
  const double h = harmonic_mean(inst.gaps());
  EXPECT_NEAR(n_delta_full_memory(inst, 1e-9), n / (n - 1) * expected_time_full_memory(inst),
              1e-6 * expected_time_full_memory(inst));
  EXPECT_DOUBLE_EQ(n_delta_full_memory(inst, 0.5), n * 0.25 / (2 * h));
  EXPECT_LE(n_delta_full_memory(inst, 1 - 1 / n), expected_time_full_memory(inst));
  EXPECT_THROW(n_delta_full_memory(inst, 1.0), std::invalid_argument);
}

TEST(FullMemory, ClosedFormIsTruncatedExpectation) {
  // n (1 - delta)^2 / (2H) is the partial expectation of the learning time
  // over walks that visit at most (1 - delta) n wrong sets.
  const auto inst = make_instance(kUniform, 500, 2);
  const double delta = 0.5;
  const double truncated = truncated_expected_time_full_memory(inst, delta);
  EXPECT_NEAR(n_delta_full_memory(inst, delta) / truncated, 1.0, 0.01);

  const std::size_t trials = 10000;
  const auto sim = simulate_full_memory(inst, trials, 3);
  const auto k_max = static_cast<std::int64_t>(std::floor((1 - delta) * 500));
  std::vector<double> contrib(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    contrib[t] = sim.jumps[t] <= k_max ? static_cast<double>(sim.total_samples[t]) : 0.0;
  }
  const auto me = stats::mean_and_stderr(contrib);
  EXPECT_NEAR(me.mean, truncated, 3 * me.stderr_);

  // The (1 - delta) quantile of the time is a different, larger quantity.
  const auto q = static_cast<double>(empirical_n_delta(sim.total_samples, delta));
  EXPECT_GT(q, 2.0 * n_delta_full_memory(inst, delta));
}

TEST(FullMemory, DominatesMemorylessInSimulation) {
  for (std::size_t n : {20u, 60u}) {
    const auto inst = make_instance(kUniform, n, n);
    const std::size_t trials = 4000;
    const double delta = 0.05;
    const auto ml = memoryless_absorption_times(inst, trials, 1);
    const auto fm = simulate_full_memory(inst, trials, 2).total_samples;
    const double a = static_cast<double>(empirical_n_delta(fm, delta));
    const double b = static_cast<double>(empirical_n_delta(ml, delta));
    EXPECT_LT(a + quantile_ci_halfwidth(fm, delta), b - quantile_ci_halfwidth(ml, delta)) << n;
  }
}

TEST(FullMemory, RatioGrowsAsDeltaShrinks) {
  const auto inst = make_instance(kUniform, 200, 11);
  auto ratio = [&](double delta) {
    return double(n_delta_memoryless(inst, delta).n_delta) / n_delta_full_memory(inst, delta);
  };
  EXPECT_GT(ratio(1e-3), ratio(1e-1));
}

TEST(EmpiricalNDelta, QuantileConvention) {
  const std::int64_t t[] = {5, 1, 3, 2, 4, 6, 8, 7, 10, 9};
  EXPECT_EQ(empirical_n_delta(t, 0.1), 9);
  EXPECT_EQ(empirical_n_delta(t, 0.5), 5);
  EXPECT_EQ(empirical_n_delta(t, 0.95), 1);
  EXPECT_GE(quantile_ci_halfwidth(t, 0.5), 0.0);
}

TEST(Method, Names) {
  EXPECT_EQ(to_string(Method::MemorylessExact), "memoryless_exact");
  EXPECT_EQ(to_string(Method::FullMemorySim), "fullmem_sim");
}
