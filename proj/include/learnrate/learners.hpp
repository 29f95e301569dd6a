#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "learnrate/distributions.hpp"

namespace learnrate {

// Probability that the memoryless learner holds the teacher's set after N
// samples, starting from the uniform distribution over sets:
// Q11(N) = [p0^T T^N]_0.
//
// Picks the cheapest exact route: O(n) structured vector steps for small
// N n, the two-term spectral form once its remainder bound is below 1e-15,
// otherwise repeated squaring of the dense matrix.
double exact_success_probability(const LearnerInstance& inst, std::int64_t N);

// Q11(0), ..., Q11(N) by structured stepping.
std::vector<double> success_curve(const LearnerInstance& inst, std::int64_t N);

// Q11 by repeated squaring of the dense matrix (O(n^3 log N)).
double success_probability_by_squaring(const LearnerInstance& inst,
                                       std::int64_t N);

struct SpectralSuccess {
  double q11 = 0.0;        // 1 - C lambda*^N
  double remainder = 0.0;  // |Q11(N) - q11| <= remainder
};

// Two-term spectral form of Q11 with a rigorous bound on the neglected
// eigencomponents: rho^N sqrt(sum x_i) sqrt(sum 1/x_i) / n, where rho is the
// largest modulus among the remaining eigenvalues. Empty when lambda* is
// degenerate.
std::optional<SpectralSuccess> spectral_success_probability(
    const LearnerInstance& inst, std::int64_t N);

// Monte Carlo success fractions at each checkpoint (sorted ascending). Jump
// chain: geometric dwell in each wrong set, then a uniform jump to one of
// the other n - 1 sets. Trial t uses derive_seed(seed, t).
std::vector<double> simulate_memoryless(const LearnerInstance& inst,
                                        std::span<const std::int64_t> checkpoints,
                                        std::size_t trials, std::uint64_t seed,
                                        unsigned jobs = 1);

// Samples consumed before first adopting the teacher's set, per trial.
std::vector<std::int64_t> memoryless_absorption_times(
    const LearnerInstance& inst, std::size_t trials, std::uint64_t seed,
    unsigned jobs = 1);

struct MemorylessNDelta {
  std::int64_t n_delta = 0;      // smallest N with Q11(N) >= 1 - delta
  double spectral_prediction = 0.0;  // |log delta| / mu*
};

// Exact N_delta by doubling then bisection over structured steps.
MemorylessNDelta n_delta_memoryless(const LearnerInstance& inst, double delta);

struct FullMemoryTrials {
  std::vector<std::int64_t> total_samples;  // samples before adopting set 0
  std::vector<std::int64_t> jumps;          // rejections before set 0
  std::vector<std::int64_t> position;       // 1-based rank of set 0 in the walk
};

// Learner that never revisits a rejected set: a uniform random order of the
// sets, walked with geometric dwell times until the teacher's set comes up.
FullMemoryTrials simulate_full_memory(const LearnerInstance& inst,
                                      std::size_t trials, std::uint64_t seed,
                                      unsigned jobs = 1);

// (1/2) sum 1 / (1 - a_i) = (n - 1) / (2 H).
double expected_time_full_memory(const LearnerInstance& inst);

// n (1 - delta)^2 / (2 H), H over the n - 1 gaps.
double n_delta_full_memory(const LearnerInstance& inst, double delta);

// Exact partial expectation E[T; J <= (1 - delta) n] that the closed form
// above approximates (J the number of wrong sets visited, T the time).
double truncated_expected_time_full_memory(const LearnerInstance& inst,
                                           double delta);

// Smallest N such that a fraction >= 1 - delta of the times are <= N.
std::int64_t empirical_n_delta(std::span<const std::int64_t> times,
                               double delta);

// Half-width of a 95% distribution-free confidence interval for the
// (1 - delta) quantile of `times` (binomial order-statistic interval).
double quantile_ci_halfwidth(std::span<const std::int64_t> times, double delta);

enum class Method { MemorylessExact, MemorylessSim, FullMemorySim, FullMemoryExact };
std::string_view to_string(Method m);

struct LearnOutcome {
  Method method = Method::MemorylessExact;
  std::size_t n = 0;
  double delta = 0.0;
  double n_delta = 0.0;
  std::size_t trials = 0;      // simulation only
  double ci_halfwidth = 0.0;   // simulation only
};

}  // namespace learnrate
