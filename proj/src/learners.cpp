#include "learnrate/learners.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "learnrate/parallel.hpp"
#include "learnrate/seeding.hpp"
#include "learnrate/spectral.hpp"

namespace learnrate {

namespace {

void require_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
}

// Distribution over sets, advanced one teacher sample at a time. Index 0 is
// the teacher's set. One step is O(n): row i of T is a_i on the diagonal and
// x_i / (n - 1) elsewhere.
class Propagator {
 public:
  explicit Propagator(const LearnerInstance& inst)
      : gaps_(inst.gaps()),
        inv_denom_(1.0 / static_cast<double>(inst.n() - 1)),
        p_(inst.n(), 1.0 / static_cast<double>(inst.n())) {}

  void step(std::int64_t count) {
    for (std::int64_t s = 0; s < count; ++s) {
      double outflow = 0.0;
      for (std::size_t i = 0; i < gaps_.size(); ++i) outflow += gaps_[i] * p_[i + 1];
      const double spread = outflow * inv_denom_;
      p_[0] += spread;
      for (std::size_t i = 0; i < gaps_.size(); ++i) {
        const double leaving = gaps_[i] * p_[i + 1];
        p_[i + 1] += spread - leaving * inv_denom_ - leaving;
      }
    }
  }

  double q11() const { return p_[0]; }

 private:
  std::span<const double> gaps_;
  double inv_denom_;
  std::vector<double> p_;
};

// Time until the memoryless learner first holds set 0, or horizon + 1 if
// that has not happened within the horizon.
std::int64_t memoryless_walk(const LearnerInstance& inst, Rng& rng,
                             std::int64_t horizon) {
  const auto n = inst.n();
  const auto gaps = inst.gaps();
  auto state = static_cast<std::size_t>(rng.below(n));
  std::int64_t time = 0;
  while (state != 0) {
    time += rng.dwell(gaps[state - 1]);
    if (time > horizon) return horizon + 1;
    auto next = static_cast<std::size_t>(rng.below(n - 1));
    if (next >= state) ++next;
    state = next;
  }
  return time;
}

}  // namespace

std::vector<double> success_curve(const LearnerInstance& inst, std::int64_t N) {
  if (N < 0) throw std::invalid_argument("N must be >= 0");
  Propagator prop(inst);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(N) + 1);
  out.push_back(prop.q11());
  for (std::int64_t k = 1; k <= N; ++k) {
    prop.step(1);
    out.push_back(prop.q11());
  }
  return out;
}

double success_probability_by_squaring(const LearnerInstance& inst,
                                       std::int64_t N) {
  if (N < 0) throw std::invalid_argument("N must be >= 0");
  const auto n = static_cast<Eigen::Index>(inst.n());
  const TransitionMatrix t(inst);
  Eigen::MatrixXd base(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      base(i, j) = t(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  Eigen::RowVectorXd p = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (std::int64_t e = N; e > 0; e >>= 1) {
    if (e & 1) p = p * base;
    if (e > 1) base = base * base;
  }
  return p(0);
}

std::optional<SpectralSuccess> spectral_success_probability(
    const LearnerInstance& inst, std::int64_t N) {
  if (N < 0) throw std::invalid_argument("N must be >= 0");
  const auto c = eigen_constant(inst);
  if (!c) return std::nullopt;
  const double lambda = second_eigenvalue(inst);
  const double rho = subdominant_modulus(inst);
  double sum_x = 0.0;
  double sum_inv = 0.0;
  for (double g : inst.gaps()) {
    sum_x += g;
    sum_inv += 1.0 / g;
  }
  const double nd = static_cast<double>(N);
  SpectralSuccess s;
  s.q11 = 1.0 - *c * std::pow(lambda, nd);
  s.remainder = std::pow(rho, nd) * std::sqrt(sum_x) * std::sqrt(sum_inv) /
                static_cast<double>(inst.n());
  return s;
}

double exact_success_probability(const LearnerInstance& inst, std::int64_t N) {
  if (N < 0) throw std::invalid_argument("N must be >= 0");
  const double n = static_cast<double>(inst.n());
  const double step_cost = static_cast<double>(N) * n;
  if (step_cost <= 2e7) {
    Propagator prop(inst);
    prop.step(N);
    return prop.q11();
  }
  if (const auto s = spectral_success_probability(inst, N);
      s && s->remainder <= 1e-15) {
    return s->q11;
  }
  const double square_cost = n * n * n * std::log2(static_cast<double>(N));
  if (square_cost < step_cost) return success_probability_by_squaring(inst, N);
  Propagator prop(inst);
  prop.step(N);
  return prop.q11();
}

std::vector<double> simulate_memoryless(const LearnerInstance& inst,
                                        std::span<const std::int64_t> checkpoints,
                                        std::size_t trials, std::uint64_t seed,
                                        unsigned jobs) {
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
  if (checkpoints.empty()) return {};
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end())) {
    throw std::invalid_argument("checkpoints must be sorted");
  }
  const std::int64_t horizon = checkpoints.back();
  std::vector<std::int64_t> times(trials);
  parallel_for(trials, jobs, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    times[t] = memoryless_walk(inst, rng, horizon);
  });
  std::vector<double> out;
  for (auto N : checkpoints) {
    const auto hits = std::count_if(times.begin(), times.end(),
                                    [N](std::int64_t x) { return x <= N; });
    out.push_back(static_cast<double>(hits) / static_cast<double>(trials));
  }
  return out;
}

std::vector<std::int64_t> memoryless_absorption_times(
    const LearnerInstance& inst, std::size_t trials, std::uint64_t seed,
    unsigned jobs) {
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
  std::vector<std::int64_t> times(trials);
  parallel_for(trials, jobs, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    times[t] = memoryless_walk(inst, rng, std::int64_t{1} << 62);
  });
  return times;
}

MemorylessNDelta n_delta_memoryless(const LearnerInstance& inst, double delta) {
  require_delta(delta);
  const double target = 1.0 - delta;
  MemorylessNDelta out;
  out.spectral_prediction =
      std::abs(std::log(delta)) / smallest_derivative_root(inst.gaps());

  Propagator lo_state(inst);
  std::int64_t lo = 0;
  if (lo_state.q11() >= target) return out;

  // Doubling: lo always fails the target, hi = 2 lo (or 1) is probed next.
  std::int64_t hi = 1;
  while (true) {
    Propagator probe = lo_state;
    probe.step(hi - lo);
    if (probe.q11() >= target) break;
    lo_state = std::move(probe);
    lo = hi;
    if (hi > (std::int64_t{1} << 40)) {
      throw std::runtime_error("N_delta exceeds 2^40 samples");
    }
    hi *= 2;
  }
  // Bisection on (lo, hi].
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    Propagator probe = lo_state;
    probe.step(mid - lo);
    if (probe.q11() >= target) {
      hi = mid;
    } else {
      lo_state = std::move(probe);
      lo = mid;
    }
  }
  out.n_delta = hi;
  return out;
}

FullMemoryTrials simulate_full_memory(const LearnerInstance& inst,
                                      std::size_t trials, std::uint64_t seed,
                                      unsigned jobs) {
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
  const auto n = inst.n();
  const auto gaps = inst.gaps();
  FullMemoryTrials out;
  out.total_samples.resize(trials);
  out.jumps.resize(trials);
  out.position.resize(trials);
  parallel_for(trials, jobs, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::int64_t total = 0;
    std::size_t k = 0;
    // Partial Fisher-Yates: draw sets without replacement until set 0.
    for (;; ++k) {
      const auto pick = k + static_cast<std::size_t>(rng.below(n - k));
      std::swap(order[k], order[pick]);
      if (order[k] == 0) break;
      total += rng.dwell(gaps[order[k] - 1]);
    }
    out.total_samples[t] = total;
    out.jumps[t] = static_cast<std::int64_t>(k);
    out.position[t] = static_cast<std::int64_t>(k + 1);
  });
  return out;
}

double expected_time_full_memory(const LearnerInstance& inst) {
  double sum = 0.0;
  for (double g : inst.gaps()) sum += 1.0 / g;
  return 0.5 * sum;
}

double n_delta_full_memory(const LearnerInstance& inst, double delta) {
  require_delta(delta);
  const double n = static_cast<double>(inst.n());
  return n * (1.0 - delta) * (1.0 - delta) / (2.0 * harmonic_mean(inst.gaps()));
}

double truncated_expected_time_full_memory(const LearnerInstance& inst,
                                           double delta) {
  require_delta(delta);
  const double n = static_cast<double>(inst.n());
  // Visiting k wrong sets before the teacher's set has probability 1/n; each
  // wrong set is among them with probability k / (n - 1).
  const double k_max = std::min(std::floor((1.0 - delta) * n), n - 1.0);
  double sum_inv = 0.0;
  for (double g : inst.gaps()) sum_inv += 1.0 / g;
  return sum_inv * k_max * (k_max + 1.0) / (2.0 * n * (n - 1.0));
}

std::int64_t empirical_n_delta(std::span<const std::int64_t> times,
                               double delta) {
  require_delta(delta);
  if (times.empty()) throw std::invalid_argument("no trials");
  std::vector<std::int64_t> v(times.begin(), times.end());
  const double m = static_cast<double>(v.size());
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - delta) * m));
  rank = std::clamp<std::size_t>(rank, 1, v.size());
  auto nth = v.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(v.begin(), nth, v.end());
  return *nth;
}

double quantile_ci_halfwidth(std::span<const std::int64_t> times,
                             double delta) {
  require_delta(delta);
  if (times.empty()) throw std::invalid_argument("no trials");
  std::vector<std::int64_t> v(times.begin(), times.end());
  std::sort(v.begin(), v.end());
  const double m = static_cast<double>(v.size());
  const double p = 1.0 - delta;
  const double spread = 1.96 * std::sqrt(m * p * (1.0 - p));
  const double last = m - 1.0;
  const auto lo = static_cast<std::size_t>(std::clamp(std::floor(m * p - spread) - 1.0, 0.0, last));
  const auto hi = static_cast<std::size_t>(std::clamp(std::ceil(m * p + spread) - 1.0, 0.0, last));
  return 0.5 * static_cast<double>(v[hi] - v[lo]);
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::MemorylessExact:
      return "memoryless_exact";
    case Method::MemorylessSim:
      return "memoryless_sim";
    case Method::FullMemorySim:
      return "fullmem_sim";
    case Method::FullMemoryExact:
      return "fullmem_exact";
  }
  return "unknown";
}

}  // namespace learnrate
