#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "learnrate/distributions.hpp"

namespace learnrate {

enum class Learner { Memoryless, FullMemory };
enum class Estimator { SpectralExact, Simulated };

std::string_view to_string(Learner l);
std::string_view to_string(Estimator e);
Learner parse_learner(std::string_view name);

struct ScalingRow {
  std::size_t n = 0;
  double beta = 0.0;
  double delta = 0.0;
  Learner method = Learner::Memoryless;
  double n_delta = 0.0;  // median across instances
  Estimator estimator = Estimator::SpectralExact;
  double stderr_ = 0.0;  // standard error of the median (normal approx.)
  std::uint64_t seed = 0;
  double relative_iqr = 0.0;
  std::vector<double> per_instance;  // N_delta of each instance
};

using ScalingTable = std::vector<ScalingRow>;

struct SweepOptions {
  std::size_t instances = 30;
  Estimator estimator = Estimator::SpectralExact;
  std::size_t sim_trials = 2000;  // per instance, Simulated only
  unsigned jobs = 1;
};

// Per grid point, `instances` independent instances with N_delta from
//   memoryless:  |log delta| / mu*            (SpectralExact)
//   full memory: n (1 - delta)^2 / (2 H)      (SpectralExact)
// or from the (1 - delta) quantile of simulated learning times (Simulated).
// Instance i at grid index g uses derive_seed(derive_seed(seed, g), i).
ScalingTable scaling_sweep(const OverlapDistribution& dist, double delta,
                           std::span<const std::size_t> n_grid,
                           Learner method, std::uint64_t seed,
                           const SweepOptions& options = {});

enum class ScalingModel { NLogN, LinearN, PowerLaw };
ScalingModel parse_model(std::string_view name);

struct ScalingFit {
  ScalingModel model = ScalingModel::PowerLaw;
  // PowerLaw: log N = intercept + slope log n.
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  // NLogN / LinearN: N_delta / h(n) per grid point and max / min spread.
  std::vector<double> ratios;
  double ratio_spread = 0.0;
};

// Throws std::invalid_argument for fewer than 4 points or a degenerate grid.
ScalingFit fit_scaling(const ScalingTable& table, ScalingModel model);

}  // namespace learnrate
