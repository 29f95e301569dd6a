#include "learnrate/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "learnrate/ks.hpp"
#include "learnrate/learners.hpp"
#include "learnrate/parallel.hpp"
#include "learnrate/seeding.hpp"
#include "learnrate/spectral.hpp"

namespace learnrate {

std::string_view to_string(Learner l) {
  return l == Learner::Memoryless ? "memoryless" : "fullmem";
}

std::string_view to_string(Estimator e) {
  return e == Estimator::SpectralExact ? "spectral-exact" : "simulated";
}

Learner parse_learner(std::string_view name) {
  if (name == "memoryless") return Learner::Memoryless;
  if (name == "fullmem") return Learner::FullMemory;
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (expected memoryless or fullmem)");
}

ScalingModel parse_model(std::string_view name) {
  if (name == "n_log_n") return ScalingModel::NLogN;
  if (name == "linear_n") return ScalingModel::LinearN;
  if (name == "power_law") return ScalingModel::PowerLaw;
  throw std::invalid_argument("unknown scaling model '" + std::string(name) + "'");
}

ScalingTable scaling_sweep(const OverlapDistribution& dist, double delta,
                           std::span<const std::size_t> n_grid,
                           Learner method, std::uint64_t seed,
                           const SweepOptions& options) {
  if (n_grid.empty()) throw std::invalid_argument("empty n grid");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (options.instances == 0) throw std::invalid_argument("need at least one instance per point");
  for (std::size_t g = 1; g < n_grid.size(); ++g) {
    if (n_grid[g] <= n_grid[g - 1]) throw std::invalid_argument("n grid must be strictly increasing");
  }

  ScalingTable table;
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    const std::size_t n = n_grid[g];
    const std::uint64_t point_seed = derive_seed(seed, g);
    std::vector<double> values(options.instances);
    parallel_for(options.instances, options.jobs, [&](std::size_t i) {
      const auto inst = make_instance(dist, n, derive_seed(point_seed, i));
      if (options.estimator == Estimator::SpectralExact) {
        values[i] = method == Learner::Memoryless
                        ? std::abs(std::log(delta)) /
                              smallest_derivative_root(inst.gaps())
                        : n_delta_full_memory(inst, delta);
      } else {
        const auto sim_seed = derive_seed(point_seed, options.instances + i);
        const auto times =
            method == Learner::Memoryless
                ? memoryless_absorption_times(inst, options.sim_trials, sim_seed)
                : simulate_full_memory(inst, options.sim_trials, sim_seed)
                      .total_samples;
        values[i] = static_cast<double>(empirical_n_delta(times, delta));
      }
    });

    ScalingRow row;
    row.n = n;
    row.beta = dist.beta;
    row.delta = delta;
    row.method = method;
    row.estimator = options.estimator;
    row.seed = point_seed;
    row.n_delta = stats::median(values);
    // Asymptotic s.e. of a median, with the density at the median from the
    // interquartile range under a normal shape.
    const double iqr = stats::quantile(values, 0.75) - stats::quantile(values, 0.25);
    row.stderr_ = std::sqrt(std::numbers::pi / 2.0) * (iqr / 1.349) /
                  std::sqrt(static_cast<double>(values.size()));
    row.relative_iqr = iqr / row.n_delta;
    row.per_instance = std::move(values);
    table.push_back(std::move(row));
  }
  return table;
}

ScalingFit fit_scaling(const ScalingTable& table, ScalingModel model) {
  if (table.size() < 4) throw std::invalid_argument("fit needs at least 4 grid points");
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (table[i].n <= table[i - 1].n) throw std::invalid_argument("degenerate n grid");
  }
  for (const auto& row : table) {
    if (!(row.n_delta > 0.0) || row.n < 2) {
      throw std::invalid_argument("fit needs positive N_delta and n >= 2");
    }
  }
  ScalingFit fit;
  fit.model = model;

  const double m = static_cast<double>(table.size());
  double sx = 0, sy = 0;
  for (const auto& row : table) {
    sx += std::log(static_cast<double>(row.n));
    sy += std::log(row.n_delta);
  }
  const double mx = sx / m;
  const double my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& row : table) {
    const double dx = std::log(static_cast<double>(row.n)) - mx;
    const double dy = std::log(row.n_delta) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;

  if (model != ScalingModel::PowerLaw) {
    for (const auto& row : table) {
      const double n = static_cast<double>(row.n);
      const double h = model == ScalingModel::NLogN ? n * std::log(n) : n;
      fit.ratios.push_back(row.n_delta / h);
    }
    const auto [lo, hi] = std::minmax_element(fit.ratios.begin(), fit.ratios.end());
    fit.ratio_spread = *hi / *lo;
  }
  return fit;
}

}  // namespace learnrate
