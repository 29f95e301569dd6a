#include "learnrate/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "learnrate/seeding.hpp"

namespace learnrate {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::Uniform:
      return "uniform";
    case Family::PowerGap:
      return "powergap";
    case Family::Empirical:
      return "empirical";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "uniform") return Family::Uniform;
  if (name == "powergap" || name == "power") return Family::PowerGap;
  if (name == "empirical") return Family::Empirical;
  throw std::invalid_argument("unknown distribution family '" +
                              std::string(name) +
                              "' (expected uniform, powergap or empirical)");
}

double OverlapDistribution::reciprocal_mean() const {
  if (family == Family::Empirical) {
    double sum = 0.0;
    for (double g : gaps) sum += 1.0 / g;
    return sum / static_cast<double>(gaps.size());
  }
  if (beta <= 0.0) return std::numeric_limits<double>::infinity();
  return (1.0 + beta) / beta;
}

double OverlapDistribution::stable_exponent() const {
  if (family == Family::Empirical) return 2.0;
  return std::min(1.0 + beta, 2.0);
}

OverlapDistribution make_distribution(Family family, double beta, double c,
                                      std::vector<double> gaps) {
  OverlapDistribution dist;
  dist.family = family;
  switch (family) {
    case Family::Uniform:
      dist.beta = 0.0;
      dist.c = 1.0;
      break;
    case Family::PowerGap:
      if (!(beta > -1.0) || !std::isfinite(beta)) {
        throw std::invalid_argument(
            "gap-density exponent beta must be finite and > -1");
      }
      dist.beta = beta;
      dist.c = 1.0 + beta;
      break;
    case Family::Empirical:
      if (gaps.empty()) {
        throw std::invalid_argument("empirical distribution needs gaps");
      }
      for (double g : gaps) {
        if (!(g > 0.0 && g <= 1.0)) {
          throw std::invalid_argument("empirical gaps must lie in (0, 1]");
        }
      }
      dist.beta = beta;
      dist.c = c;
      dist.gaps = std::move(gaps);
      break;
  }
  return dist;
}

double gap_from_uniform(const OverlapDistribution& dist, double u) {
  if (dist.family == Family::Empirical) {
    const auto m = dist.gaps.size();
    auto idx = static_cast<std::size_t>((1.0 - u) * static_cast<double>(m));
    return dist.gaps[std::min(idx, m - 1)];
  }
  if (dist.beta == 0.0) return u;
  return std::pow(u, 1.0 / (1.0 + dist.beta));
}

std::vector<double> sample_gaps(const OverlapDistribution& dist,
                                std::size_t count, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("sample_gaps: count must be >= 1");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = derive_seed(seed, i);
    double x;
    // Underflow of u^(1/(1+beta)) to 0 is resampled from the same stream.
    while (true) {
      const double u = static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
      x = gap_from_uniform(dist, u);
      if (x > 0.0) break;
      bits = mix64(bits);
    }
    out[i] = x;
  }
  return out;
}

LearnerInstance::LearnerInstance(std::vector<double> overlaps,
                                 std::vector<double> gaps)
    : overlaps_(std::move(overlaps)),
      gaps_(std::move(gaps)),
      min_gap_(*std::min_element(gaps_.begin(), gaps_.end())) {}

LearnerInstance LearnerInstance::from_gaps(std::vector<double> gaps) {
  if (gaps.empty()) {
    throw std::invalid_argument("an instance needs n >= 2 sets");
  }
  std::vector<double> overlaps(gaps.size() + 1);
  overlaps[0] = 1.0;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (!(gaps[i] > 0.0 && gaps[i] <= 1.0)) {
      throw std::invalid_argument("gaps must lie in (0, 1]");
    }
    overlaps[i + 1] = 1.0 - gaps[i];
  }
  return LearnerInstance(std::move(overlaps), std::move(gaps));
}

LearnerInstance LearnerInstance::from_overlaps(
    std::span<const double> overlaps) {
  if (overlaps.size() < 2) {
    throw std::invalid_argument("an instance needs n >= 2 sets");
  }
  if (overlaps[0] != 1.0) {
    throw std::invalid_argument("overlap of the teacher's set must be 1");
  }
  std::vector<double> gaps(overlaps.size() - 1);
  for (std::size_t i = 1; i < overlaps.size(); ++i) {
    if (!(overlaps[i] >= 0.0 && overlaps[i] < 1.0)) {
      throw std::invalid_argument("wrong-set overlaps must lie in [0, 1)");
    }
    gaps[i - 1] = 1.0 - overlaps[i];
  }
  return LearnerInstance({overlaps.begin(), overlaps.end()}, std::move(gaps));
}

LearnerInstance make_instance(const OverlapDistribution& dist, std::size_t n,
                              std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("an instance needs n >= 2 sets");
  if (dist.family == Family::Empirical && dist.gaps.size() == n - 1) {
    return LearnerInstance::from_gaps(dist.gaps);
  }
  return LearnerInstance::from_gaps(sample_gaps(dist, n - 1, seed));
}

}  // namespace learnrate
