#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace learnrate {

enum class Family { Uniform, PowerGap, Empirical };

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

// Law of the gap x = 1 - a between the teacher's set and a wrong set.
//
// PowerGap has density (1 + beta) x^beta on [0, 1]; Uniform is PowerGap with
// beta = 0. Empirical is the uniform law on a fixed list of gaps, and is also
// the way to hand a specific overlap vector to make_instance().
struct OverlapDistribution {
  Family family = Family::Uniform;
  double beta = 0.0;
  // Gap density at 0+. Derived from beta for PowerGap.
  double c = 1.0;
  std::vector<double> gaps;

  // E(1/x); infinite for beta <= 0 power laws.
  double reciprocal_mean() const;

  // Exponent of the stable law attracting sums of 1/x: min(1 + beta, 2).
  double stable_exponent() const;
};

// Throws std::invalid_argument on beta <= -1 or Empirical gaps outside (0, 1].
// `c` is accepted for symmetry with the law's parametrisation but ignored for
// power families, where normalisation fixes it to 1 + beta.
OverlapDistribution make_distribution(Family family, double beta = 0.0,
                                      double c = 1.0,
                                      std::vector<double> gaps = {});

// Inverse-CDF map from u in (0, 1] to a gap. Returns 0 only on underflow.
double gap_from_uniform(const OverlapDistribution& dist, double u);

// `count` i.i.d. gaps in (0, 1]; element i depends only on (seed, i).
std::vector<double> sample_gaps(const OverlapDistribution& dist,
                                std::size_t count, std::uint64_t seed);

// One realised learning problem: overlaps a (a[0] = 1 is the teacher's set)
// and gaps x[i] = 1 - a[i + 1] of the n - 1 wrong sets.
class LearnerInstance {
 public:
  // Throws std::invalid_argument unless every gap lies in (0, 1].
  static LearnerInstance from_gaps(std::vector<double> gaps);
  // Throws std::invalid_argument unless a[0] == 1 and a[i] in [0, 1) for i > 0.
  static LearnerInstance from_overlaps(std::span<const double> overlaps);

  std::size_t n() const { return overlaps_.size(); }
  std::span<const double> overlaps() const { return overlaps_; }
  std::span<const double> gaps() const { return gaps_; }
  double min_gap() const { return min_gap_; }

 private:
  LearnerInstance(std::vector<double> overlaps, std::vector<double> gaps);

  std::vector<double> overlaps_;
  std::vector<double> gaps_;
  double min_gap_;
};

// Draws n - 1 gaps from `dist`. Empirical distributions with exactly n - 1
// listed gaps are used verbatim instead of resampled.
LearnerInstance make_instance(const OverlapDistribution& dist, std::size_t n,
                              std::uint64_t seed);

}  // namespace learnrate
