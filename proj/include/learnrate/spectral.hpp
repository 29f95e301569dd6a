#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "learnrate/distributions.hpp"

namespace learnrate {

// Dense row-major transition matrix of the memoryless learner. Row i keeps
// probability a_i on the diagonal and spreads 1 - a_i evenly over the other
// n - 1 states; state 0 (the teacher's set) is absorbing.
class TransitionMatrix {
 public:
  explicit TransitionMatrix(const LearnerInstance& inst);

  std::size_t n() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * n_ + j];
  }
  std::span<const double> data() const { return data_; }

 private:
  std::size_t n_;
  std::vector<double> data_;
};

TransitionMatrix build_transition_matrix(const LearnerInstance& inst);

// Largest size for which the characteristic polynomial is expanded.
inline constexpr std::size_t kCharPolyCap = 64;

// Coefficients (constant term first) of the characteristic polynomial
// det(xI - B) of B = ((n-1)/n)(I - T), via Hessenberg reduction.
std::vector<double> char_poly_of_b(const LearnerInstance& inst);

// Coefficients of x p'(x) / n with p(x) = x * prod_i (x - x_i).
std::vector<double> scaled_derivative_poly(const LearnerInstance& inst);

// max |coef difference| / max |coef| between the two polynomials above.
// Throws std::invalid_argument when n > cap.
double char_poly_identity_residual(const LearnerInstance& inst,
                                   std::size_t cap = kCharPolyCap);

// Logarithmic derivative p'/p of p(x) = x * prod(x - x_i), at mu.
double log_derivative(std::span<const double> gaps, double mu);

// Smallest positive root mu* of p'. It is the unique zero of the strictly
// decreasing log_derivative on (0, min gap); found by bisection to an
// absolute tolerance of 1e-14 * min gap. Throws on empty or nonpositive gaps.
double smallest_derivative_root(std::span<const double> gaps);

// Second positive root of p'. Equals the second-smallest gap when it is
// tied with the smallest; empty when there is a single gap.
std::optional<double> second_derivative_root(std::span<const double> gaps);

// (n - 1) / sum(1 / x_i) over the gaps. Throws on empty or nonpositive input.
double harmonic_mean(std::span<const double> gaps);

// lambda* = 1 - n mu* / (n - 1).
double lambda_from_mu(double mu, std::size_t n);
double second_eigenvalue(const LearnerInstance& inst);

// Largest modulus among eigenvalues other than 1 and lambda*. All
// eigenvalues of T lie in [-1/(n-1), 1].
double subdominant_modulus(const LearnerInstance& inst);

// Dense check route, n <= kCharPolyCap: all eigenvalues of T sorted
// descending (Eigen's nonsymmetric solver; imaginary parts are rounding).
std::vector<double> dense_eigenvalues(const LearnerInstance& inst);
double dense_second_eigenvalue(const LearnerInstance& inst);

struct EigenPair {
  double lambda;
  std::vector<double> right;  // T v = lambda v
  std::vector<double> left;   // w^T T = lambda w^T, with <w, v> = 1
  int iterations;
  double residual;
};

// Minimum separation between lambda* and the rest of the spectrum below
// which eigen_constant() declines to answer.
inline constexpr double kDegeneracyGap = 1e-8;

// Right/left eigenvectors for lambda* by inverse iteration with shift
// lambda* + 1e-12. Each solve is O(n): T - sI is diagonal plus rank one.
// Empty when lambda* is within kDegeneracyGap of another eigenvalue,
// including the eigenvalue 1.
std::optional<EigenPair> dominant_eigenpair(const LearnerInstance& inst);

// C in Q11(N) = 1 - C lambda*^N, i.e. -(sum_j v_j) w_1 / n.
std::optional<double> eigen_constant(const LearnerInstance& inst);

struct SpectralSummary {
  std::size_t n = 0;
  double lambda_star = 0.0;
  double mu_star = 0.0;
  double harmonic = 0.0;
  std::optional<double> eigen_constant;
  bool bound_lo_ok = false;  // H / 2 <= (n - 1) mu*
  bool bound_hi_ok = false;  // (n - 1) mu* <= H
};

SpectralSummary summarize_spectrum(const LearnerInstance& inst);

}  // namespace learnrate
