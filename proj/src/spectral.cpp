#include "learnrate/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace learnrate {

namespace {

void require_positive(std::span<const double> gaps, const char* what) {
  if (gaps.empty()) throw std::invalid_argument(std::string(what) + ": empty input");
  for (double g : gaps) {
    if (!(g > 0.0)) {
      throw std::invalid_argument(std::string(what) + ": gaps must be > 0");
    }
  }
}

// Zero of log_derivative on (left, right), where it falls from +inf to -inf.
double bisect_log_derivative(std::span<const double> gaps, double left,
                             double right, double tol) {
  double lo = left;
  double hi = right;
  while (hi - lo > tol) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (log_derivative(gaps, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

// Root of p' between consecutive sorted roots `left` <= `right` of p.
double derivative_root_in_interval(std::span<const double> gaps, double left,
                                   double right) {
  if (left == right) return left;  // tied roots of p are roots of p'
  return bisect_log_derivative(gaps, left, right, 1e-14 * right);
}

using Poly = std::vector<long double>;

Poly multiply_linear(const Poly& p, long double root) {
  // p(x) * (x - root)
  Poly out(p.size() + 1, 0.0L);
  for (std::size_t k = 0; k < p.size(); ++k) {
    out[k + 1] += p[k];
    out[k] -= root * p[k];
  }
  return out;
}

Eigen::MatrixXd b_matrix(const LearnerInstance& inst) {
  const auto n = inst.n();
  const TransitionMatrix t(inst);
  const double scale = static_cast<double>(n - 1) / static_cast<double>(n);
  Eigen::MatrixXd b(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      b(i, j) = scale * ((i == j ? 1.0 : 0.0) - t(i, j));
    }
  }
  return b;
}

Eigen::MatrixXd t_matrix(const LearnerInstance& inst) {
  const auto n = inst.n();
  const TransitionMatrix t(inst);
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = t(i, j);
  return m;
}

// Gap of state i, with the teacher's state at index 0.
double state_gap(const LearnerInstance& inst, std::size_t i) {
  return i == 0 ? 0.0 : inst.gaps()[i - 1];
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

void apply_right(const LearnerInstance& inst, const std::vector<double>& v,
                 std::vector<double>& out) {
  const auto n = inst.n();
  const double denom = static_cast<double>(n - 1);
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  const auto a = inst.overlaps();
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = a[i] * v[i] + state_gap(inst, i) / denom * (total - v[i]);
  }
}

void apply_left(const LearnerInstance& inst, const std::vector<double>& w,
                std::vector<double>& out) {
  const auto n = inst.n();
  const double denom = static_cast<double>(n - 1);
  double weighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) weighted += w[i] * state_gap(inst, i);
  const auto a = inst.overlaps();
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = a[j] * w[j] + (weighted - w[j] * state_gap(inst, j)) / denom;
  }
}

// Solves (T - sI) y = b (transpose = false) or y^T (T - sI) = b^T
// (transpose = true). T - sI = D + u 1^T with D_i = 1 - s - n x_i / (n - 1)
// and u = x / (n - 1); Sherman-Morrison gives the solve in O(n).
std::vector<double> shifted_solve(const LearnerInstance& inst, double shift,
                                  const std::vector<double>& b,
                                  bool transpose) {
  const auto n = inst.n();
  const double nn = static_cast<double>(n);
  const double denom = nn - 1.0;
  std::vector<double> dinv(n);
  for (std::size_t i = 0; i < n; ++i) {
    dinv[i] = 1.0 / (1.0 - shift - nn * state_gap(inst, i) / denom);
  }
  // Right: y = D^-1 b - D^-1 u (1^T D^-1 b) / (1 + 1^T D^-1 u)
  // Left:  y = D^-1 b - D^-1 1 (u^T D^-1 b) / (1 + u^T D^-1 1)
  double num = 0.0;
  double den = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = state_gap(inst, i) / denom;
    num += (transpose ? u : 1.0) * dinv[i] * b[i];
    den += u * dinv[i];
  }
  const double factor = num / den;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dir = transpose ? 1.0 : state_gap(inst, i) / denom;
    y[i] = dinv[i] * b[i] - dinv[i] * dir * factor;
  }
  return y;
}

struct IterationResult {
  std::vector<double> vec;
  int iterations;
  double residual;
};

IterationResult inverse_iterate(const LearnerInstance& inst, double lambda,
                                std::vector<double> start, bool transpose) {
  constexpr double kShift = 1e-12;
  constexpr double kTol = 1e-12;
  constexpr int kMaxIter = 100;
  const auto n = inst.n();
  std::vector<double> v = std::move(start);
  std::vector<double> tv(n);
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  while (it < kMaxIter) {
    ++it;
    v = shifted_solve(inst, lambda + kShift, v, transpose);
    const double norm = inf_norm(v);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw std::runtime_error("inverse iteration broke down");
    }
    for (double& e : v) e /= norm;
    if (transpose) {
      apply_left(inst, v, tv);
    } else {
      apply_right(inst, v, tv);
    }
    residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      residual = std::max(residual, std::abs(tv[i] - lambda * v[i]));
    }
    if (residual <= kTol) break;
  }
  return {std::move(v), it, residual};
}

}  // namespace

TransitionMatrix::TransitionMatrix(const LearnerInstance& inst)
    : n_(inst.n()), data_(n_ * n_) {
  const auto a = inst.overlaps();
  const double denom = static_cast<double>(n_ - 1);
  for (std::size_t i = 0; i < n_; ++i) {
    const double off = (1.0 - a[i]) / denom;
    for (std::size_t j = 0; j < n_; ++j) {
      data_[i * n_ + j] = (i == j) ? a[i] : off;
    }
  }
}

TransitionMatrix build_transition_matrix(const LearnerInstance& inst) {
  return TransitionMatrix(inst);
}

std::vector<double> char_poly_of_b(const LearnerInstance& inst) {
  const auto n = inst.n();
  const Eigen::MatrixXd b = b_matrix(inst);
  const Eigen::HessenbergDecomposition<Eigen::MatrixXd> hess(b);
  const Eigen::MatrixXd h = hess.matrixH();

  // p_k(x) = (x - h_kk) p_{k-1}(x)
  //          - sum_{i<k} h_ik (prod_{j=i+1..k} h_{j,j-1}) p_{i-1}(x)
  std::vector<Poly> p(n + 1);
  p[0] = Poly{1.0L};
  for (std::size_t k = 1; k <= n; ++k) {
    Poly next = multiply_linear(p[k - 1], h(k - 1, k - 1));
    long double sub = 1.0L;
    for (std::size_t i = k - 1; i >= 1; --i) {
      sub *= h(i, i - 1);
      const long double coef = h(i - 1, k - 1) * sub;
      for (std::size_t m = 0; m < p[i - 1].size(); ++m) {
        next[m] -= coef * p[i - 1][m];
      }
    }
    p[k] = std::move(next);
  }
  return {p[n].begin(), p[n].end()};
}

std::vector<double> scaled_derivative_poly(const LearnerInstance& inst) {
  const auto n = inst.n();
  Poly p{0.0L, 1.0L};  // x
  for (double g : inst.gaps()) p = multiply_linear(p, g);
  // x p'(x) / n: coefficient of x^k is k p_k / n.
  std::vector<double> out(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    out[k] = static_cast<double>(static_cast<long double>(k) * p[k] /
                                 static_cast<long double>(n));
  }
  return out;
}

double char_poly_identity_residual(const LearnerInstance& inst,
                                   std::size_t cap) {
  if (inst.n() > cap) {
    throw std::invalid_argument("characteristic polynomial expansion is capped at n = " +
                                std::to_string(cap));
  }
  const auto lhs = char_poly_of_b(inst);
  const auto rhs = scaled_derivative_poly(inst);
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k < std::max(lhs.size(), rhs.size()); ++k) {
    const double l = k < lhs.size() ? lhs[k] : 0.0;
    const double r = k < rhs.size() ? rhs[k] : 0.0;
    diff = std::max(diff, std::abs(l - r));
    scale = std::max({scale, std::abs(l), std::abs(r)});
  }
  return scale > 0.0 ? diff / scale : diff;
}

double log_derivative(std::span<const double> gaps, double mu) {
  double sum = 1.0 / mu;
  for (double g : gaps) sum += 1.0 / (mu - g);
  return sum;
}

double smallest_derivative_root(std::span<const double> gaps) {
  require_positive(gaps, "smallest_derivative_root");
  const double xmin = *std::min_element(gaps.begin(), gaps.end());
  return bisect_log_derivative(gaps, 0.0, xmin, 1e-14 * xmin);
}

std::optional<double> second_derivative_root(std::span<const double> gaps) {
  require_positive(gaps, "second_derivative_root");
  if (gaps.size() < 2) return std::nullopt;
  std::vector<double> two(2);
  std::partial_sort_copy(gaps.begin(), gaps.end(), two.begin(), two.end());
  return derivative_root_in_interval(gaps, two[0], two[1]);
}

double harmonic_mean(std::span<const double> gaps) {
  require_positive(gaps, "harmonic_mean");
  double inv = 0.0;
  for (double g : gaps) inv += 1.0 / g;
  return static_cast<double>(gaps.size()) / inv;
}

double lambda_from_mu(double mu, std::size_t n) {
  const double nn = static_cast<double>(n);
  return 1.0 - nn / (nn - 1.0) * mu;
}

double second_eigenvalue(const LearnerInstance& inst) {
  return lambda_from_mu(smallest_derivative_root(inst.gaps()), inst.n());
}

double subdominant_modulus(const LearnerInstance& inst) {
  const auto gaps = inst.gaps();
  if (gaps.size() < 2) return 0.0;
  std::vector<double> sorted(gaps.begin(), gaps.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m = sorted.size();
  const double mu3 = derivative_root_in_interval(gaps, sorted[0], sorted[1]);
  const double mu_max =
      derivative_root_in_interval(gaps, sorted[m - 2], sorted[m - 1]);
  return std::max(std::abs(lambda_from_mu(mu3, inst.n())),
                  std::abs(lambda_from_mu(mu_max, inst.n())));
}

std::vector<double> dense_eigenvalues(const LearnerInstance& inst) {
  if (inst.n() > kCharPolyCap) {
    throw std::invalid_argument("dense eigensolve is limited to n <= 64");
  }
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(t_matrix(inst), false);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("dense eigensolve failed");
  }
  std::vector<double> values;
  for (const auto& z : solver.eigenvalues()) values.push_back(z.real());
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

double dense_second_eigenvalue(const LearnerInstance& inst) {
  return dense_eigenvalues(inst)[1];
}

std::optional<EigenPair> dominant_eigenpair(const LearnerInstance& inst) {
  const auto n = inst.n();
  const auto gaps = inst.gaps();
  const double mu = smallest_derivative_root(gaps);
  const double lambda = lambda_from_mu(mu, n);
  if (!(1.0 - lambda >= kDegeneracyGap)) return std::nullopt;
  if (const auto mu2 = second_derivative_root(gaps)) {
    const double sep = lambda - lambda_from_mu(*mu2, n);
    if (!(sep >= kDegeneracyGap)) return std::nullopt;
  }

  // Starting vectors: the all-ones vector is the right eigenvector for 1
  // and e_0 the left one, so start away from both.
  std::vector<double> start_right(n);
  std::vector<double> start_left(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) start_right[i] = state_gap(inst, i);

  auto right = inverse_iterate(inst, lambda, std::move(start_right), false);
  auto left = inverse_iterate(inst, lambda, std::move(start_left), true);

  const double dot = std::inner_product(left.vec.begin(), left.vec.end(),
                                        right.vec.begin(), 0.0);
  if (dot == 0.0 || !std::isfinite(dot)) return std::nullopt;
  for (double& e : left.vec) e /= dot;

  return EigenPair{lambda, std::move(right.vec), std::move(left.vec),
                   std::max(right.iterations, left.iterations),
                   std::max(right.residual, left.residual)};
}

std::optional<double> eigen_constant(const LearnerInstance& inst) {
  const auto pair = dominant_eigenpair(inst);
  if (!pair) return std::nullopt;
  const double sum_v =
      std::accumulate(pair->right.begin(), pair->right.end(), 0.0);
  return -sum_v * pair->left[0] / static_cast<double>(inst.n());
}

SpectralSummary summarize_spectrum(const LearnerInstance& inst) {
  constexpr double kSlack = 1e-12;
  SpectralSummary s;
  s.n = inst.n();
  s.mu_star = smallest_derivative_root(inst.gaps());
  s.lambda_star = lambda_from_mu(s.mu_star, s.n);
  s.harmonic = harmonic_mean(inst.gaps());
  s.eigen_constant = eigen_constant(inst);
  const double scaled = static_cast<double>(s.n - 1) * s.mu_star;
  s.bound_lo_ok = 0.5 * s.harmonic <= scaled * (1.0 + kSlack);
  s.bound_hi_ok = scaled <= s.harmonic * (1.0 + kSlack);
  return s;
}

}  // namespace learnrate
