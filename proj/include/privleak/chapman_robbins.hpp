/**
 * @file chapman_robbins.hpp
 * @brief Chapman-Robbins lower bound on the variance of any unbiased
 * estimator of the change time of a step input.
 *
 * For a shift tau of the change time, the two Gaussian output distributions
 * differ only in their means. The Chapman-Robbins denominator then evaluates
 * to exp(u' S(tau) u) - 1, where
 *
 *   S(tau) = sum_{k=k*+1}^{N} (C Atilde(k,tau) B)' sigma_e^{-1} (C Atilde(k,tau) B)
 *   Atilde(k,tau) = sum_{l=k*}^{min(k*+tau-1, k-1)} A^{k-1-l}
 *
 * and the bound is max over tau in {1..N-k*} of tau^2 / (exp(u'S(tau)u) - 1).
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "privleak/errors.hpp"
#include "privleak/lti_model.hpp"
#include "privleak/numerics.hpp"
#include "privleak/tolerances.hpp"

namespace privleak {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct TauCandidate {
  std::size_t tau = 0;
  double exponent = 0.0;   ///< u' S(tau) u
  double candidate = 0.0;  ///< tau^2 / expm1(exponent), may be +inf
};

struct BoundResult {
  std::size_t tau_star = 0;
  double bound = 0.0;  ///< samples^2, may be +inf
  std::vector<TauCandidate> per_tau;
};

/// Sum over l in [k*, min(k*+tau-1, k-1)] of A^(k-1-l). Requires k > k*.
inline Matrix a_tilde(const SystemModel& model, std::size_t k, std::size_t tau, std::size_t k_star) {
  if (k <= k_star) throw IndexError("a_tilde needs k > k_star");
  if (tau == 0) throw InvalidArgument("tau must be positive");
  // With j = k-1-l the sum runs over A^j for j in [j_lo, j_hi].
  const std::size_t j_hi = k - 1 - k_star;
  const std::size_t l_hi = std::min(k_star + tau - 1, k - 1);
  const std::size_t j_lo = k - 1 - l_hi;
  Matrix sum(model.n(), model.n());
  Matrix power = Matrix::identity(model.n());
  for (std::size_t j = 0; j <= j_hi; ++j) {
    if (j >= j_lo) sum += power;
    if (j < j_hi) power = model.A() * power;
  }
  return sum;
}

namespace detail {

/**
 * Blocks C Atilde(k*+d, tau) B for d = 1..horizon.
 *
 * Uses the recursion Atilde(d) = Atilde(d-1) + A^{d-1} for d <= tau and
 * Atilde(d) = A Atilde(d-1) afterwards, so no sums are recomputed and no
 * prefix differences are taken.
 */
inline std::vector<Matrix> shift_blocks(const SystemModel& model, std::size_t tau, std::size_t horizon) {
  if (tau == 0) throw InvalidArgument("tau must be positive");
  std::vector<Matrix> blocks;
  blocks.reserve(horizon);
  Matrix x(model.n(), model.p());  // Atilde(d, tau) B
  Matrix power_b = model.B();      // A^{d-1} B
  for (std::size_t d = 1; d <= horizon; ++d) {
    if (d <= tau) {
      x += power_b;
      if (d < tau) power_b = model.A() * power_b;
    } else {
      x = model.A() * x;
    }
    blocks.push_back(model.C() * x);
  }
  return blocks;
}

}  // namespace detail

/// Whitened blocks W_d = L^{-1} C Atilde(k*+d, tau) B for d = 1..N-k*.
inline std::vector<Matrix> whitened_shift_blocks(const SystemModel& model, std::size_t tau, std::size_t k_star,
                                                 std::size_t N) {
  if (tau == 0 || k_star + tau > N) {
    throw InvalidArgument("tau must lie in 1..N-k_star (tau=" + std::to_string(tau) + ")");
  }
  std::vector<Matrix> blocks = detail::shift_blocks(model, tau, N - k_star);
  for (Matrix& b : blocks) b = model.whiten(b);
  return blocks;
}

/// S(tau) as a symmetric p x p matrix, sigma_e^{-1} applied through Cholesky solves.
inline Matrix s_matrix(const SystemModel& model, std::size_t tau, std::size_t k_star, std::size_t N) {
  Matrix s(model.p(), model.p());
  for (const Matrix& w : whitened_shift_blocks(model, tau, k_star, N)) s += w.transpose() * w;
  return symmetrized(s);
}

/// S(tau) for every tau in 1..N-k*; element i holds tau = i+1.
inline std::vector<Matrix> s_matrices(const SystemModel& model, std::size_t k_star, std::size_t N) {
  std::vector<Matrix> out;
  for (std::size_t tau = 1; tau + k_star <= N; ++tau) out.push_back(s_matrix(model, tau, k_star, N));
  return out;
}

/**
 * tau^2 / (exp(exponent) - 1) with IEEE-safe edges: exponents at or below
 * `zero_threshold` give +inf, exponents above the overflow limit give 0.
 */
inline double candidate_bound(std::size_t tau, double exponent, double zero_threshold,
                              const Tolerances& tol = kDefaultTolerances) {
  if (exponent <= std::max(zero_threshold, tol.exponent_zero_abs)) return kInfinity;
  if (exponent > tol.exponent_overflow) return 0.0;
  const double t = static_cast<double>(tau);
  return t * t / std::expm1(exponent);
}

/// Exponent at or below which u'S(tau)u counts as zero, given ||u||^2 and tr S(tau).
inline double exponent_zero_threshold(double u_norm_sq, double trace_s, const Tolerances& tol = kDefaultTolerances) {
  return tol.exponent_zero_rel * u_norm_sq * trace_s;
}

namespace detail {

/// Picks the largest candidate, smallest tau on ties.
inline void select_tau_star(BoundResult& r) {
  r.bound = -1.0;
  for (const auto& c : r.per_tau) {
    if (c.candidate > r.bound) {
      r.bound = c.candidate;
      r.tau_star = c.tau;
    }
  }
}

inline void check_tau_range(const StepScenario& scenario) {
  if (scenario.N <= scenario.k_star) {
    throw EmptyTauRange("N must exceed k_star for at least one tau candidate");
  }
}

}  // namespace detail

/** B_u(M) over tau in {1..N-k*} for the unbiased case. */
inline BoundResult bound(const SystemModel& model, const StepScenario& scenario,
                         const Tolerances& tol = kDefaultTolerances) {
  scenario.validate(model);
  detail::check_tau_range(scenario);
  const double u_norm_sq = dot(scenario.u, scenario.u);
  BoundResult r;
  for (std::size_t tau = 1; tau + scenario.k_star <= scenario.N; ++tau) {
    double exponent = 0.0;
    double trace = 0.0;
    // Summing ||W_d u||^2 directly keeps exponents of near-null directions
    // accurate far below the rounding level of the assembled S(tau).
    for (const Matrix& w : whitened_shift_blocks(model, tau, scenario.k_star, scenario.N)) {
      const Vector wu = w * scenario.u;
      exponent += dot(wu, wu);
      trace += dot(w.data(), w.data());
    }
    const double threshold = exponent_zero_threshold(u_norm_sq, trace, tol);
    r.per_tau.push_back({tau, exponent, candidate_bound(tau, exponent, threshold, tol)});
  }
  detail::select_tau_star(r);
  return r;
}

/**
 * Independent evaluation of the same bound straight from the likelihood
 * ratio: for each tau, simulate the noise-free outputs for change times k*
 * and k*+tau, whiten their per-sample difference and sum the squared norms.
 * Test-only cross-check of bound().
 */
inline BoundResult bound_oracle(const SystemModel& model, const StepScenario& scenario,
                                const Tolerances& tol = kDefaultTolerances) {
  scenario.validate(model);
  detail::check_tau_range(scenario);

  auto whitened_gap = [&](const Vector& u, std::size_t tau) {
    StepScenario early = scenario;
    early.u = u;
    StepScenario late = early;
    late.k_star = scenario.k_star + tau;
    const OutputSequence y_early = simulate_noiseless(model, early);
    const OutputSequence y_late = simulate_noiseless(model, late);
    double total = 0.0;
    for (std::size_t k = 0; k < y_early.size(); ++k) {
      const Vector z = model.whiten(y_early[k] - y_late[k]);
      total += dot(z, z);
    }
    return total;
  };

  const double u_norm_sq = dot(scenario.u, scenario.u);
  BoundResult r;
  for (std::size_t tau = 1; tau + scenario.k_star <= scenario.N; ++tau) {
    const double exponent = whitened_gap(scenario.u, tau);
    double trace = 0.0;
    for (std::size_t i = 0; i < model.p(); ++i) {
      Vector e(model.p(), 0.0);
      e[i] = 1.0;
      trace += whitened_gap(e, tau);
    }
    const double threshold = exponent_zero_threshold(u_norm_sq, trace, tol);
    r.per_tau.push_back({tau, exponent, candidate_bound(tau, exponent, threshold, tol)});
  }
  detail::select_tau_star(r);
  return r;
}

/// Candidate at a single, fixed tau for input u (no search over tau).
inline double bound_at_tau(const Matrix& s_tau, std::size_t tau, const Vector& u,
                           const Tolerances& tol = kDefaultTolerances) {
  double trace = 0.0;
  for (std::size_t i = 0; i < s_tau.rows(); ++i) trace += s_tau(i, i);
  const double exponent = quadratic_form(s_tau, u);
  return candidate_bound(tau, exponent, exponent_zero_threshold(dot(u, u), trace, tol), tol);
}

}  // namespace privleak
