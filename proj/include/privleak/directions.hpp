/**
 * @file directions.hpp
 * @brief Most-private and fully-private input directions.
 *
 * A step in direction u is fully private when the input-observability
 * matrix O = [CB; CAB; ...; CA^{N-1}B] annihilates it: every output
 * distribution is then independent of the change time and the bound is
 * infinite. Otherwise the most private unit direction is the smallest
 * eigenvector of S(tau*) where tau* maximizes the resulting bound.
 */
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "privleak/chapman_robbins.hpp"
#include "privleak/errors.hpp"
#include "privleak/lti_model.hpp"
#include "privleak/numerics.hpp"
#include "privleak/tolerances.hpp"

namespace privleak {

/// Stacked Markov parameters CB, CAB, ..., CA^{N-1}B as an (N m) x p matrix.
inline Matrix input_observability(const SystemModel& model, std::size_t N) {
  if (N == 0) throw InvalidArgument("input observability needs N >= 1");
  const std::size_t m = model.m();
  Matrix out(N * m, model.p());
  Matrix power_b = model.B();
  for (std::size_t k = 0; k < N; ++k) {
    out.set_block(k * m, 0, model.C() * power_b);
    if (k + 1 < N) power_b = model.A() * power_b;
  }
  return out;
}

/// Stack of C Atilde(k, tau) B for k = 1..N with k* = 0. Equals input_observability at tau = 1.
inline Matrix input_observability_tau(const SystemModel& model, std::size_t tau, std::size_t N) {
  if (N == 0) throw InvalidArgument("input observability needs N >= 1");
  return vstack(detail::shift_blocks(model, tau, N), model.p());
}

/// Orthonormal basis of null(O); zero columns when no fully private direction exists.
inline Matrix fully_private_directions(const SystemModel& model, std::size_t N,
                                       double rel_tol = kDefaultTolerances.rank_rel) {
  return rank_and_nullspace(input_observability(model, N), rel_tol).null_basis;
}

struct TauEigen {
  std::size_t tau = 0;
  double lambda_min = 0.0;
  double candidate = 0.0;
};

struct DirectionResult {
  Vector u_star;  ///< unit norm
  std::size_t tau_star = 0;
  double lambda_min = 0.0;
  double bound_at_norm = 0.0;
  bool fully_private = false;
  std::vector<TauEigen> per_tau_eigs;
};

/**
 * For each tau, the smallest eigenpair of S(tau) gives the best candidate
 * bound tau^2 / expm1(norm^2 lambda_tau) among inputs of the given norm.
 * tau* maximizes it (smallest tau on ties) and u* is the matching
 * eigenvector. Eigenvalues within `fully_private_rel` of the largest
 * eigenvalue over all tau are treated as exact zeros.
 */
inline DirectionResult most_private_direction(const SystemModel& model, std::size_t k_star, std::size_t N,
                                              double norm = 1.0, const Tolerances& tol = kDefaultTolerances) {
  if (N <= k_star) throw EmptyTauRange("N must exceed k_star for at least one tau candidate");
  if (!(norm > 0.0)) throw InvalidArgument("norm must be positive");

  std::vector<EigenDecomposition> eigs;
  double lambda_max = 0.0;
  for (const Matrix& s : s_matrices(model, k_star, N)) {
    eigs.push_back(sym_eig(s, tol));
    lambda_max = std::max(lambda_max, eigs.back().eigenvalues.back());
  }
  const double zero_level = tol.fully_private_rel * lambda_max;

  DirectionResult r;
  double best = -1.0;
  for (std::size_t i = 0; i < eigs.size(); ++i) {
    const std::size_t tau = i + 1;
    const double lambda = eigs[i].eigenvalues.front();
    const double candidate = lambda <= zero_level ? kInfinity : candidate_bound(tau, norm * norm * lambda, 0.0, tol);
    r.per_tau_eigs.push_back({tau, lambda, candidate});
    if (candidate > best) {
      best = candidate;
      r.tau_star = tau;
    }
  }
  const EigenDecomposition& chosen = eigs[r.tau_star - 1];
  r.u_star = chosen.eigenvectors.column(0);
  r.lambda_min = chosen.eigenvalues.front();
  r.fully_private = r.lambda_min <= zero_level;
  r.bound_at_norm = best;
  return r;
}

/// Transmission-zero candidate (z0, x0, u0) with Rosenbrock matrix [A - z0 I, B; C, 0] [x0; u0] = 0.
struct ZeroDirection {
  std::complex<double> z0;
  std::vector<std::complex<double>> x_zero;
  std::vector<std::complex<double>> u_zero;
};

struct ZeroCheck {
  bool is_zero_direction = false;
  bool is_fully_private = false;
  double residual_state = 0.0;           ///< ||(A - z0 I) x0 + B u0||
  double residual_output = 0.0;          ///< ||C x0||
  double residual_observability = 0.0;   ///< ||[C; CA; ...; CA^{n-1}] x0||
};

namespace detail {

using CVector = std::vector<std::complex<double>>;

inline CVector cmul(const Matrix& a, const CVector& x) {
  CVector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

inline double cnorm_sq(const CVector& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return s;
}

}  // namespace detail

/**
 * Checks a supplied zero direction. It is a zero direction when both
 * Rosenbrock residuals are within `tol`; it is additionally certified fully
 * private when the zero state is unobservable. The fully-private conclusion
 * presumes a measurement horizon N - k* > n.
 */
inline ZeroCheck verify_zero_direction(const SystemModel& model, const ZeroDirection& zd, double tol = 1e-9) {
  using detail::CVector;
  if (zd.x_zero.size() != model.n()) throw ShapeError("x_zero length does not match A");
  if (zd.u_zero.size() != model.p()) throw ShapeError("u_zero length does not match B");
  if (detail::cnorm_sq(zd.x_zero) == 0.0 && detail::cnorm_sq(zd.u_zero) == 0.0) {
    throw InvalidArgument("zero direction must have a nonzero state or input part");
  }

  CVector state = detail::cmul(model.A(), zd.x_zero);
  const CVector bu = detail::cmul(model.B(), zd.u_zero);
  for (std::size_t i = 0; i < state.size(); ++i) state[i] += bu[i] - zd.z0 * zd.x_zero[i];

  CVector ax = zd.x_zero;
  double observability_sq = 0.0;
  double output_sq = 0.0;
  for (std::size_t i = 0; i < model.n(); ++i) {
    const double block = detail::cnorm_sq(detail::cmul(model.C(), ax));
    if (i == 0) output_sq = block;
    observability_sq += block;
    ax = detail::cmul(model.A(), ax);
  }

  ZeroCheck r;
  r.residual_state = std::sqrt(detail::cnorm_sq(state));
  r.residual_output = std::sqrt(output_sq);
  r.residual_observability = std::sqrt(observability_sq);
  r.is_zero_direction = r.residual_state <= tol && r.residual_output <= tol;
  r.is_fully_private = r.is_zero_direction && r.residual_observability <= tol;
  return r;
}

}  // namespace privleak
