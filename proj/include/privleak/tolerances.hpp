#pragma once

namespace privleak {

/**
 * Every numerical threshold used by the toolkit. Tests and the CLI read the
 * same defaults; the CLI may override individual fields per run.
 */
struct Tolerances {
  /// Relative asymmetry allowed before a matrix is rejected as non-symmetric.
  double symmetry = 1e-12;
  /// Cholesky pivots at or below this fraction of the largest diagonal are rejected.
  double pd_pivot = 1e-14;
  /// Elimination pivots below this fraction of the largest initial row norm are rejected.
  double singular_pivot = 1e-14;
  /// Jacobi stops once every off-diagonal magnitude is below this fraction of ||S||_F.
  double jacobi_offdiag = 1e-12;
  /// Singular values at or below rank_rel * sigma_max count as zero.
  double rank_rel = 1e-10;
  /// Spectral radius must be below 1 - stability_margin for steady-state work.
  double stability_margin = 1e-9;
  /// lambda_min <= fully_private_rel * max eigenvalue (over all tau) marks a direction fully private.
  double fully_private_rel = 1e-10;
  /// An exponent u'S(tau)u at or below exponent_zero_rel * ||u||^2 * tr S(tau) is treated as exactly zero.
  double exponent_zero_rel = 1e-20;
  /// Absolute floor for exponents treated as zero.
  double exponent_zero_abs = 1e-300;
  /// Exponents above this give a candidate bound of exactly zero.
  double exponent_overflow = 700.0;
  /// Slack for the privacy-utility inequality chain.
  double certificate = 1e-8;
  /// Relative score gap under which two change-time candidates are considered tied.
  double ml_tie_rel = 1e-12;
  /// u'S(tau*)u at or below this makes a budget-derived regularization weight undefined.
  double already_private = 1e-14;
};

inline constexpr Tolerances kDefaultTolerances{};

}  // namespace privleak
