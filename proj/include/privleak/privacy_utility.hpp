/**
 * @file privacy_utility.hpp
 * @brief Steady-state input design with a privacy regularizer.
 *
 * Nominal program:      min x'Qx + u'Ru          s.t. x = Ax + Bu, C1 x = r
 * Private program:      min x'Qx + u'Ru + mu u'S(tau*)u   (same constraints)
 *
 * Both are reduced to equality-constrained QPs in u alone through the
 * steady-state gain G = (I - A)^{-1} B and solved via their KKT system.
 * The trade-off report certifies mu u*'S u* >= mu delta >= epsilon.
 */
#pragma once

#include <cstddef>
#include <string>

#include "privleak/chapman_robbins.hpp"
#include "privleak/errors.hpp"
#include "privleak/lti_model.hpp"
#include "privleak/numerics.hpp"
#include "privleak/tolerances.hpp"

namespace privleak {

struct SteadyStateProgram {
  Matrix Q;   ///< n x n, SPD
  Matrix R;   ///< p x p, SPD
  Matrix C1;  ///< q x n with q < p
  Vector r;   ///< q
  double mu = 0.0;

  void validate(const SystemModel& model, const Tolerances& tol = kDefaultTolerances) const {
    if (!Q.is_square() || Q.rows() != model.n()) throw ShapeError("Q is " + Q.shape() + " but A is " + model.A().shape());
    if (!R.is_square() || R.rows() != model.p()) throw ShapeError("R is " + R.shape() + " but B is " + model.B().shape());
    if (C1.cols() != model.n()) throw ShapeError("C1 is " + C1.shape() + " but A is " + model.A().shape());
    if (r.size() != C1.rows()) throw ShapeError("r has length " + std::to_string(r.size()) + " but C1 is " + C1.shape());
    if (C1.rows() >= model.p()) throw ValueError("C1 must have fewer rows than there are inputs (q < p)");
    if (!(mu >= 0.0)) throw ValueError("mu must be non-negative");
    cholesky(Q, tol);
    cholesky(R, tol);
  }
};

struct SteadyStateSolution {
  Vector x;
  Vector u;
  double J = 0.0;  ///< objective value of the program that produced it
};

/// J(x, u) = x'Qx + u'Ru.
inline double steady_state_cost(const SteadyStateProgram& program, const Vector& x, const Vector& u) {
  return quadratic_form(program.Q, x) + quadratic_form(program.R, u);
}

namespace detail {

/// Minimizes u'Hu subject to E u = r through [[H, E'], [E, 0]] [u; lambda] = [0; r].
inline Vector solve_equality_qp(const Matrix& h, const Matrix& e, const Vector& r, const Tolerances& tol) {
  const std::size_t p = h.rows();
  const std::size_t q = e.rows();
  if (q > 0 && rank_and_nullspace(e.transpose(), tol.rank_rel).rank < q) {
    throw Infeasible("C1 (I - A)^{-1} B does not have full row rank");
  }
  Matrix kkt(p + q, p + q);
  kkt.set_block(0, 0, h);
  kkt.set_block(0, p, e.transpose());
  kkt.set_block(p, 0, e);
  Vector rhs(p + q, 0.0);
  for (std::size_t i = 0; i < q; ++i) rhs[p + i] = r[i];
  Vector sol = solve_linear(kkt, rhs, tol);
  // The multipliers can be large, so constraint residuals feed first-order
  // into the cost; a few refinement steps bring them down to rounding level.
  for (int step = 0; step < 3; ++step) {
    const Vector residual = rhs - kkt * sol;
    if (norm2(residual) == 0.0) break;
    sol = sol + solve_linear(kkt, residual, tol);
  }
  return Vector(sol.begin(), sol.begin() + static_cast<std::ptrdiff_t>(p));
}

inline SteadyStateSolution solve_regularized(const SteadyStateProgram& program, const SystemModel& model,
                                             const Matrix* regularizer, const Tolerances& tol) {
  program.validate(model, tol);
  const Matrix g = steady_state_gain(model, tol);
  Matrix h = symmetrized(g.transpose() * program.Q * g + program.R);
  if (regularizer != nullptr) {
    if (regularizer->rows() != model.p() || !regularizer->is_square())
      throw ShapeError("regularizer is " + regularizer->shape() + " but B is " + model.B().shape());
    h += program.mu * symmetrized(*regularizer);
  }
  const Matrix e = program.C1 * g;
  SteadyStateSolution s;
  s.u = solve_equality_qp(h, e, program.r, tol);
  s.x = g * s.u;
  s.J = steady_state_cost(program, s.x, s.u);
  if (regularizer != nullptr) s.J += program.mu * quadratic_form(*regularizer, s.u);
  return s;
}

}  // namespace detail

/// Nominal steady-state optimum (mu is ignored).
inline SteadyStateSolution solve_nominal(const SteadyStateProgram& program, const SystemModel& model,
                                         const Tolerances& tol = kDefaultTolerances) {
  return detail::solve_regularized(program, model, nullptr, tol);
}

/// Regularized optimum; J includes the mu u'S u term.
inline SteadyStateSolution solve_private(const SteadyStateProgram& program, const SystemModel& model,
                                         const Matrix& s_tau_star, const Tolerances& tol = kDefaultTolerances) {
  return detail::solve_regularized(program, model, &s_tau_star, tol);
}

struct TradeoffReport {
  Vector x_star, u_star;
  Vector x_p, u_p;
  double J_star = 0.0;  ///< J(x*, u*)
  double J_p = 0.0;     ///< J(x_p, u_p), without the regularizer
  double epsilon = 0.0; ///< utility loss J_p - J_star
  double delta = 0.0;   ///< u*'S u* - u_p'S u_p at the frozen tau*
  double mu = 0.0;
  double privacy_cost = 0.0;  ///< u*'S(tau*) u*
  std::size_t tau_star_nominal = 0;
  std::size_t tau_star_private = 0;  ///< from a fresh search at u_p
  double bound_nominal = 0.0;
  double bound_private_fixed_tau = 0.0;
  double bound_private_full_search = 0.0;
  Matrix s_tau_star;
};

struct TradeoffCertificate {
  bool privacy_cost_dominates = false;  ///< mu u*'S u* >= mu delta
  bool utility_loss_bounded = false;    ///< mu delta >= epsilon
  bool holds() const { return privacy_cost_dominates && utility_loss_bounded; }
};

/// Checks mu u*'S u* >= mu delta >= epsilon, each with `tol.certificate` slack.
inline TradeoffCertificate certify(const TradeoffReport& report, const Tolerances& tol = kDefaultTolerances) {
  const double mu_delta = report.mu * report.delta;
  return {report.mu * report.privacy_cost >= mu_delta - tol.certificate,
          mu_delta >= report.epsilon - tol.certificate};
}

/// mu >= epsilon / delta written without the division.
inline bool tradeoff_ratio_bounded(double mu, double epsilon, double delta) { return mu * delta >= epsilon; }

/**
 * Solves both programs and measures the trade-off. tau* is frozen at the
 * maximizer of the bound for the nominal input; the private input is also
 * re-searched over all tau because the maximizer may switch.
 */
inline TradeoffReport tradeoff_report(const SystemModel& model, const SteadyStateProgram& program, std::size_t k_star,
                                      std::size_t N, const Tolerances& tol = kDefaultTolerances) {
  TradeoffReport rep;
  rep.mu = program.mu;

  const SteadyStateSolution nominal = solve_nominal(program, model, tol);
  rep.x_star = nominal.x;
  rep.u_star = nominal.u;
  rep.J_star = nominal.J;

  const BoundResult nominal_bound = bound(model, StepScenario{nominal.u, k_star, N, {}}, tol);
  rep.tau_star_nominal = nominal_bound.tau_star;
  rep.bound_nominal = nominal_bound.bound;
  rep.s_tau_star = s_matrix(model, rep.tau_star_nominal, k_star, N);

  const SteadyStateSolution priv = solve_private(program, model, rep.s_tau_star, tol);
  rep.x_p = priv.x;
  rep.u_p = priv.u;
  rep.J_p = steady_state_cost(program, priv.x, priv.u);

  rep.epsilon = rep.J_p - rep.J_star;
  rep.privacy_cost = quadratic_form(rep.s_tau_star, rep.u_star);
  rep.delta = rep.privacy_cost - quadratic_form(rep.s_tau_star, rep.u_p);

  rep.bound_private_fixed_tau = bound_at_tau(rep.s_tau_star, rep.tau_star_nominal, rep.u_p, tol);
  const BoundResult private_bound = bound(model, StepScenario{rep.u_p, k_star, N, {}}, tol);
  rep.bound_private_full_search = private_bound.bound;
  rep.tau_star_private = private_bound.tau_star;
  return rep;
}

/// mu = epsilon_bar / (u*'S(tau*) u*), which caps the utility loss at epsilon_bar.
inline double mu_for_budget(double epsilon_bar, const Matrix& s_tau_star, const Vector& u_star,
                            const Tolerances& tol = kDefaultTolerances) {
  if (!(epsilon_bar >= 0.0)) throw InvalidArgument("utility budget must be non-negative");
  const double cost = quadratic_form(s_tau_star, u_star);
  if (cost <= tol.already_private) {
    throw AlreadyFullyPrivate("nominal input already has u'S(tau*)u <= " + std::to_string(tol.already_private));
  }
  return epsilon_bar / cost;
}

}  // namespace privleak
