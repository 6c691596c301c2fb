/**
 * @file lti_model.hpp
 * @brief Discrete-time LTI plant with additive Gaussian measurement noise,
 * driven by a step input that switches on at an unknown change time.
 *
 *   x_{k+1} = A x_k + B u_k
 *   y_k     = C x_k + e_k,     e_k ~ N(0, sigma_e) white
 *   u_k     = 0 for k < k_star, u for k >= k_star
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "privleak/errors.hpp"
#include "privleak/noise.hpp"
#include "privleak/numerics.hpp"
#include "privleak/tolerances.hpp"

namespace privleak {

/**
 * Upper estimate of the spectral radius via Gelfand's formula,
 * rho(A) = lim ||A^k||^(1/k), evaluated at k = 2^squarings with
 * renormalization at every squaring to stay in floating-point range.
 * The estimate never undershoots rho(A) by more than rounding.
 */
inline double spectral_radius(const Matrix& a, int squarings = 60) {
  if (!a.is_square()) throw ShapeError("spectral radius needs a square matrix");
  if (a.rows() == 0) return 0.0;
  // Invariant: A^(2^j) = exp(log_scale) * m.
  Matrix m = a;
  double log_scale = 0.0;
  double estimate = 0.0;
  for (int j = 0; j <= squarings; ++j) {
    const double nm = frobenius_norm(m);
    if (nm == 0.0) return 0.0;  // nilpotent
    log_scale += std::log(nm);
    m *= 1.0 / nm;
    estimate = std::exp(std::ldexp(log_scale, -j));
    m = m * m;
    log_scale *= 2.0;
  }
  return estimate;
}

/** Model M = (A, B, C, sigma_e). Immutable; validated on construction. */
class SystemModel {
 public:
  SystemModel(Matrix a, Matrix b, Matrix c, Matrix sigma_e, const Tolerances& tol = kDefaultTolerances)
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), sigma_e_(std::move(sigma_e)) {
    if (!a_.is_square() || a_.rows() == 0) throw ShapeError("A must be square and non-empty, got " + a_.shape());
    if (b_.rows() != a_.rows() || b_.cols() == 0)
      throw ShapeError("B is " + b_.shape() + " but A is " + a_.shape());
    if (c_.cols() != a_.rows() || c_.rows() == 0)
      throw ShapeError("C is " + c_.shape() + " but A is " + a_.shape());
    if (!sigma_e_.is_square() || sigma_e_.rows() != c_.rows())
      throw ShapeError("sigma_e is " + sigma_e_.shape() + " but C is " + c_.shape());
    for (const Matrix* m : {&a_, &b_, &c_, &sigma_e_})
      if (!m->all_finite()) throw ValueError("system matrices must be finite");
    noise_factor_ = cholesky(sigma_e_, tol);
    spectral_radius_ = spectral_radius(a_);
    stable_ = spectral_radius_ < 1.0 - tol.stability_margin;
  }

  const Matrix& A() const noexcept { return a_; }
  const Matrix& B() const noexcept { return b_; }
  const Matrix& C() const noexcept { return c_; }
  const Matrix& sigma_e() const noexcept { return sigma_e_; }
  /// Lower Cholesky factor L of sigma_e; whitening is L^{-1}.
  const Matrix& noise_factor() const noexcept { return noise_factor_; }

  std::size_t n() const noexcept { return a_.rows(); }
  std::size_t p() const noexcept { return b_.cols(); }
  std::size_t m() const noexcept { return c_.rows(); }

  bool stable() const noexcept { return stable_; }
  double spectral_radius_estimate() const noexcept { return spectral_radius_; }

  /// Whitened copy of an m-vector or m x k block.
  Vector whiten(const Vector& y) const { return solve_lower(noise_factor_, y); }
  Matrix whiten(const Matrix& y) const { return solve_lower(noise_factor_, y); }

 private:
  Matrix a_, b_, c_, sigma_e_;
  Matrix noise_factor_;
  double spectral_radius_ = 0.0;
  bool stable_ = false;
};

/// Step input u switching on at k_star, observed over samples 0..N.
struct StepScenario {
  Vector u;
  std::size_t k_star = 0;
  std::size_t N = 0;
  Vector x0;  ///< empty means all-zero

  void validate(const SystemModel& model) const {
    if (u.size() != model.p())
      throw ShapeError("u has length " + std::to_string(u.size()) + " but B has " + std::to_string(model.p()) +
                       " columns");
    if (!x0.empty() && x0.size() != model.n())
      throw ShapeError("x0 has length " + std::to_string(x0.size()) + " but A is " + model.A().shape());
    if (N < k_star) throw ValueError("horizon N must be >= k_star");
    for (double v : u)
      if (!std::isfinite(v)) throw ValueError("u must be finite");
  }

  Vector initial_state(std::size_t n) const { return x0.empty() ? Vector(n, 0.0) : x0; }
};

using OutputSequence = std::vector<Vector>;

/// y_0..y_N of the noise-free plant.
inline OutputSequence simulate_noiseless(const SystemModel& model, const StepScenario& scenario) {
  scenario.validate(model);
  const Vector bu = model.B() * scenario.u;
  Vector x = scenario.initial_state(model.n());
  OutputSequence y;
  y.reserve(scenario.N + 1);
  for (std::size_t k = 0; k <= scenario.N; ++k) {
    y.push_back(model.C() * x);
    x = model.A() * x;
    if (k >= scenario.k_star) x = x + bu;
  }
  return y;
}

/// Additive noise e_0..e_N, e_k = L z_k with z_k keyed by (seed, k).
inline OutputSequence measurement_noise(const SystemModel& model, std::size_t N, std::uint64_t seed) {
  const std::size_t m = model.m();
  OutputSequence e;
  e.reserve(N + 1);
  Vector z(m);
  for (std::size_t k = 0; k <= N; ++k) {
    for (std::size_t j = 0; j < m; ++j) z[j] = noise::standard_normal(seed, k, j);
    e.push_back(model.noise_factor() * z);
  }
  return e;
}

/// Noise-free output plus seeded measurement noise. Bit-identical for equal inputs.
inline OutputSequence simulate_noisy(const SystemModel& model, const StepScenario& scenario, std::uint64_t seed) {
  OutputSequence y = simulate_noiseless(model, scenario);
  const OutputSequence e = measurement_noise(model, scenario.N, seed);
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = y[k] + e[k];
  return y;
}

/// Static gain G = (I - A)^{-1} B mapping a constant input to its steady state.
inline Matrix steady_state_gain(const SystemModel& model, const Tolerances& tol = kDefaultTolerances) {
  const Matrix i_minus_a = Matrix::identity(model.n()) - model.A();
  Matrix g = solve_linear(i_minus_a, model.B(), tol);
  if (!model.stable()) {
    throw Unstable("spectral radius estimate " + std::to_string(model.spectral_radius_estimate()) + " is not below 1");
  }
  return g;
}

/// x_ss = (I - A)^{-1} B u. Throws Singular for integrator modes, Unstable otherwise if rho(A) >= 1.
inline Vector steady_state(const SystemModel& model, const Vector& u, const Tolerances& tol = kDefaultTolerances) {
  if (u.size() != model.p()) throw ShapeError("u length does not match B");
  return steady_state_gain(model, tol) * u;
}

}  // namespace privleak
