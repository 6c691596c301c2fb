/**
 * @file monte_carlo.hpp
 * @brief Empirical check of the change-time bound: seeded noisy trials,
 * an exhaustive maximum-likelihood change-time estimator, and summary
 * statistics to compare against the analytic bound.
 */
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "privleak/chapman_robbins.hpp"
#include "privleak/errors.hpp"
#include "privleak/lti_model.hpp"
#include "privleak/noise.hpp"
#include "privleak/numerics.hpp"
#include "privleak/tolerances.hpp"

namespace privleak {

struct ChangeTimeEstimate {
  std::size_t k_hat = 0;
  bool tie = false;
  std::vector<double> scores;  ///< whitened squared residual for each candidate k = 0..N
};

/**
 * Maximum-likelihood change time for a known model, input and initial state.
 *
 * With residuals r_t = L^{-1}(y_t - C A^t x0) and whitened step response
 * g_d = L^{-1} C (sum_{j<d} A^j) B u, the negative log-likelihood of change
 * time k is, up to a constant, sum_t ||r_t - g_{t-k}||^2 (g_d = 0 for d <= 0).
 * The response tables are built once and reused for every observed sequence.
 */
class ChangeTimeEstimator {
 public:
  ChangeTimeEstimator(const SystemModel& model, const Vector& u, const Vector& x0, std::size_t N,
                      const Tolerances& tol = kDefaultTolerances)
      : m_(model.m()), horizon_(N), tie_rel_(tol.ml_tie_rel), model_(&model) {
    if (u.size() != model.p()) throw ShapeError("u length does not match B");
    const Vector x_init = x0.empty() ? Vector(model.n(), 0.0) : x0;
    if (x_init.size() != model.n()) throw ShapeError("x0 length does not match A");

    const Vector bu = model.B() * u;
    Vector free_state = x_init;
    Vector step_state(model.n(), 0.0);  // sum_{j<d} A^j B u
    free_.reserve(N + 1);
    step_.reserve(N + 1);
    for (std::size_t t = 0; t <= N; ++t) {
      free_.push_back(model.C() * free_state);
      step_.push_back(model.whiten(model.C() * step_state));
      free_state = model.A() * free_state;
      step_state = model.A() * step_state + bu;
    }
  }

  ChangeTimeEstimate estimate(const OutputSequence& y) const {
    if (y.size() != horizon_ + 1) {
      throw LengthMismatch("expected " + std::to_string(horizon_ + 1) + " samples, got " + std::to_string(y.size()));
    }
    std::vector<Vector> residual;
    residual.reserve(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) {
      if (y[t].size() != m_) throw LengthMismatch("sample " + std::to_string(t) + " has the wrong dimension");
      residual.push_back(model_->whiten(y[t] - free_[t]));
    }

    ChangeTimeEstimate out;
    out.scores.assign(horizon_ + 1, 0.0);
    for (std::size_t k = 0; k <= horizon_; ++k) {
      double score = 0.0;
      for (std::size_t t = 0; t <= horizon_; ++t) {
        const Vector& r = residual[t];
        if (t <= k) {
          score += dot(r, r);
        } else {
          const Vector& g = step_[t - k];
          for (std::size_t j = 0; j < m_; ++j) {
            const double d = r[j] - g[j];
            score += d * d;
          }
        }
      }
      out.scores[k] = score;
    }

    const double best = *std::min_element(out.scores.begin(), out.scores.end());
    // Whitened noise contributes about one unit per sample and channel, which
    // anchors the tie tolerance when the best score is itself near zero.
    const double scale = std::max(best, static_cast<double>((horizon_ + 1) * m_));
    const double threshold = best + tie_rel_ * scale;
    std::size_t tied = 0;
    bool found = false;
    for (std::size_t k = 0; k <= horizon_; ++k) {
      if (out.scores[k] <= threshold) {
        ++tied;
        if (!found) {
          out.k_hat = k;
          found = true;
        }
      }
    }
    out.tie = tied >= 2;
    return out;
  }

 private:
  std::size_t m_;
  std::size_t horizon_;
  double tie_rel_;
  const SystemModel* model_;
  std::vector<Vector> free_;
  std::vector<Vector> step_;
};

inline ChangeTimeEstimate ml_change_time(const SystemModel& model, const OutputSequence& y, const Vector& u,
                                         const Vector& x0, const Tolerances& tol = kDefaultTolerances) {
  if (y.empty()) throw LengthMismatch("output sequence is empty");
  return ChangeTimeEstimator(model, u, x0, y.size() - 1, tol).estimate(y);
}

struct TrialReport {
  std::size_t trials = 0;
  std::vector<std::size_t> estimates;
  std::vector<bool> ties;
  double empirical_variance = 0.0;  ///< unbiased (n-1) divisor, samples^2
  double empirical_bias = 0.0;      ///< mean(k_hat) - k*
  std::size_t tie_count = 0;
  double bound = 0.0;
  std::size_t tau_star = 0;

  double mean_squared_error() const { return empirical_variance + empirical_bias * empirical_bias; }
};

/**
 * Worker count: `requested` if positive, else PRIVLEAK_THREADS if it holds a
 * positive integer, else the hardware concurrency.
 */
inline std::size_t resolve_thread_count(std::size_t requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PRIVLEAK_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/**
 * Runs `trials` independent noisy experiments. Trial i draws its noise from
 * the stream keyed by derive_seed(seed, i), so the report does not depend on
 * the number of threads or their scheduling.
 */
inline TrialReport run_trials(const SystemModel& model, const StepScenario& scenario, std::size_t trials,
                              std::uint64_t seed, std::size_t threads = 0,
                              const Tolerances& tol = kDefaultTolerances) {
  if (trials < 2) throw InvalidArgument("at least two trials are needed for a variance");
  scenario.validate(model);

  const OutputSequence clean = simulate_noiseless(model, scenario);
  const ChangeTimeEstimator estimator(model, scenario.u, scenario.x0, scenario.N, tol);

  TrialReport rep;
  rep.trials = trials;
  rep.estimates.assign(trials, 0);
  std::vector<char> ties(trials, 0);

  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < trials; i += stride) {
      const OutputSequence e = measurement_noise(model, scenario.N, noise::derive_seed(seed, i));
      OutputSequence y = clean;
      for (std::size_t t = 0; t < y.size(); ++t) y[t] = y[t] + e[t];
      const ChangeTimeEstimate est = estimator.estimate(y);
      rep.estimates[i] = est.k_hat;
      ties[i] = est.tie ? 1 : 0;
    }
  };

  const std::size_t workers = std::min(resolve_thread_count(threads), trials);
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& th : pool) th.join();
  }

  double sum = 0.0;
  for (std::size_t k : rep.estimates) sum += static_cast<double>(k);
  const double mean = sum / static_cast<double>(trials);
  double ss = 0.0;
  for (std::size_t k : rep.estimates) {
    const double d = static_cast<double>(k) - mean;
    ss += d * d;
  }
  rep.empirical_variance = ss / static_cast<double>(trials - 1);
  rep.empirical_bias = mean - static_cast<double>(scenario.k_star);
  rep.ties.assign(ties.begin(), ties.end());
  rep.tie_count = static_cast<std::size_t>(std::count(ties.begin(), ties.end(), 1));

  if (scenario.N > scenario.k_star) {
    const BoundResult b = bound(model, scenario, tol);
    rep.bound = b.bound;
    rep.tau_star = b.tau_star;
  } else {
    rep.bound = kInfinity;
  }
  return rep;
}

}  // namespace privleak
