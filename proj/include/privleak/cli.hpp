/**
 * @file cli.hpp
 * @brief Subcommand dispatch and CSV emitters behind the `privleak` tool.
 *
 * Exit codes: 0 success, 2 configuration error, 3 numerical failure,
 * 4 privacy-utility certificate violation (optimize only).
 * Errors are reported as a single line `error: <Kind>: <message>`.
 */
#pragma once

#include <charconv>
#include <cmath>
#include <exception>
#include <ostream>
#include <string>
#include <system_error>

#include "privleak/chapman_robbins.hpp"
#include "privleak/config.hpp"
#include "privleak/directions.hpp"
#include "privleak/errors.hpp"
#include "privleak/monte_carlo.hpp"
#include "privleak/privacy_utility.hpp"

namespace privleak::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalError = 3, kCertificateViolation = 4 };

/// 12 significant digits, '.' decimal point regardless of locale, +inf as "inf".
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

inline std::string format_bool(bool b) { return b ? "true" : "false"; }
inline std::string pass_fail(bool b) { return b ? "pass" : "fail"; }

inline int emit_bound(const AnalysisConfig& cfg, std::ostream& out) {
  const BoundResult r = bound(cfg.model, cfg.scenario(), cfg.tol);
  out << "tau,exponent,candidate\n";
  for (const auto& c : r.per_tau) {
    out << c.tau << ',' << format_number(c.exponent) << ',' << format_number(c.candidate) << '\n';
  }
  out << "# tau_star=" << r.tau_star << ",bound=" << format_number(r.bound) << '\n';
  return kOk;
}

inline int emit_directions(const AnalysisConfig& cfg, std::ostream& out) {
  const std::size_t k_star = cfg.require_k_star();
  const std::size_t N = cfg.require_N();
  const DirectionResult d = most_private_direction(cfg.model, k_star, N, cfg.norm, cfg.tol);
  const Matrix basis = fully_private_directions(cfg.model, N, cfg.tol.rank_rel);

  out << "# table=per_tau\n";
  out << "tau,lambda_min,candidate\n";
  for (const auto& e : d.per_tau_eigs) {
    out << e.tau << ',' << format_number(e.lambda_min) << ',' << format_number(e.candidate) << '\n';
  }
  out << "# table=u_star\n";
  out << "component,value\n";
  for (std::size_t i = 0; i < d.u_star.size(); ++i) out << i << ',' << format_number(d.u_star[i]) << '\n';
  out << "# table=fully_private_basis\n";
  out << "component";
  for (std::size_t j = 0; j < basis.cols(); ++j) out << ",basis_" << j;
  out << '\n';
  for (std::size_t i = 0; i < basis.rows() && basis.cols() > 0; ++i) {
    out << i;
    for (std::size_t j = 0; j < basis.cols(); ++j) out << ',' << format_number(basis(i, j));
    out << '\n';
  }
  out << "# tau_star=" << d.tau_star << ",lambda_min=" << format_number(d.lambda_min)
      << ",norm=" << format_number(cfg.norm) << ",bound_at_norm=" << format_number(d.bound_at_norm)
      << ",fully_private=" << format_bool(d.fully_private) << ",null_dimension=" << basis.cols() << '\n';
  return kOk;
}

/// Writes a trade-off report; returns kCertificateViolation when the inequality chain fails.
inline int emit_optimize(const TradeoffReport& rep, std::ostream& out, const Tolerances& tol = kDefaultTolerances) {
  const TradeoffCertificate cert = certify(rep, tol);
  out << "# table=summary\n";
  out << "mu,epsilon,delta,privacy_cost,J_star,J_p,tau_star_nominal,tau_star_private,bound_nominal,"
         "bound_private_fixed_tau,bound_private_full_search,chain_upper,chain_lower\n";
  out << format_number(rep.mu) << ',' << format_number(rep.epsilon) << ',' << format_number(rep.delta) << ','
      << format_number(rep.privacy_cost) << ',' << format_number(rep.J_star) << ',' << format_number(rep.J_p) << ','
      << rep.tau_star_nominal << ',' << rep.tau_star_private << ',' << format_number(rep.bound_nominal) << ','
      << format_number(rep.bound_private_fixed_tau) << ',' << format_number(rep.bound_private_full_search) << ','
      << pass_fail(cert.privacy_cost_dominates) << ',' << pass_fail(cert.utility_loss_bounded) << '\n';
  out << "# table=solutions\n";
  out << "quantity,index,value\n";
  auto emit = [&](const char* name, const Vector& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out << name << ',' << i << ',' << format_number(v[i]) << '\n';
  };
  emit("x_star", rep.x_star);
  emit("u_star", rep.u_star);
  emit("x_p", rep.x_p);
  emit("u_p", rep.u_p);
  return cert.holds() ? kOk : kCertificateViolation;
}

inline int emit_optimize(const AnalysisConfig& cfg, std::ostream& out) {
  if (!cfg.program) throw ValueError("optimize needs the program keys \"Q\", \"R\", \"C1\", \"r\"");
  const std::size_t k_star = cfg.require_k_star();
  const std::size_t N = cfg.require_N();
  SteadyStateProgram program = *cfg.program;
  if (cfg.epsilon_bar) {
    const SteadyStateSolution nominal = solve_nominal(program, cfg.model, cfg.tol);
    const BoundResult b = bound(cfg.model, StepScenario{nominal.u, k_star, N, {}}, cfg.tol);
    program.mu = mu_for_budget(*cfg.epsilon_bar, s_matrix(cfg.model, b.tau_star, k_star, N), nominal.u, cfg.tol);
  }
  return emit_optimize(tradeoff_report(cfg.model, program, k_star, N, cfg.tol), out, cfg.tol);
}

inline int emit_simulate(const AnalysisConfig& cfg, std::ostream& out, std::size_t threads = 0) {
  if (!cfg.trials) throw ValueError("missing key \"trials\"");
  const TrialReport rep =
      run_trials(cfg.model, cfg.scenario(), *cfg.trials, cfg.seed, threads > 0 ? threads : cfg.threads, cfg.tol);
  out << "trial,k_hat,tie\n";
  for (std::size_t i = 0; i < rep.trials; ++i) {
    out << i << ',' << rep.estimates[i] << ',' << (rep.ties[i] ? 1 : 0) << '\n';
  }
  out << "# trials=" << rep.trials << ",empirical_variance=" << format_number(rep.empirical_variance)
      << ",empirical_bias=" << format_number(rep.empirical_bias) << ",mse=" << format_number(rep.mean_squared_error())
      << ",tie_count=" << rep.tie_count << ",bound=" << format_number(rep.bound) << ",tau_star=" << rep.tau_star
      << '\n';
  return kOk;
}

inline int emit_zero_check(const AnalysisConfig& cfg, std::ostream& out) {
  if (!cfg.zero_direction) throw ValueError("missing key \"zero_direction\"");
  const ZeroCheck z = verify_zero_direction(cfg.model, *cfg.zero_direction, cfg.zero_tol);
  out << "is_zero_direction,is_fully_private,residual_state,residual_output,residual_observability\n";
  out << format_bool(z.is_zero_direction) << ',' << format_bool(z.is_fully_private) << ','
      << format_number(z.residual_state) << ',' << format_number(z.residual_output) << ','
      << format_number(z.residual_observability) << '\n';
  // The fully-private reading of a zero direction needs N - k* > n.
  std::string horizon = "unverified";
  if (cfg.N) {
    const std::size_t k_star = cfg.k_star.value_or(0);
    horizon = *cfg.N > k_star && *cfg.N - k_star > cfg.model.n() ? "satisfied" : "violated";
  }
  out << "# horizon_condition=" << horizon << '\n';
  return kOk;
}

inline void report_error(std::ostream& err, const std::string& kind, std::string message) {
  for (char& c : message)
    if (c == '\n' || c == '\r') c = ' ';
  err << "error: " << kind << ": " << message << '\n';
}

/**
 * Runs one subcommand and maps failures to exit codes. Output goes to `out`,
 * the single-line error report to `err`.
 */
inline int run(const std::string& subcommand, const AnalysisConfig& cfg, std::ostream& out, std::ostream& err,
               std::size_t threads = 0) {
  try {
    if (subcommand == "bound") return emit_bound(cfg, out);
    if (subcommand == "directions") return emit_directions(cfg, out);
    if (subcommand == "optimize") return emit_optimize(cfg, out);
    if (subcommand == "simulate") return emit_simulate(cfg, out, threads);
    if (subcommand == "zero-check") return emit_zero_check(cfg, out);
    report_error(err, "UsageError", "unknown subcommand " + subcommand);
    return kConfigError;
  } catch (const NumericalError& e) {
    report_error(err, e.kind(), e.what());
    return kNumericalError;
  } catch (const Error& e) {
    report_error(err, e.kind(), e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    report_error(err, "InternalError", e.what());
    return kNumericalError;
  }
}

/// Loads `config_path` and runs the subcommand; config failures also map to exit codes.
inline int run_file(const std::string& subcommand, const std::string& config_path, std::ostream& out,
                    std::ostream& err, std::size_t threads = 0) {
  try {
    const AnalysisConfig cfg = parse_config(config_path);
    return run(subcommand, cfg, out, err, threads);
  } catch (const NumericalError& e) {
    report_error(err, e.kind(), e.what());
    return kNumericalError;
  } catch (const Error& e) {
    report_error(err, e.kind(), e.what());
    return kConfigError;
  }
}

}  // namespace privleak::cli
