/**
 * @file config.hpp
 * @brief JSON analysis description -> validated model, scenario and program.
 *
 * Recognized top-level keys:
 *   A, B, C, sigma_e           required, nested row-major arrays (a bare number is a 1x1 matrix)
 *   u, k_star, N, x0, norm     step scenario / direction search
 *   Q, R, C1, r, mu, epsilon_bar   steady-state program
 *   trials, seed, threads      Monte Carlo
 *   zero_direction             {"z0": z, "x": [...], "u": [...], "tol": t}; complex entries as [re, im]
 *   tolerances                 object overriding fields of Tolerances by name
 */
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "privleak/directions.hpp"
#include "privleak/errors.hpp"
#include "privleak/lti_model.hpp"
#include "privleak/numerics.hpp"
#include "privleak/privacy_utility.hpp"
#include "privleak/tolerances.hpp"

namespace privleak {

struct AnalysisConfig {
  explicit AnalysisConfig(SystemModel m) : model(std::move(m)) {}

  SystemModel model;
  std::optional<Vector> u;
  std::optional<std::size_t> k_star;
  std::optional<std::size_t> N;
  Vector x0;  ///< always length n; zero unless given
  double norm = 1.0;
  std::optional<SteadyStateProgram> program;
  std::optional<double> epsilon_bar;
  std::optional<std::size_t> trials;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::optional<ZeroDirection> zero_direction;
  double zero_tol = 1e-9;
  Tolerances tol;

  /// Full step scenario; throws ValueError naming the first missing key.
  StepScenario scenario() const {
    if (!u) throw ValueError("missing key \"u\"");
    return {*u, require_k_star(), require_N(), x0};
  }
  std::size_t require_k_star() const {
    if (!k_star) throw ValueError("missing key \"k_star\"");
    return *k_star;
  }
  std::size_t require_N() const {
    if (!N) throw ValueError("missing key \"N\"");
    return *N;
  }
};

namespace detail {

using nlohmann::json;

inline std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline double number_at(const json& j, const std::string& key) {
  if (!j.is_number()) throw ValueError("\"" + key + "\" must contain only numbers");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValueError("\"" + key + "\" contains a non-finite value");
  return v;
}

inline Matrix matrix_at(const json& doc, const std::string& key) {
  const json& j = doc.at(key);
  if (j.is_number()) return Matrix(1, 1, std::vector<double>{number_at(j, key)});
  if (!j.is_array() || j.empty()) throw ValueError("\"" + key + "\" must be a non-empty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  std::vector<double> data;
  for (std::size_t i = 0; i < rows; ++i) {
    const json& row = j[i];
    if (!row.is_array()) throw ValueError("\"" + key + "\" row " + std::to_string(i) + " is not an array");
    if (i == 0) cols = row.size();
    if (row.size() != cols) throw ShapeError("\"" + key + "\" row " + std::to_string(i) + " has a different length");
    for (const json& v : row) data.push_back(number_at(v, key));
  }
  return Matrix(rows, cols, std::move(data));
}

inline Vector vector_at(const json& doc, const std::string& key) {
  const json& j = doc.at(key);
  if (j.is_number()) return {number_at(j, key)};
  if (!j.is_array()) throw ValueError("\"" + key + "\" must be an array of numbers");
  Vector v;
  for (const json& x : j) v.push_back(number_at(x, key));
  return v;
}

inline std::size_t count_at(const json& doc, const std::string& key) {
  const json& j = doc.at(key);
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ValueError("\"" + key + "\" must be a non-negative integer");
  }
  return j.get<std::size_t>();
}

inline std::complex<double> complex_from(const json& j, const std::string& key) {
  if (j.is_number()) return {number_at(j, key), 0.0};
  if (j.is_array() && j.size() == 2) return {number_at(j[0], key), number_at(j[1], key)};
  throw ValueError("\"" + key + "\" entries must be numbers or [re, im] pairs");
}

inline std::vector<std::complex<double>> complex_vector(const json& j, const std::string& key) {
  if (!j.is_array()) throw ValueError("\"" + key + "\" must be an array");
  std::vector<std::complex<double>> v;
  for (const json& x : j) v.push_back(complex_from(x, key));
  return v;
}

inline void require_spd(const Matrix& m, const std::string& key, const Tolerances& tol) {
  try {
    cholesky(m, tol);
  } catch (const NumericalError& e) {
    throw ValueError("\"" + key + "\" is not symmetric positive definite (" + e.what() + ")");
  }
}

inline void apply_tolerance_overrides(const json& j, Tolerances& tol) {
  if (!j.is_object()) throw ValueError("\"tolerances\" must be an object");
  const std::map<std::string, double Tolerances::*> fields = {
      {"symmetry", &Tolerances::symmetry},
      {"pd_pivot", &Tolerances::pd_pivot},
      {"singular_pivot", &Tolerances::singular_pivot},
      {"jacobi_offdiag", &Tolerances::jacobi_offdiag},
      {"rank_rel", &Tolerances::rank_rel},
      {"stability_margin", &Tolerances::stability_margin},
      {"fully_private_rel", &Tolerances::fully_private_rel},
      {"exponent_zero_rel", &Tolerances::exponent_zero_rel},
      {"exponent_zero_abs", &Tolerances::exponent_zero_abs},
      {"exponent_overflow", &Tolerances::exponent_overflow},
      {"certificate", &Tolerances::certificate},
      {"ml_tie_rel", &Tolerances::ml_tie_rel},
      {"already_private", &Tolerances::already_private},
  };
  for (const auto& [name, value] : j.items()) {
    const auto it = fields.find(name);
    if (it == fields.end()) throw ValueError("unknown tolerance \"" + name + "\"");
    const double v = number_at(value, "tolerances." + name);
    if (!(v >= 0.0)) throw ValueError("tolerance \"" + name + "\" must be non-negative");
    tol.*(it->second) = v;
  }
}

}  // namespace detail

/** Parses and validates an analysis description held in `text`. */
inline AnalysisConfig parse_config_text(const std::string& text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed JSON at byte " + std::to_string(e.byte) + " (" + detail::line_column(text, e.byte) +
                     ")");
  }
  if (!doc.is_object()) throw ParseError("top-level JSON value must be an object");

  static const std::set<std::string> known = {"A",  "B",  "C",  "sigma_e", "u",    "k_star",      "N",
                                              "x0", "norm", "Q", "R",      "C1",   "r",           "mu",
                                              "epsilon_bar", "trials", "seed", "threads", "zero_direction",
                                              "tolerances"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.contains(key)) throw ValueError("unknown key \"" + key + "\"");
  }
  for (const char* key : {"A", "B", "C", "sigma_e"}) {
    if (!doc.contains(key)) throw ValueError(std::string("missing required key \"") + key + "\"");
  }

  Tolerances tol;
  if (doc.contains("tolerances")) detail::apply_tolerance_overrides(doc["tolerances"], tol);

  const Matrix a = detail::matrix_at(doc, "A");
  const Matrix b = detail::matrix_at(doc, "B");
  const Matrix c = detail::matrix_at(doc, "C");
  const Matrix sigma = detail::matrix_at(doc, "sigma_e");
  if (!a.is_square()) throw ShapeError("\"A\" must be square, got " + a.shape());
  if (b.rows() != a.rows()) throw ShapeError("\"B\" is " + b.shape() + " but \"A\" is " + a.shape());
  if (c.cols() != a.rows()) throw ShapeError("\"C\" is " + c.shape() + " but \"A\" is " + a.shape());
  if (!sigma.is_square() || sigma.rows() != c.rows())
    throw ShapeError("\"sigma_e\" is " + sigma.shape() + " but \"C\" is " + c.shape());
  detail::require_spd(sigma, "sigma_e", tol);

  AnalysisConfig cfg(SystemModel(a, b, c, sigma, tol));
  cfg.tol = tol;
  const std::size_t n = a.rows();
  const std::size_t p = b.cols();

  if (doc.contains("u")) {
    cfg.u = detail::vector_at(doc, "u");
    if (cfg.u->size() != p)
      throw ShapeError("\"u\" has length " + std::to_string(cfg.u->size()) + " but \"B\" is " + b.shape());
  }
  if (doc.contains("k_star")) cfg.k_star = detail::count_at(doc, "k_star");
  if (doc.contains("N")) cfg.N = detail::count_at(doc, "N");
  if (cfg.k_star && cfg.N && *cfg.N < *cfg.k_star) throw ValueError("\"N\" must be >= \"k_star\"");
  cfg.x0 = Vector(n, 0.0);
  if (doc.contains("x0")) {
    cfg.x0 = detail::vector_at(doc, "x0");
    if (cfg.x0.size() != n)
      throw ShapeError("\"x0\" has length " + std::to_string(cfg.x0.size()) + " but \"A\" is " + a.shape());
  }
  if (doc.contains("norm")) {
    cfg.norm = detail::number_at(doc["norm"], "norm");
    if (!(cfg.norm > 0.0)) throw ValueError("\"norm\" must be positive");
  }

  const bool any_program = doc.contains("Q") || doc.contains("R") || doc.contains("C1") || doc.contains("r");
  if (any_program) {
    for (const char* key : {"Q", "R", "C1", "r"}) {
      if (!doc.contains(key)) throw ValueError(std::string("program section is missing \"") + key + "\"");
    }
    SteadyStateProgram prog{detail::matrix_at(doc, "Q"), detail::matrix_at(doc, "R"), detail::matrix_at(doc, "C1"),
                            detail::vector_at(doc, "r"), 0.0};
    if (!prog.Q.is_square() || prog.Q.rows() != n)
      throw ShapeError("\"Q\" is " + prog.Q.shape() + " but \"A\" is " + a.shape());
    if (!prog.R.is_square() || prog.R.rows() != p)
      throw ShapeError("\"R\" is " + prog.R.shape() + " but \"B\" is " + b.shape());
    if (prog.C1.cols() != n) throw ShapeError("\"C1\" is " + prog.C1.shape() + " but \"A\" is " + a.shape());
    if (prog.r.size() != prog.C1.rows())
      throw ShapeError("\"r\" has length " + std::to_string(prog.r.size()) + " but \"C1\" is " + prog.C1.shape());
    if (prog.C1.rows() >= p) throw ValueError("\"C1\" must have fewer rows than \"B\" has columns (q < p)");
    detail::require_spd(prog.Q, "Q", tol);
    detail::require_spd(prog.R, "R", tol);
    if (doc.contains("mu")) {
      prog.mu = detail::number_at(doc["mu"], "mu");
      if (prog.mu < 0.0) throw ValueError("\"mu\" must be non-negative");
    }
    cfg.program = std::move(prog);
  }
  if (doc.contains("epsilon_bar")) {
    cfg.epsilon_bar = detail::number_at(doc["epsilon_bar"], "epsilon_bar");
    if (*cfg.epsilon_bar < 0.0) throw ValueError("\"epsilon_bar\" must be non-negative");
  }

  if (doc.contains("trials")) cfg.trials = detail::count_at(doc, "trials");
  if (doc.contains("seed")) cfg.seed = static_cast<std::uint64_t>(detail::count_at(doc, "seed"));
  if (doc.contains("threads")) cfg.threads = detail::count_at(doc, "threads");

  if (doc.contains("zero_direction")) {
    const json& z = doc["zero_direction"];
    if (!z.is_object() || !z.contains("x") || !z.contains("u"))
      throw ValueError("\"zero_direction\" needs \"x\" and \"u\"");
    ZeroDirection zd;
    zd.z0 = z.contains("z0") ? detail::complex_from(z["z0"], "zero_direction.z0") : std::complex<double>{};
    zd.x_zero = detail::complex_vector(z["x"], "zero_direction.x");
    zd.u_zero = detail::complex_vector(z["u"], "zero_direction.u");
    if (zd.x_zero.size() != n)
      throw ShapeError("\"zero_direction.x\" has length " + std::to_string(zd.x_zero.size()) + " but \"A\" is " +
                       a.shape());
    if (zd.u_zero.size() != p)
      throw ShapeError("\"zero_direction.u\" has length " + std::to_string(zd.u_zero.size()) + " but \"B\" is " +
                       b.shape());
    if (z.contains("tol")) cfg.zero_tol = detail::number_at(z["tol"], "zero_direction.tol");
    cfg.zero_direction = std::move(zd);
  }
  return cfg;
}

inline AnalysisConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace privleak
