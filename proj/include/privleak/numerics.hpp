/**
 * @file numerics.hpp
 * @brief Small dense linear-algebra kernels: a row-major matrix type,
 * Cholesky, pivoted Gaussian elimination, cyclic Jacobi for symmetric
 * eigenproblems, and rank / null-space extraction.
 *
 * Sizes in this toolkit are tiny (state and input dimensions of a few tens
 * at most), so everything is written for clarity over raw throughput.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "privleak/errors.hpp"
#include "privleak/tolerances.hpp"

namespace privleak {

using Vector = std::vector<double>;

/// Dense row-major real matrix. Zero-sized dimensions are allowed (an empty basis is n x 0).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
      : rows_(rows), cols_(cols), data_(std::move(row_major)) {
    if (data_.size() != rows_ * cols_) {
      throw ShapeError("matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                       std::to_string(rows_ * cols_));
    }
    for (double v : data_) {
      if (!std::isfinite(v)) throw ValueError("matrix entries must be finite");
    }
  }

  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw ShapeError("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(const Vector& d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  /// Single-column matrix holding `v`.
  static Matrix column_of(const Vector& v) { return Matrix(v.size(), 1, v); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Vector column(std::size_t j) const {
    Vector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  void set_column(std::size_t j, const Vector& c) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = c[i];
  }

  Vector row(std::size_t i) const {
    return Vector(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                  data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  /// Rows [r0, r0+nr) and columns [c0, c0+nc).
  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    Matrix b(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
  }

  void set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  Matrix& operator+=(const Matrix& o) {
    require_same_shape(o, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    require_same_shape(o, "-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) {
      throw ShapeError("matrix product " + a.shape() + " * " + b.shape());
    }
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend Vector operator*(const Matrix& a, const Vector& x) {
    if (a.cols_ != x.size()) {
      throw ShapeError("matrix-vector product " + a.shape() + " * " + std::to_string(x.size()));
    }
    Vector y(a.rows_, 0.0);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < a.cols_; ++j) s += a(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }

  bool operator==(const Matrix&) const = default;

  std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

 private:
  void require_same_shape(const Matrix& o, const char* op) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      throw ShapeError(std::string("matrix ") + op + " " + shape() + " vs " + o.shape());
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// --- vector helpers ---------------------------------------------------------

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot product length mismatch");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

inline Vector operator+(Vector a, const Vector& b) {
  if (a.size() != b.size()) throw ShapeError("vector sum length mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

inline Vector operator-(Vector a, const Vector& b) {
  if (a.size() != b.size()) throw ShapeError("vector difference length mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

inline Vector operator*(double s, Vector v) {
  for (double& x : v) x *= s;
  return v;
}

inline double frobenius_norm(const Matrix& m) { return norm2(m.data()); }

/// x' M x.
inline double quadratic_form(const Matrix& m, const Vector& x) { return dot(x, m * x); }

inline bool is_symmetric(const Matrix& s, double rel_tol = kDefaultTolerances.symmetry) {
  if (!s.is_square()) return false;
  const double scale = std::max(frobenius_norm(s), std::numeric_limits<double>::min());
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = i + 1; j < s.cols(); ++j)
      if (std::abs(s(i, j) - s(j, i)) > rel_tol * scale) return false;
  return true;
}

inline Matrix symmetrized(const Matrix& s) {
  Matrix out = s + s.transpose();
  out *= 0.5;
  return out;
}

/// Vertically stacks blocks that share a column count.
inline Matrix vstack(const std::vector<Matrix>& blocks, std::size_t cols) {
  std::size_t rows = 0;
  for (const auto& b : blocks) {
    if (b.cols() != cols) throw ShapeError("vstack column mismatch");
    rows += b.rows();
  }
  Matrix out(rows, cols);
  std::size_t r = 0;
  for (const auto& b : blocks) {
    out.set_block(r, 0, b);
    r += b.rows();
  }
  return out;
}

// --- Cholesky ---------------------------------------------------------------

/**
 * Lower-triangular L with L L' = S.
 * Throws NotPositiveDefinite when a pivot falls to or below
 * `tol.pd_pivot` times the largest diagonal entry.
 */
inline Matrix cholesky(const Matrix& s, const Tolerances& tol = kDefaultTolerances) {
  if (!s.is_square()) throw ShapeError("cholesky needs a square matrix, got " + s.shape());
  if (!is_symmetric(s, tol.symmetry)) throw NotSymmetric("cholesky input is not symmetric");
  const std::size_t n = s.rows();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, s(i, i));
  const double threshold = tol.pd_pivot * max_diag;

  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = s(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > threshold) || max_diag <= 0.0) {
      throw NotPositiveDefinite("pivot " + std::to_string(j) + " is " + std::to_string(pivot));
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }
  return l;
}

/// Solves L x = b for lower-triangular L (forward substitution).
inline Vector solve_lower(const Matrix& l, Vector b) {
  const std::size_t n = l.rows();
  if (b.size() != n) throw ShapeError("solve_lower length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= l(i, k) * b[k];
    b[i] = v / l(i, i);
  }
  return b;
}

/// Solves L X = B column by column.
inline Matrix solve_lower(const Matrix& l, const Matrix& b) {
  const std::size_t n = l.rows();
  if (b.rows() != n) throw ShapeError("solve_lower row mismatch");
  Matrix x = b;
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = x(i, j);
      for (std::size_t k = 0; k < i; ++k) v -= l(i, k) * x(k, j);
      x(i, j) = v / l(i, i);
    }
  }
  return x;
}

// --- Gaussian elimination ---------------------------------------------------

/**
 * Solves A X = B with partial (row) pivoting.
 * Throws Singular when a pivot magnitude drops below
 * `tol.singular_pivot` times the largest initial row norm of A.
 */
inline Matrix solve_linear(const Matrix& a, const Matrix& b, const Tolerances& tol = kDefaultTolerances) {
  if (!a.is_square()) throw ShapeError("solve_linear needs a square matrix, got " + a.shape());
  if (b.rows() != a.rows()) throw ShapeError("solve_linear rhs " + b.shape() + " vs " + a.shape());
  const std::size_t n = a.rows();
  const std::size_t nr = b.cols();

  double max_row_norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_row_norm = std::max(max_row_norm, norm2(a.row(i)));
  const double threshold = tol.singular_pivot * max_row_norm;

  Matrix lu = a;
  Matrix x = b;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::abs(lu(i, col)) > std::abs(lu(piv, col))) piv = i;
    if (!(std::abs(lu(piv, col)) >= threshold) || max_row_norm == 0.0) {
      throw Singular("pivot " + std::to_string(col) + " below threshold");
    }
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(col, j), lu(piv, j));
      for (std::size_t j = 0; j < nr; ++j) std::swap(x(col, j), x(piv, j));
    }
    for (std::size_t i = col + 1; i < n; ++i) {
      const double f = lu(i, col) / lu(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) lu(i, j) -= f * lu(col, j);
      for (std::size_t j = 0; j < nr; ++j) x(i, j) -= f * x(col, j);
    }
  }
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t j = 0; j < nr; ++j) {
      double v = x(ii, j);
      for (std::size_t k = ii + 1; k < n; ++k) v -= lu(ii, k) * x(k, j);
      x(ii, j) = v / lu(ii, ii);
    }
  }
  return x;
}

inline Vector solve_linear(const Matrix& a, const Vector& b, const Tolerances& tol = kDefaultTolerances) {
  return solve_linear(a, Matrix::column_of(b), tol).column(0);
}

// --- symmetric eigenproblem -------------------------------------------------

struct EigenDecomposition {
  Vector eigenvalues;  ///< ascending
  Matrix eigenvectors;  ///< column i pairs with eigenvalues[i]
};

namespace detail {

/// Flips `v` so that its first entry of magnitude above 1e-12 is positive.
inline void canonical_sign(Matrix& v, std::size_t col) {
  for (std::size_t i = 0; i < v.rows(); ++i) {
    const double x = v(i, col);
    if (std::abs(x) > 1e-12) {
      if (x < 0.0)
        for (std::size_t k = 0; k < v.rows(); ++k) v(k, col) = -v(k, col);
      return;
    }
  }
}

}  // namespace detail

/**
 * Cyclic Jacobi eigen-decomposition of a symmetric matrix.
 *
 * Sweeps over all (p, q) pairs until every off-diagonal magnitude is below
 * `tol.jacobi_offdiag * ||S||_F`. Eigenvalues come back ascending; each
 * eigenvector has its first significant entry positive.
 */
inline EigenDecomposition sym_eig(const Matrix& s, const Tolerances& tol = kDefaultTolerances) {
  if (!s.is_square()) throw ShapeError("sym_eig needs a square matrix, got " + s.shape());
  if (!is_symmetric(s, tol.symmetry)) throw NotSymmetric("sym_eig input is not symmetric");
  const std::size_t n = s.rows();
  Matrix a = symmetrized(s);
  Matrix v = Matrix::identity(n);
  const double threshold = tol.jacobi_offdiag * frobenius_norm(a);

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off < threshold || off == 0.0) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = theta >= 0.0 ? 1.0 / (theta + std::hypot(theta, 1.0))
                                       : -1.0 / (-theta + std::hypot(theta, 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
    detail::canonical_sign(out.eigenvectors, k);
  }
  return out;
}

// --- rank and null space ----------------------------------------------------

struct RankNullspace {
  std::size_t rank = 0;
  Matrix null_basis;  ///< cols(M) x (cols(M) - rank), orthonormal columns
};

/**
 * Numerical rank and right null space of M.
 *
 * Uses the eigenvectors of M'M. The singular value attached to each
 * eigenvector is measured as ||M v|| rather than sqrt(lambda): eigenvalues of
 * M'M carry absolute error near eps * sigma_max^2, which would hide singular
 * values below ~1e-8 * sigma_max, while the eigenvectors themselves stay
 * accurate for well-separated clusters.
 */
inline RankNullspace rank_and_nullspace(const Matrix& m, double rel_tol = kDefaultTolerances.rank_rel) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw InvalidArgument("rank tolerance must lie in (0, 1)");
  const std::size_t p = m.cols();
  if (p == 0) return {0, Matrix(0, 0)};

  const EigenDecomposition eig = sym_eig(symmetrized(m.transpose() * m));
  Vector sigma(p);
  for (std::size_t k = 0; k < p; ++k) sigma[k] = norm2(m * eig.eigenvectors.column(k));
  const double sigma_max = *std::max_element(sigma.begin(), sigma.end());

  std::vector<std::size_t> null_cols;
  for (std::size_t k = 0; k < p; ++k)
    if (sigma_max == 0.0 || sigma[k] <= rel_tol * sigma_max) null_cols.push_back(k);

  RankNullspace out{p - null_cols.size(), Matrix(p, null_cols.size())};
  for (std::size_t j = 0; j < null_cols.size(); ++j)
    out.null_basis.set_column(j, eig.eigenvectors.column(null_cols[j]));
  return out;
}

/**
 * Largest principal angle (radians) between span(Q1) and span(Q2), both with
 * orthonormal columns and equal column counts. Returns pi/2 when the
 * dimensions differ.
 */
inline double max_principal_angle(const Matrix& q1, const Matrix& q2) {
  if (q1.rows() != q2.rows()) throw ShapeError("principal angle ambient dimension mismatch");
  if (q1.cols() != q2.cols()) return std::acos(0.0);
  if (q1.cols() == 0) return 0.0;
  // Residual of Q1 after projection onto span(Q2).
  const Matrix residual = q1 - q2 * (q2.transpose() * q1);
  const EigenDecomposition e = sym_eig(symmetrized(residual.transpose() * residual));
  const double s = std::sqrt(std::max(0.0, e.eigenvalues.back()));
  return std::asin(std::min(1.0, s));
}

/// Angle between a single vector and span(Q).
inline double angle_to_span(const Vector& v, const Matrix& q) {
  const double nv = norm2(v);
  if (nv == 0.0) return 0.0;
  if (q.cols() == 0) return std::acos(0.0);
  const Vector residual = v - q * (q.transpose() * v);
  return std::asin(std::min(1.0, norm2(residual) / nv));
}

}  // namespace privleak
