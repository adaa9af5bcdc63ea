#pragma once

#include "treesurgeon/error.hpp"
#include "treesurgeon/scalar.hpp"

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

namespace treesurgeon {

/// Dense row-major matrix. Small and value-semantic; sizes here are at most a few dozen.
template <Scalar S>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, S(0)) {}

  /// Builds a matrix whose columns are the given vectors.
  static Matrix from_columns(const std::vector<std::vector<S>>& columns) {
    const std::size_t r = columns.empty() ? 0 : columns.front().size();
    Matrix m(r, columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (columns[j].size() != r) throw Error(ErrorCode::invalid_argument, "ragged columns");
      for (std::size_t i = 0; i < r; ++i) m(i, j) = columns[j][i];
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  S& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const S& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<S> column(std::size_t j) const {
    std::vector<S> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  /// Rows `row_ids` and columns `col_ids`, in the given order.
  Matrix submatrix(const std::vector<std::size_t>& row_ids, const std::vector<std::size_t>& col_ids) const {
    Matrix s(row_ids.size(), col_ids.size());
    for (std::size_t i = 0; i < row_ids.size(); ++i)
      for (std::size_t j = 0; j < col_ids.size(); ++j) s(i, j) = (*this)(row_ids[i], col_ids[j]);
    return s;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<S> data_;
};

template <Scalar S>
S dot(const std::vector<S>& a, const std::vector<S>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::invalid_argument, "dot of mismatched vectors");
  S acc(0);
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

namespace detail {

/// Multiplies each row by the lcm of its denominators; returns integer rows.
inline std::vector<std::vector<BigInt>> integer_rows(const Matrix<Rational>& m,
                                                     Rational* scale = nullptr) {
  std::vector<std::vector<BigInt>> a(m.rows(), std::vector<BigInt>(m.cols()));
  Rational total(1);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    BigInt l(1);
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const BigInt d = denominator(m(i, j));
      l = boost::multiprecision::lcm(l, d);
    }
    for (std::size_t j = 0; j < m.cols(); ++j)
      a[i][j] = numerator(m(i, j)) * (l / denominator(m(i, j)));
    total *= Rational(l);
  }
  if (scale) *scale = total;
  return a;
}

}  // namespace detail

/// Exact determinant: rows are cleared to integers, then Bareiss elimination.
inline Rational determinant(const Matrix<Rational>& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::invalid_argument, "determinant of non-square matrix");
  const std::size_t n = m.rows();
  if (n == 0) return Rational(1);
  Rational scale;
  auto a = detail::integer_rows(m, &scale);
  BigInt prev(1);
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t r = k + 1;
      while (r < n && a[r][k] == 0) ++r;
      if (r == n) return Rational(0);
      std::swap(a[k], a[r]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
      a[i][k] = 0;
    }
    prev = a[k][k];
  }
  Rational det(a[n - 1][n - 1]);
  if (sign < 0) det = -det;
  return det / scale;
}

/// Floating determinant by LU with partial pivoting.
inline double determinant(const Matrix<double>& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::invalid_argument, "determinant of non-square matrix");
  const std::size_t n = m.rows();
  if (n == 0) return 1.0;
  Eigen::MatrixXd e(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) e(i, j) = m(i, j);
  return e.partialPivLu().determinant();
}

struct RankResult {
  std::size_t rank = 0;
  std::vector<std::size_t> pivot_columns;   // first independent columns, left to right
  std::vector<double> singular_values;      // float mode only, descending
  double tolerance = 0.0;                   // float mode only, relative
};

/// Exact rank by gcd-normalised fraction-free row reduction.
inline RankResult rank(const Matrix<Rational>& m) {
  auto a = detail::integer_rows(m);
  RankResult out;
  std::size_t row = 0;
  for (std::size_t c = 0; c < m.cols() && row < m.rows(); ++c) {
    std::size_t p = row;
    while (p < m.rows() && a[p][c] == 0) ++p;
    if (p == m.rows()) continue;
    std::swap(a[row], a[p]);
    for (std::size_t i = row + 1; i < m.rows(); ++i) {
      if (a[i][c] == 0) continue;
      BigInt f = a[i][c], piv = a[row][c];
      BigInt g(0);
      for (std::size_t j = c; j < m.cols(); ++j) {
        a[i][j] = a[i][j] * piv - f * a[row][j];
        g = boost::multiprecision::gcd(g, a[i][j]);
      }
      if (g > 1)
        for (std::size_t j = c; j < m.cols(); ++j) a[i][j] /= g;
    }
    out.pivot_columns.push_back(c);
    ++row;
  }
  out.rank = out.pivot_columns.size();
  return out;
}

/// Numerical rank: singular values above `rel_tol` times the largest one.
inline RankResult rank(const Matrix<double>& m, double rel_tol = 1e-9) {
  RankResult out;
  out.tolerance = rel_tol;
  if (m.rows() == 0 || m.cols() == 0) return out;
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(e);
  const auto& sv = svd.singularValues();
  out.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double top = sv.size() ? sv(0) : 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * top) ++out.rank;
  // pivot columns from a column-pivoted QR, reported in ascending order
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(e);
  for (std::size_t k = 0; k < out.rank; ++k)
    out.pivot_columns.push_back(static_cast<std::size_t>(qr.colsPermutation().indices()(k)));
  std::sort(out.pivot_columns.begin(), out.pivot_columns.end());
  return out;
}

/// Solves the square system A x = b; empty optional when A is singular.
inline std::optional<std::vector<Rational>> solve(Matrix<Rational> a, std::vector<Rational> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw Error(ErrorCode::invalid_argument, "solve needs a square system");
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    while (p < n && a(p, k).is_zero()) ++p;
    if (p == n) return std::nullopt;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(b[k], b[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      if (a(i, k).is_zero()) continue;
      Rational f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t k = n; k-- > 0;) {
    Rational s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    x[k] = s / a(k, k);
  }
  return x;
}

inline std::optional<std::vector<double>> solve(const Matrix<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw Error(ErrorCode::invalid_argument, "solve needs a square system");
  Eigen::MatrixXd e(n, n);
  Eigen::VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    rhs(i) = b[i];
    for (std::size_t j = 0; j < n; ++j) e(i, j) = a(i, j);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(e);
  if (!lu.isInvertible()) return std::nullopt;
  Eigen::VectorXd x = lu.solve(rhs);
  return std::vector<double>(x.data(), x.data() + n);
}

}  // namespace treesurgeon
