#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "mlrisk/error.hpp"

namespace mlrisk {

/// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::vector<double> multiply(std::span<const double> x) const {
    std::vector<double> y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }

  double norm_one() const {
    double best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
      best = std::max(best, s);
    }
    return best;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// LU factorization PA = LU with partial pivoting. Throws SingularMatrix on an
/// exactly zero pivot.
class LuFactorization {
 public:
  explicit LuFactorization(DenseMatrix a) : lu_(std::move(a)), pivots_(lu_.rows()) {
    const std::size_t n = lu_.rows();
    if (lu_.cols() != n) throw Error(ErrorCode::InvalidArgument, "LU requires a square matrix");
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      double best = std::abs(lu_(k, k));
      for (std::size_t i = k + 1; i < n; ++i) {
        if (std::abs(lu_(i, k)) > best) {
          best = std::abs(lu_(i, k));
          p = i;
        }
      }
      pivots_[k] = p;
      if (best == 0.0 || !std::isfinite(best))
        throw Error(ErrorCode::SingularMatrix, "zero pivot in column " + std::to_string(k));
      if (p != k)
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
      const double inv = 1.0 / lu_(k, k);
      for (std::size_t i = k + 1; i < n; ++i) {
        const double l = lu_(i, k) * inv;
        lu_(i, k) = l;
        if (l == 0.0) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= l * lu_(k, j);
      }
    }
  }

  std::size_t size() const { return lu_.rows(); }

  /// Solves A x = b.
  std::vector<double> solve(std::span<const double> b) const {
    const std::size_t n = size();
    std::vector<double> x(b.begin(), b.end());
    for (std::size_t k = 0; k < n; ++k) std::swap(x[k], x[pivots_[k]]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
      x[i] /= lu_(i, i);
    }
    return x;
  }

  /// Solves A^T x = b.
  std::vector<double> solve_transposed(std::span<const double> b) const {
    const std::size_t n = size();
    std::vector<double> x(b.begin(), b.end());
    // U^T y = b
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(j, i) * x[j];
      x[i] /= lu_(i, i);
    }
    // L^T z = y
    for (std::size_t i = n; i-- > 0;)
      for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu_(j, i) * x[j];
    for (std::size_t k = n; k-- > 0;) std::swap(x[k], x[pivots_[k]]);
    return x;
  }

  /// Hager/Higham estimate of ||A^{-1}||_1 (the scheme behind LAPACK xGECON).
  double inverse_norm_one_estimate() const {
    const std::size_t n = size();
    if (n == 0) return 0.0;
    std::vector<double> x(n, 1.0 / static_cast<double>(n));
    double estimate = 0.0;
    std::size_t last_j = n;
    for (int iter = 0; iter < 5; ++iter) {
      const std::vector<double> y = solve(x);
      double y_norm = 0.0;
      for (double v : y) y_norm += std::abs(v);
      if (iter > 0 && y_norm <= estimate) break;
      estimate = y_norm;
      std::vector<double> s(n);
      for (std::size_t i = 0; i < n; ++i) s[i] = y[i] >= 0.0 ? 1.0 : -1.0;
      const std::vector<double> z = solve_transposed(s);
      std::size_t j = 0;
      for (std::size_t i = 1; i < n; ++i)
        if (std::abs(z[i]) > std::abs(z[j])) j = i;
      double zx = 0.0;
      for (std::size_t i = 0; i < n; ++i) zx += z[i] * x[i];
      if (iter > 0 && (std::abs(z[j]) <= zx || j == last_j)) break;
      last_j = j;
      std::fill(x.begin(), x.end(), 0.0);
      x[j] = 1.0;
    }
    // Higham's alternating-sign safeguard.
    std::vector<double> alt(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double sign = (i % 2 == 0) ? 1.0 : -1.0;
      alt[i] = sign * (1.0 + static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(n - 1, 1)));
    }
    const std::vector<double> w = solve(alt);
    double w_norm = 0.0;
    for (double v : w) w_norm += std::abs(v);
    return std::max(estimate, 2.0 * w_norm / (3.0 * static_cast<double>(n)));
  }

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> pivots_;
};

/// Threshold above which a solve is flagged as near singular.
inline constexpr double near_singular_condition = 1e12;

struct DenseSolution {
  std::vector<double> x;
  double condition_estimate = 0.0;  ///< 1-norm estimate for the equilibrated matrix
  bool near_singular = false;
  double relative_residual = 0.0;  ///< ||Ax - b||_inf / ||b||_inf on the original system
};

/// Solves A x = b after scaling each row by its largest magnitude entry.
inline DenseSolution solve_dense(const DenseMatrix& a, std::span<const double> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n)
    throw Error(ErrorCode::InvalidArgument, "solve_dense needs a square system");
  DenseMatrix scaled = a;
  std::vector<double> rhs(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    const double m = norm_inf(a.row(i));
    if (m == 0.0 || !std::isfinite(m))
      throw Error(ErrorCode::SingularMatrix, "row " + std::to_string(i) + " is zero or non-finite");
    for (double& v : scaled.row(i)) v /= m;
    rhs[i] /= m;
  }
  const double a_norm = scaled.norm_one();
  const LuFactorization lu(scaled);
  DenseSolution out;
  out.x = lu.solve(rhs);
  for (double v : out.x)
    if (!std::isfinite(v)) throw Error(ErrorCode::SingularMatrix, "solution is not finite");
  out.condition_estimate = a_norm * lu.inverse_norm_one_estimate();
  out.near_singular = !(out.condition_estimate <= near_singular_condition);

  const std::vector<double> ax = a.multiply(out.x);
  double r = 0.0;
  for (std::size_t i = 0; i < n; ++i) r = std::max(r, std::abs(ax[i] - b[i]));
  const double b_norm = norm_inf(b);
  out.relative_residual = b_norm > 0.0 ? r / b_norm : r;
  return out;
}

}  // namespace mlrisk
