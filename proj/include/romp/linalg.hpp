#pragma once

// Dense kernels and the two least-squares routes used by the pursuit loops:
// an incrementally grown QR factorization (modified Gram-Schmidt) and CGLS.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace romp {

using Vector = std::vector<double>;
using IndexSet = std::vector<std::size_t>;

class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class RankDeficientError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Row-major dense matrix. Entries are always finite.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Takes ownership of row-major `entries`; throws if the size or any entry is off.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
  double &operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  Vector column(std::size_t j) const;
  std::span<const double> data() const noexcept { return data_; }

  /// Copy of the columns listed in `cols`, in that order.
  DenseMatrix select_columns(std::span<const std::size_t> cols) const;

  bool operator==(const DenseMatrix &) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// A z, summed left to right along each row.
Vector mat_vec(const DenseMatrix &a, std::span<const double> z);
/// A^T r, accumulated row by row.
Vector mat_t_vec(const DenseMatrix &a, std::span<const double> r);

/// A restricted to `cols` applied to coefficients `y` (one per listed column).
Vector mat_vec_cols(const DenseMatrix &a, std::span<const std::size_t> cols,
                    std::span<const double> y);
/// (A restricted to `cols`)^T r.
Vector mat_t_vec_cols(const DenseMatrix &a, std::span<const std::size_t> cols,
                      std::span<const double> r);

/// Thin QR factorization of a column set that grows one column at a time.
///
/// Q is N x k with orthonormal columns (stored column by column), R is k x k
/// upper triangular, and Q R reproduces the appended columns. Appending uses
/// modified Gram-Schmidt with one extra re-orthogonalization pass whenever the
/// projected remainder drops below `kReorthThreshold` times the input norm.
class QrState {
public:
  static constexpr double kReorthThreshold = 0.7;
  static constexpr double kRankTolerance = 1e-12;

  explicit QrState(std::size_t row_count) : rows_(row_count) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return q_.size(); }
  bool empty() const noexcept { return q_.empty(); }

  /// Appends `col`. Leaves the state untouched and throws RankDeficientError if
  /// `col` is numerically inside the current span or the factor is already square.
  void append(std::span<const double> col);

  std::span<const double> q_column(std::size_t j) const { return q_.at(j); }
  /// R(i, j); zero below the diagonal.
  double r(std::size_t i, std::size_t j) const;

  /// Least-squares coefficients y minimizing ||x - A y|| for the appended columns A.
  Vector solve(std::span<const double> x) const;

private:
  std::size_t rows_;
  std::vector<Vector> q_;
  // Column j of R holds entries R(0..j, j).
  std::vector<Vector> r_cols_;
};

/// Builds a QR state by appending the listed columns of `a` in order.
QrState qr_of_columns(const DenseMatrix &a, std::span<const std::size_t> cols);

/// Least squares through a QR state; equivalent to `state.solve(x)`.
Vector solve_ls_qr(const QrState &state, std::span<const double> x);

struct CglsResult {
  Vector solution;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Conjugate gradients on the normal equations of A|cols, without forming them.
/// Stops once ||A^T (x - A y)|| <= tol * ||A^T x|| or after `max_iter` iterations;
/// hitting the cap is reported through `converged`, not thrown.
CglsResult solve_ls_cgls(const DenseMatrix &a, std::span<const std::size_t> cols,
                         std::span<const double> x, double tol, std::size_t max_iter);

/// CGLS over every column of `a`.
CglsResult solve_ls_cgls(const DenseMatrix &a, std::span<const double> x, double tol,
                         std::size_t max_iter);

} // namespace romp
