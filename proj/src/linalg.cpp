#include "romp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace romp {

namespace {

void require_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("DenseMatrix: non-finite entry");
  }
}

} // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (!std::isfinite(fill)) throw std::invalid_argument("DenseMatrix: non-finite fill");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("DenseMatrix: expected " + std::to_string(rows * cols) +
                         " entries, got " + std::to_string(data_.size()));
  }
  require_finite(data_);
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector DenseMatrix::column(std::size_t j) const {
  if (j >= cols_) throw DimensionError("DenseMatrix::column: index out of range");
  Vector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

DenseMatrix DenseMatrix::select_columns(std::span<const std::size_t> cols) const {
  DenseMatrix out(rows_, cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c] >= cols_) throw DimensionError("select_columns: index out of range");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t c = 0; c < cols.size(); ++c) out(i, c) = (*this)(i, cols[c]);
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) {
  // Scaled accumulation so tiny residuals do not underflow to zero.
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double v : a) {
    const double t = v / scale;
    s += t * t;
  }
  return scale * std::sqrt(s);
}

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DimensionError("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vector mat_vec(const DenseMatrix &a, std::span<const double> z) {
  if (z.size() != a.cols()) {
    throw DimensionError("mat_vec: vector length " + std::to_string(z.size()) +
                         " != cols " + std::to_string(a.cols()));
  }
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * z[j];
    out[i] = s;
  }
  return out;
}

Vector mat_t_vec(const DenseMatrix &a, std::span<const double> r) {
  if (r.size() != a.rows()) {
    throw DimensionError("mat_t_vec: vector length " + std::to_string(r.size()) +
                         " != rows " + std::to_string(a.rows()));
  }
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (r[i] != 0.0) axpy(r[i], a.row(i), out);
  }
  return out;
}

Vector mat_vec_cols(const DenseMatrix &a, std::span<const std::size_t> cols,
                    std::span<const double> y) {
  if (y.size() != cols.size()) throw DimensionError("mat_vec_cols: coefficient count mismatch");
  Vector out(a.rows(), 0.0);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c] >= a.cols()) throw DimensionError("mat_vec_cols: column out of range");
  }
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols.size(); ++c) s += a(i, cols[c]) * y[c];
    out[i] = s;
  }
  return out;
}

Vector mat_t_vec_cols(const DenseMatrix &a, std::span<const std::size_t> cols,
                      std::span<const double> r) {
  if (r.size() != a.rows()) throw DimensionError("mat_t_vec_cols: vector length mismatch");
  Vector out(cols.size(), 0.0);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c] >= a.cols()) throw DimensionError("mat_t_vec_cols: column out of range");
  }
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (r[i] == 0.0) continue;
    for (std::size_t c = 0; c < cols.size(); ++c) out[c] += a(i, cols[c]) * r[i];
  }
  return out;
}

void QrState::append(std::span<const double> col) {
  if (col.size() != rows_) {
    throw DimensionError("QrState::append: column length " + std::to_string(col.size()) +
                         " != " + std::to_string(rows_));
  }
  if (q_.size() >= rows_) {
    throw RankDeficientError("QrState::append: factor already has " + std::to_string(rows_) +
                             " columns");
  }
  const double col_norm = norm2(col);
  Vector v(col.begin(), col.end());
  Vector rcol(q_.size() + 1, 0.0);

  for (std::size_t j = 0; j < q_.size(); ++j) {
    const double c = dot(q_[j], v);
    rcol[j] = c;
    axpy(-c, q_[j], v);
  }
  double rem = norm2(v);
  if (rem < kReorthThreshold * col_norm) {
    for (std::size_t j = 0; j < q_.size(); ++j) {
      const double c = dot(q_[j], v);
      rcol[j] += c;
      axpy(-c, q_[j], v);
    }
    rem = norm2(v);
  }
  if (col_norm == 0.0 || rem < kRankTolerance * col_norm) {
    throw RankDeficientError("QrState::append: column lies in the span of the existing columns");
  }
  for (double &e : v) e /= rem;
  rcol.back() = rem;
  q_.push_back(std::move(v));
  r_cols_.push_back(std::move(rcol));
}

double QrState::r(std::size_t i, std::size_t j) const {
  if (i >= size() || j >= size()) throw DimensionError("QrState::r: index out of range");
  return i <= j ? r_cols_[j][i] : 0.0;
}

Vector QrState::solve(std::span<const double> x) const {
  if (x.size() != rows_) throw DimensionError("QrState::solve: rhs length mismatch");
  if (q_.empty()) throw std::logic_error("QrState::solve: empty factorization");
  const std::size_t k = q_.size();

  // Q^T x, projected out column by column (MGS order).
  Vector b(x.begin(), x.end());
  Vector qtx(k);
  for (std::size_t j = 0; j < k; ++j) {
    qtx[j] = dot(q_[j], b);
    axpy(-qtx[j], q_[j], b);
  }

  Vector y(k, 0.0);
  for (std::size_t ii = k; ii-- > 0;) {
    double s = qtx[ii];
    for (std::size_t j = ii + 1; j < k; ++j) s -= r_cols_[j][ii] * y[j];
    y[ii] = s / r_cols_[ii][ii];
  }
  return y;
}

QrState qr_of_columns(const DenseMatrix &a, std::span<const std::size_t> cols) {
  QrState state(a.rows());
  for (std::size_t c : cols) state.append(a.column(c));
  return state;
}

Vector solve_ls_qr(const QrState &state, std::span<const double> x) { return state.solve(x); }

CglsResult solve_ls_cgls(const DenseMatrix &a, std::span<const std::size_t> cols,
                         std::span<const double> x, double tol, std::size_t max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_ls_cgls: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("solve_ls_cgls: max_iter must be >= 1");
  if (x.size() != a.rows()) throw DimensionError("solve_ls_cgls: rhs length mismatch");

  CglsResult out;
  out.solution.assign(cols.size(), 0.0);
  Vector r(x.begin(), x.end());
  Vector s = mat_t_vec_cols(a, cols, r);
  const double s0 = norm2(s);
  if (s0 == 0.0) {
    out.converged = true;
    return out;
  }
  Vector p = s;
  double gamma = dot(s, s);

  for (std::size_t it = 0; it < max_iter; ++it) {
    const Vector q = mat_vec_cols(a, cols, p);
    const double qq = dot(q, q);
    if (qq == 0.0) break;
    const double alpha = gamma / qq;
    axpy(alpha, p, out.solution);
    axpy(-alpha, q, r);
    s = mat_t_vec_cols(a, cols, r);
    out.iterations = it + 1;
    const double s_norm = norm2(s);
    if (s_norm <= tol * s0) {
      out.converged = true;
      return out;
    }
    const double gamma_next = s_norm * s_norm;
    const double beta = gamma_next / gamma;
    gamma = gamma_next;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = s[i] + beta * p[i];
  }
  return out;
}

CglsResult solve_ls_cgls(const DenseMatrix &a, std::span<const double> x, double tol,
                         std::size_t max_iter) {
  IndexSet all(a.cols());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return solve_ls_cgls(a, all, x, tol, max_iter);
}

} // namespace romp
