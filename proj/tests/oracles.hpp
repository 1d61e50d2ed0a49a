#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the library's solvers or selection routines.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "romp/linalg.hpp"

namespace oracle {

inline Eigen::MatrixXd to_eigen(const romp::DenseMatrix &a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  return m;
}

inline romp::DenseMatrix from_eigen(const Eigen::MatrixXd &m) {
  romp::DenseMatrix a(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) a(i, j) = m(i, j);
  return a;
}

inline Eigen::VectorXd to_eigen(std::span<const double> v) {
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = v[i];
  return out;
}

/// Solves (A^T A) y = A^T x by Cholesky of the formed normal matrix.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd &a, const Eigen::VectorXd &x) {
  return (a.transpose() * a).llt().solve(a.transpose() * x);
}

/// Minimum-norm least squares via complete orthogonal decomposition.
inline Eigen::VectorXd pseudo_inverse_solve(const Eigen::MatrixXd &a, const Eigen::VectorXd &x) {
  return a.completeOrthogonalDecomposition().solve(x);
}

/// rows x cols matrix with singular values spread log-uniformly over [1, cond].
inline Eigen::MatrixXd conditioned_matrix(int rows, int cols, double cond, std::mt19937_64 &gen) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(rows, cols), b(cols, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = g(gen);
  for (int i = 0; i < cols; ++i)
    for (int j = 0; j < cols; ++j) b(i, j) = g(gen);
  const Eigen::MatrixXd u = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ() *
                            Eigen::MatrixXd::Identity(rows, cols);
  const Eigen::MatrixXd v = Eigen::HouseholderQR<Eigen::MatrixXd>(b).householderQ();
  Eigen::VectorXd s(cols);
  for (int k = 0; k < cols; ++k) {
    const double t = cols == 1 ? 0.0 : static_cast<double>(k) / (cols - 1);
    s(k) = std::pow(cond, t);
  }
  return u * s.asDiagonal() * v.transpose();
}

/// Best energy over every subset with pairwise-comparable magnitudes
/// (|y_i| <= 2 |y_j|), by enumeration of all 2^m - 1 nonempty subsets.
inline double brute_force_comparable_energy(std::span<const double> y) {
  const std::size_t m = y.size();
  double best = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    double lo = INFINITY, hi = 0.0, e2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (1u << i)) {
        const double a = std::abs(y[i]);
        lo = std::min(lo, a);
        hi = std::max(hi, a);
        e2 += a * a;
      }
    }
    if (hi <= 2.0 * lo) best = std::max(best, std::sqrt(e2));
  }
  return best;
}

/// Test input with mixed component distributions: Gaussian, heavy-tailed,
/// log-uniform spread over 14 octaves, or small integers with many exact ties.
/// The distribution is picked per vector; components are never zero.
inline std::vector<double> mixed_vector(std::size_t m, std::mt19937_64 &gen) {
  std::normal_distribution<double> g;
  std::cauchy_distribution<double> c;
  std::uniform_real_distribution<double> u(-12.0, 2.0);
  std::vector<double> y(m);
  const int kind = static_cast<int>(gen() % 4);
  for (auto &e : y) {
    switch (kind) {
    case 0: e = g(gen); break;
    case 1: e = c(gen); break;
    case 2: e = std::exp2(u(gen)) * ((gen() & 1) ? 1.0 : -1.0); break;
    default: e = static_cast<double>(1 + gen() % 3); break;
    }
    if (e == 0.0) e = 1.0;
  }
  return y;
}

/// Largest singular value by full SVD.
inline double spectral_norm(const Eigen::MatrixXd &m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

/// ||P_I P_J|| from Householder bases and a full SVD.
inline double projection_product_norm(const Eigen::MatrixXd &phi_i, const Eigen::MatrixXd &phi_j) {
  const Eigen::MatrixXd qi = Eigen::HouseholderQR<Eigen::MatrixXd>(phi_i).householderQ() *
                             Eigen::MatrixXd::Identity(phi_i.rows(), phi_i.cols());
  const Eigen::MatrixXd qj = Eigen::HouseholderQR<Eigen::MatrixXd>(phi_j).householderQ() *
                             Eigen::MatrixXd::Identity(phi_j.rows(), phi_j.cols());
  return spectral_norm(qi.transpose() * qj);
}

} // namespace oracle
