#include "romp/ric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "romp/rng.hpp"

namespace romp {

double SubmatrixSpectrum::deviation() const noexcept {
  return std::max(1.0 - sigma_min, sigma_max - 1.0);
}

double SubmatrixSpectrum::gram_deviation() const noexcept {
  return std::max(sigma_max * sigma_max - 1.0, 1.0 - sigma_min * sigma_min);
}

SubmatrixSpectrum column_spectrum(const DenseMatrix &phi, std::span<const std::size_t> cols) {
  if (cols.empty()) throw std::invalid_argument("column_spectrum: empty column set");
  const auto m = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(phi.rows()), m);
  for (Eigen::Index c = 0; c < m; ++c) {
    if (cols[static_cast<std::size_t>(c)] >= phi.cols()) {
      throw DimensionError("column_spectrum: column out of range");
    }
    for (std::size_t i = 0; i < phi.rows(); ++i) {
      sub(static_cast<Eigen::Index>(i), c) = phi(i, cols[static_cast<std::size_t>(c)]);
    }
  }
  const Eigen::MatrixXd gram = sub.transpose() * sub;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const auto &lambda = eig.eigenvalues(); // ascending
  SubmatrixSpectrum s;
  s.sigma_min = std::sqrt(std::max(0.0, lambda(0)));
  s.sigma_max = std::sqrt(std::max(0.0, lambda(m - 1)));
  return s;
}

RicEstimate estimate_ric(const DenseMatrix &phi, std::size_t m, std::size_t trials,
                         std::uint64_t seed) {
  if (m < 1 || m > phi.cols()) throw std::invalid_argument("estimate_ric: need 1 <= m <= d");
  if (trials < 1) throw std::invalid_argument("estimate_ric: trials must be >= 1");
  RicEstimate est;
  est.m = m;
  est.trials = trials;
  est.sigma_min = std::numeric_limits<double>::infinity();
  est.sigma_max = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t, hash_tag("ric/subset")));
    const IndexSet cols = rng.sample_without_replacement(phi.cols(), m);
    const auto s = column_spectrum(phi, cols);
    est.sigma_min = std::min(est.sigma_min, s.sigma_min);
    est.sigma_max = std::max(est.sigma_max, s.sigma_max);
  }
  est.eps_lower = std::max({0.0, 1.0 - est.sigma_min, est.sigma_max - 1.0});
  return est;
}

double local_approximation_ratio(const DenseMatrix &phi, const SparseSignal &v,
                                 std::span<const std::size_t> index_set) {
  if (v.dimension() != phi.cols()) throw DimensionError("local_approximation_ratio: dimension");
  const Vector dense = v.to_dense();
  const double v_norm = norm2(dense);
  if (v_norm == 0.0) throw std::invalid_argument("local_approximation_ratio: zero signal");
  const Vector u = mat_t_vec(phi, mat_vec(phi, dense));
  Vector diff;
  diff.reserve(index_set.size());
  for (std::size_t i : index_set) {
    if (i >= phi.cols()) throw DimensionError("local_approximation_ratio: index out of range");
    diff.push_back(u[i] - dense[i]);
  }
  return norm2(diff) / v_norm;
}

LocalApproximationReport check_local_approximation(const DenseMatrix &phi, std::size_t n,
                                                   std::size_t trials, std::uint64_t seed) {
  const std::size_t d = phi.cols();
  if (n < 1 || n > d) throw std::invalid_argument("check_local_approximation: need 1 <= n <= d");
  LocalApproximationReport rep;
  rep.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t, hash_tag("ric/local")));
    IndexSet support = rng.sample_without_replacement(d, n);
    Vector values(n);
    for (double &x : values) {
      do {
        x = rng.normal();
      } while (x == 0.0);
    }
    const SparseSignal v(d, support, std::move(values));
    const std::size_t i_size = 1 + static_cast<std::size_t>(rng.below(n));
    const IndexSet index_set = rng.sample_without_replacement(d, i_size);

    const double ratio = local_approximation_ratio(phi, v, index_set);
    IndexSet gamma = support;
    gamma.insert(gamma.end(), index_set.begin(), index_set.end());
    std::sort(gamma.begin(), gamma.end());
    gamma.erase(std::unique(gamma.begin(), gamma.end()), gamma.end());
    const auto spec = column_spectrum(phi, gamma);
    const double eps = spec.deviation();

    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
    rep.worst_local_eps = std::max(rep.worst_local_eps, eps);
    if (ratio > spec.gram_deviation() * (1.0 + 1e-9) + 1e-12) ++rep.implication_violations;
    if (eps <= 0.03 && ratio > 2.03 * eps * (1.0 + 1e-9) + 1e-12) ++rep.constant_bound_violations;
  }
  return rep;
}

namespace {

// Columns of an orthonormal basis, as produced by the MGS factorization.
std::vector<Vector> orthonormal_basis(const DenseMatrix &phi, std::span<const std::size_t> cols) {
  const QrState qr = qr_of_columns(phi, cols);
  std::vector<Vector> basis;
  for (std::size_t j = 0; j < qr.size(); ++j) {
    const auto q = qr.q_column(j);
    basis.emplace_back(q.begin(), q.end());
  }
  return basis;
}

} // namespace

double projection_norm(const DenseMatrix &phi, std::span<const std::size_t> cols_i,
                       std::span<const std::size_t> cols_j, std::size_t max_iter, double tol) {
  if (cols_i.empty() || cols_j.empty()) return 0.0;
  const auto qi = orthonormal_basis(phi, cols_i);
  const auto qj = orthonormal_basis(phi, cols_j);
  const std::size_t a = qi.size();
  const std::size_t b = qj.size();

  // M = Q_I^T Q_J has the same nonzero singular values as P_I P_J.
  DenseMatrix m(a, b);
  for (std::size_t r = 0; r < a; ++r) {
    for (std::size_t c = 0; c < b; ++c) m(r, c) = dot(qi[r], qj[c]);
  }

  // Power iteration on B = M^T M. B is squared (and rescaled) after every step,
  // so step k applies B^(2^k) and a small spectral gap still converges within
  // the iteration budget. B is at most n x n, so the squaring is cheap.
  DenseMatrix power(b, b);
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t c = 0; c < b; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < a; ++k) s += m(k, r) * m(k, c);
      power(r, c) = s;
    }
  }

  Rng rng(0x5eed'0f'9a11ULL);
  Vector z(b);
  for (double &e : z) e = rng.normal();
  const double z_norm = norm2(z);
  for (double &e : z) e /= z_norm;

  double sigma = norm2(mat_vec(m, z));
  for (std::size_t it = 0; it < max_iter; ++it) {
    Vector w = mat_vec(power, z);
    const double w_norm = norm2(w);
    if (w_norm == 0.0) return 0.0;
    for (std::size_t k = 0; k < b; ++k) z[k] = w[k] / w_norm;
    const double next = norm2(mat_vec(m, z));
    const bool done = std::abs(next - sigma) <= tol * next;
    sigma = next;
    if (done) break;

    DenseMatrix squared(b, b);
    double peak = 0.0;
    for (std::size_t r = 0; r < b; ++r) {
      for (std::size_t c = 0; c < b; ++c) {
        double s = 0.0;
        for (std::size_t k = 0; k < b; ++k) s += power(r, k) * power(k, c);
        squared(r, c) = s;
        peak = std::max(peak, std::abs(s));
      }
    }
    if (peak == 0.0) break;
    for (std::size_t r = 0; r < b; ++r)
      for (std::size_t c = 0; c < b; ++c) squared(r, c) /= peak;
    power = std::move(squared);
  }
  return sigma;
}

ProjectionAngleReport check_projection_angle(const DenseMatrix &phi, std::size_t n,
                                             std::size_t trials, std::uint64_t seed) {
  const std::size_t d = phi.cols();
  if (n < 1 || 2 * n > d) {
    throw std::invalid_argument("check_projection_angle: need 1 <= n and 2n <= d");
  }
  ProjectionAngleReport rep;
  rep.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t, hash_tag("ric/projection")));
    const std::size_t size_i = 1 + static_cast<std::size_t>(rng.below(n));
    const std::size_t size_j = 1 + static_cast<std::size_t>(rng.below(n));
    const IndexSet drawn = rng.sample_without_replacement(d, size_i + size_j);
    const std::span<const std::size_t> all(drawn);
    const auto cols_i = all.first(size_i);
    const auto cols_j = all.subspan(size_i);

    double norm = 0.0;
    try {
      norm = projection_norm(phi, cols_i, cols_j);
    } catch (const RankDeficientError &) {
      ++rep.skipped;
      continue;
    }
    rep.worst_norm = std::max(rep.worst_norm, norm);

    const auto spec = column_spectrum(phi, drawn);
    if (spec.sigma_min > 0.0) {
      const double bound = spec.gram_deviation() / (spec.sigma_min * spec.sigma_min);
      if (norm > bound * (1.0 + 1e-6) + 1e-10) ++rep.implication_violations;
    }
    const double eps = spec.deviation();
    if (eps <= 0.03 && norm > 2.2 * eps * (1.0 + 1e-6) + 1e-10) ++rep.constant_bound_violations;
  }
  return rep;
}

void to_json(nlohmann::json &j, const RicEstimate &e) {
  j = nlohmann::json{{"m", e.m},
                     {"trials", e.trials},
                     {"eps_lower", e.eps_lower},
                     {"sigma_min", e.sigma_min},
                     {"sigma_max", e.sigma_max},
                     {"note", "randomized probe: lower bound on the isometry constant"}};
}

void to_json(nlohmann::json &j, const LocalApproximationReport &r) {
  j = nlohmann::json{{"trials", r.trials},
                     {"worst_ratio", r.worst_ratio},
                     {"worst_local_eps", r.worst_local_eps},
                     {"implication_violations", r.implication_violations},
                     {"constant_bound_violations", r.constant_bound_violations}};
}

void to_json(nlohmann::json &j, const ProjectionAngleReport &r) {
  j = nlohmann::json{{"trials", r.trials},
                     {"skipped", r.skipped},
                     {"worst_norm", r.worst_norm},
                     {"implication_violations", r.implication_violations},
                     {"constant_bound_violations", r.constant_bound_violations}};
}

} // namespace romp
