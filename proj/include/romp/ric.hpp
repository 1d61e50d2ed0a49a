#pragma once

// Empirical Restricted Isometry diagnostics.
//
// Every estimate here probes randomly drawn column subsets, so it yields a
// lower bound on the true isometry constant: no finite number of probes can
// certify the supremum over all subsets.

#include <cstdint>
#include <span>

#include <nlohmann/json_fwd.hpp>

#include "romp/linalg.hpp"
#include "romp/signals.hpp"

namespace romp {

/// Extreme singular values of a column submatrix.
struct SubmatrixSpectrum {
  double sigma_min = 0.0;
  double sigma_max = 0.0;

  /// max(1 - sigma_min, sigma_max - 1): the isometry defect of this submatrix.
  double deviation() const noexcept;
  /// ||Phi_S^T Phi_S - Id||_2 = max(sigma_max^2 - 1, 1 - sigma_min^2).
  double gram_deviation() const noexcept;
};

/// Singular value extremes of the columns `cols` of `phi` (Gram eigensolve).
SubmatrixSpectrum column_spectrum(const DenseMatrix &phi, std::span<const std::size_t> cols);

struct RicEstimate {
  std::size_t m = 0;
  std::size_t trials = 0;
  double eps_lower = 0.0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};

/// Probes `trials` uniformly random m-column submatrices.
///
/// Trial t always draws the first m entries of the same random permutation, so
/// for a fixed seed the probed sets are nested in m and eps_lower is
/// nondecreasing in m (eigenvalue interlacing). sigma_max doubles as the
/// empirical spectral-norm bound ||(Phi^T z)|_I|| <= sigma_max ||z||.
RicEstimate estimate_ric(const DenseMatrix &phi, std::size_t m, std::size_t trials,
                         std::uint64_t seed);

/// ||(Phi^T Phi v)|_I - v|_I|| / ||v||.
double local_approximation_ratio(const DenseMatrix &phi, const SparseSignal &v,
                                 std::span<const std::size_t> index_set);

struct LocalApproximationReport {
  std::size_t trials = 0;
  double worst_ratio = 0.0;
  /// Largest submatrix defect over the probed sets I ∪ supp(v).
  double worst_local_eps = 0.0;
  /// Trials where the ratio exceeded ||Phi_G^T Phi_G - Id|| for G = I ∪ supp(v).
  /// That bound always holds mathematically, so anything nonzero signals a numerical bug.
  std::size_t implication_violations = 0;
  /// Trials with local defect eps <= 0.03 whose ratio exceeded 2.03 eps.
  std::size_t constant_bound_violations = 0;
};

/// Random n-sparse v (Gaussian values) and random I with 1 <= |I| <= n per trial.
LocalApproximationReport check_local_approximation(const DenseMatrix &phi, std::size_t n,
                                                   std::size_t trials, std::uint64_t seed);

/// ||P_I P_J||_2 for the orthogonal projections onto range(Phi_I) and
/// range(Phi_J), by power iteration on the product of orthonormal bases. The
/// iteration matrix is squared after every step to speed up small spectral gaps.
/// Throws RankDeficientError if either column set is dependent.
double projection_norm(const DenseMatrix &phi, std::span<const std::size_t> cols_i,
                       std::span<const std::size_t> cols_j, std::size_t max_iter = 30,
                       double tol = 1e-8);

struct ProjectionAngleReport {
  std::size_t trials = 0;
  std::size_t skipped = 0;
  double worst_norm = 0.0;
  /// Trials where ||P_I P_J|| exceeded ||G - Id|| / sigma_min^2 for G the Gram
  /// matrix of I ∪ J (always true mathematically; nonzero means a numerical problem).
  std::size_t implication_violations = 0;
  /// Trials with defect eps <= 0.03 on I ∪ J whose norm exceeded 2.2 eps.
  std::size_t constant_bound_violations = 0;
};

/// Random disjoint I, J with 1 <= |I|, |J| <= n per trial; rank-deficient
/// draws are skipped and counted.
ProjectionAngleReport check_projection_angle(const DenseMatrix &phi, std::size_t n,
                                             std::size_t trials, std::uint64_t seed);

void to_json(nlohmann::json &j, const RicEstimate &e);
void to_json(nlohmann::json &j, const LocalApproximationReport &r);
void to_json(nlohmann::json &j, const ProjectionAngleReport &r);

} // namespace romp
