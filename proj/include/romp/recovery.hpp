#pragma once

// Greedy sparse recovery: Regularized Orthogonal Matching Pursuit and the
// plain OMP baseline, sharing one traced Identify / select / Update loop.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "romp/ensembles.hpp"
#include "romp/linalg.hpp"
#include "romp/signals.hpp"

namespace romp {

enum class LsStrategy { qr, cgls };
enum class Regularizer { exact_interval, dyadic_bands };
enum class Termination { residual_zero, max_iterations, index_budget, stalled };

std::string to_string(LsStrategy s);
std::string to_string(Regularizer r);
std::string to_string(Termination t);

struct RompOptions {
  /// Iteration cap; 0 means "use the sparsity n".
  std::size_t max_iterations = 0;
  /// ROMP stops once |I| reaches this many indices; 0 means 2n.
  std::size_t index_budget = 0;
  double residual_tol_rel = 1e-6;
  double residual_tol_abs = 1e-12;
  LsStrategy ls_strategy = LsStrategy::qr;
  Regularizer regularizer = Regularizer::exact_interval;
  bool check_invariants = true;
  double cgls_tol = 1e-12;
  std::size_t cgls_max_iter = 500;
};

struct IterationRecord {
  std::size_t iteration = 0;
  /// Identified set, in selection order (descending |u|).
  IndexSet identified;
  /// Regularized subset added to I, ascending.
  IndexSet selected;
  double residual_norm_before = 0.0;
  double residual_norm_after = 0.0;
  /// ||Phi_I^T r|| after the update.
  double orthogonality = 0.0;
  /// Extremes of |u| over the selected set.
  double selected_max = 0.0;
  double selected_min = 0.0;
  /// |selected ∩ supp(v)| / |selected|, when the true signal is known.
  std::optional<double> newly_correct_fraction;
};

struct RecoveryResult {
  /// Selected indices, ascending.
  IndexSet index_set;
  Vector reconstruction;
  std::vector<IterationRecord> trace;
  Termination termination = Termination::stalled;
  /// ||Phi^T x||, the reference scale for orthogonality checks.
  double adjoint_norm = 0.0;
  double final_residual_norm = 0.0;
  /// Runtime invariant failures (empty when everything held).
  std::vector<std::string> violations;
  std::string diagnostic;

  std::size_t iterations() const noexcept { return trace.size(); }
};

/// The n largest-magnitude nonzero coordinates of `u` (fewer if u has fewer
/// nonzeros), in descending magnitude; ties go to the smaller index.
IndexSet identify(std::span<const double> u, std::size_t n);

/// Maximal-energy subset of positions 0..m-1 whose magnitudes are pairwise
/// within a factor of two. Returns positions into `values`, ascending.
///
/// exact_interval scans windows of the decreasing rearrangement with two
/// pointers; on energy ties the window with the larger magnitudes wins.
/// dyadic_bands returns the heaviest band
///   A_k = {i : 2^-k ||u|| < |u_i| <= 2^(1-k) ||u||},  k = 1..ceil(log2 m)+1.
IndexSet regularize(std::span<const double> values, Regularizer mode = Regularizer::exact_interval);

/// Energy ||values|_subset||_2.
double subset_energy(std::span<const double> values, std::span<const std::size_t> subset);

/// ROMP for an n-sparse signal measured as x = Phi v. Passing `truth` fills in
/// newly_correct_fraction on every iteration record.
RecoveryResult romp(const DenseMatrix &phi, std::span<const double> x, std::size_t n,
                    const RompOptions &opts = {}, const SparseSignal *truth = nullptr);
RecoveryResult romp(const MeasurementMatrix &phi, std::span<const double> x, std::size_t n,
                    const RompOptions &opts = {}, const SparseSignal *truth = nullptr);

/// Orthogonal Matching Pursuit: the same loop, one index per iteration.
/// The regularizer option is ignored.
RecoveryResult omp(const DenseMatrix &phi, std::span<const double> x, std::size_t n,
                   const RompOptions &opts = {}, const SparseSignal *truth = nullptr);
RecoveryResult omp(const MeasurementMatrix &phi, std::span<const double> x, std::size_t n,
                   const RompOptions &opts = {}, const SparseSignal *truth = nullptr);

/// Least-squares fit of x on the columns in `index_set`, embedded in R^d.
/// Throws RankDeficientError if those columns are linearly dependent.
Vector reconstruct(const DenseMatrix &phi, std::span<const double> x,
                   std::span<const std::size_t> index_set);

void to_json(nlohmann::json &j, const IterationRecord &rec);
void to_json(nlohmann::json &j, const RecoveryResult &res);

} // namespace romp
