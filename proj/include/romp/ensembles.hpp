#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "romp/linalg.hpp"

namespace romp {

enum class Ensemble { gaussian, bernoulli, partial_orthogonal };
enum class TransformKind { dct, hadamard };

std::string to_string(Ensemble e);
std::string to_string(TransformKind t);
Ensemble parse_ensemble(std::string_view name);
TransformKind parse_transform(std::string_view name);

/// A random N x d measurement operator with its normalization already applied.
///
/// Subgaussian ensembles are scaled by 1/sqrt(N) so columns have unit expected
/// norm; partial orthogonal ones by sqrt(d/N) so the full N = d case is an
/// exact isometry. Immutable once built.
class MeasurementMatrix {
public:
  MeasurementMatrix(DenseMatrix entries, Ensemble ensemble, std::optional<TransformKind> transform,
                    double scale, IndexSet row_indices, std::uint64_t seed);

  std::size_t measurements() const noexcept { return entries_.rows(); }
  std::size_t dimension() const noexcept { return entries_.cols(); }
  Ensemble ensemble() const noexcept { return ensemble_; }
  std::optional<TransformKind> transform() const noexcept { return transform_; }
  double scale() const noexcept { return scale_; }
  /// Selected rows of the orthogonal transform, ascending (partial_orthogonal only).
  const IndexSet &row_indices() const noexcept { return rows_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const DenseMatrix &dense() const noexcept { return entries_; }

  Vector apply(std::span<const double> v) const { return mat_vec(entries_, v); }
  Vector adjoint(std::span<const double> r) const { return mat_t_vec(entries_, r); }

private:
  DenseMatrix entries_;
  Ensemble ensemble_;
  std::optional<TransformKind> transform_;
  double scale_;
  IndexSet rows_;
  std::uint64_t seed_;
};

MeasurementMatrix gaussian(std::size_t N, std::size_t d, std::uint64_t seed);
MeasurementMatrix bernoulli(std::size_t N, std::size_t d, std::uint64_t seed);
/// N distinct rows of an orthonormal DCT-II or normalized Hadamard matrix.
/// Throws if N > d, or for Hadamard when d is not a power of two.
MeasurementMatrix partial_orthogonal(std::size_t N, std::size_t d, TransformKind kind,
                                     std::uint64_t seed);

/// Dispatches on `ensemble`; `kind` is only consulted for partial_orthogonal.
MeasurementMatrix make_measurement_matrix(Ensemble ensemble, std::size_t N, std::size_t d,
                                          std::uint64_t seed,
                                          TransformKind kind = TransformKind::dct);

/// Entry (row, col) of the orthonormal d x d DCT-II matrix.
double dct_entry(std::size_t row, std::size_t col, std::size_t d);
/// Entry (row, col) of the Sylvester Hadamard matrix divided by sqrt(d).
double hadamard_entry(std::size_t row, std::size_t col, std::size_t d);

/// Heuristic measurement budget from the known RIC results for random ensembles.
///
/// Subgaussian (gaussian, bernoulli):  C n / eps^2 * ln(d / (eps^2 n)).
/// Partial orthogonal:                 C (n ln d / eps^2) ln(n ln d / eps^2) ln^2 d.
///
/// All logarithms are natural. The constant C is not known in closed form and
/// is left to the caller, so treat the result as an order-of-magnitude guide.
/// Requires 0 < epsilon < 1/2, 1 <= n <= d and C > 0; the result is rounded up.
std::size_t suggested_measurements(std::size_t n, std::size_t d, Ensemble ensemble,
                                   double epsilon, double C = 1.0);

} // namespace romp
