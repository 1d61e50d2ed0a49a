#pragma once

#include <cstdint>
#include <span>

#include <nlohmann/json_fwd.hpp>

#include "romp/linalg.hpp"

namespace romp {

/// Exactly sparse vector in R^d: strictly increasing support, nonzero values.
class SparseSignal {
public:
  SparseSignal() = default;
  explicit SparseSignal(std::size_t d) : d_(d) {}
  /// Validates the invariants; `support` need not be sorted on input.
  SparseSignal(std::size_t d, IndexSet support, Vector values);

  static SparseSignal from_dense(std::span<const double> dense);

  std::size_t dimension() const noexcept { return d_; }
  std::size_t sparsity() const noexcept { return support_.size(); }
  const IndexSet &support() const noexcept { return support_; }
  const Vector &values() const noexcept { return values_; }

  Vector to_dense() const;

  bool operator==(const SparseSignal &) const = default;

private:
  std::size_t d_ = 0;
  IndexSet support_;
  Vector values_;
};

/// Which support position receives the i-th decaying magnitude.
enum class MagnitudeOrder {
  draw,   // i-th index drawn
  sorted, // i-th smallest index
};

/// n ones on a uniformly random support.
SparseSignal flat_sparse(std::size_t d, std::size_t n, std::uint64_t seed);

/// Random support; the i-th component (i = 1..n) gets magnitude i^(-1/p) and a
/// uniform random sign. Requires 0 < p < 1.
SparseSignal compressible_sparse(std::size_t d, std::size_t n, double p, std::uint64_t seed,
                                 MagnitudeOrder order = MagnitudeOrder::draw);

/// Zeroes every component whose index is not in `keep`.
SparseSignal restrict(const SparseSignal &v, std::span<const std::size_t> keep);

void to_json(nlohmann::json &j, const SparseSignal &v);
void from_json(const nlohmann::json &j, SparseSignal &v);

} // namespace romp
