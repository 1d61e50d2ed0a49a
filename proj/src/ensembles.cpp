#include "romp/ensembles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "romp/rng.hpp"

namespace romp {

std::string to_string(Ensemble e) {
  switch (e) {
  case Ensemble::gaussian: return "gaussian";
  case Ensemble::bernoulli: return "bernoulli";
  case Ensemble::partial_orthogonal: return "partial_orthogonal";
  }
  return "unknown";
}

std::string to_string(TransformKind t) { return t == TransformKind::dct ? "dct" : "hadamard"; }

Ensemble parse_ensemble(std::string_view name) {
  if (name == "gaussian") return Ensemble::gaussian;
  if (name == "bernoulli") return Ensemble::bernoulli;
  if (name == "partial_orthogonal") return Ensemble::partial_orthogonal;
  throw std::invalid_argument("unknown ensemble: " + std::string(name));
}

TransformKind parse_transform(std::string_view name) {
  if (name == "dct") return TransformKind::dct;
  if (name == "hadamard") return TransformKind::hadamard;
  throw std::invalid_argument("unknown transform: " + std::string(name));
}

MeasurementMatrix::MeasurementMatrix(DenseMatrix entries, Ensemble ensemble,
                                     std::optional<TransformKind> transform, double scale,
                                     IndexSet row_indices, std::uint64_t seed)
    : entries_(std::move(entries)), ensemble_(ensemble), transform_(transform), scale_(scale),
      rows_(std::move(row_indices)), seed_(seed) {}

namespace {

void require_shape(std::size_t N, std::size_t d) {
  if (N < 1 || d < 1) throw std::invalid_argument("measurement matrix needs N >= 1 and d >= 1");
}

} // namespace

MeasurementMatrix gaussian(std::size_t N, std::size_t d, std::uint64_t seed) {
  require_shape(N, d);
  Rng rng(derive_seed(seed, "matrix/gaussian"));
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  std::vector<double> entries(N * d);
  for (double &e : entries) e = rng.normal() * scale;
  return MeasurementMatrix(DenseMatrix(N, d, std::move(entries)), Ensemble::gaussian,
                           std::nullopt, scale, {}, seed);
}

MeasurementMatrix bernoulli(std::size_t N, std::size_t d, std::uint64_t seed) {
  require_shape(N, d);
  Rng rng(derive_seed(seed, "matrix/bernoulli"));
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  std::vector<double> entries(N * d);
  for (double &e : entries) e = rng.sign() * scale;
  return MeasurementMatrix(DenseMatrix(N, d, std::move(entries)), Ensemble::bernoulli,
                           std::nullopt, scale, {}, seed);
}

double dct_entry(std::size_t row, std::size_t col, std::size_t d) {
  const double dd = static_cast<double>(d);
  const double c = row == 0 ? std::sqrt(1.0 / dd) : std::sqrt(2.0 / dd);
  return c * std::cos(std::numbers::pi * (2.0 * static_cast<double>(col) + 1.0) *
                      static_cast<double>(row) / (2.0 * dd));
}

double hadamard_entry(std::size_t row, std::size_t col, std::size_t d) {
  const double mag = 1.0 / std::sqrt(static_cast<double>(d));
  return (std::popcount(row & col) % 2 == 0) ? mag : -mag;
}

MeasurementMatrix partial_orthogonal(std::size_t N, std::size_t d, TransformKind kind,
                                     std::uint64_t seed) {
  require_shape(N, d);
  if (N > d) {
    throw std::invalid_argument("partial_orthogonal: N (" + std::to_string(N) +
                                ") exceeds d (" + std::to_string(d) + ")");
  }
  if (kind == TransformKind::hadamard && !std::has_single_bit(d)) {
    throw std::invalid_argument("partial_orthogonal: Hadamard needs d a power of two, got " +
                                std::to_string(d));
  }
  Rng rng(derive_seed(seed, "matrix/partial_orthogonal"));
  IndexSet rows = rng.sample_without_replacement(d, N);
  std::sort(rows.begin(), rows.end());

  const double scale = std::sqrt(static_cast<double>(d) / static_cast<double>(N));
  std::vector<double> entries(N * d);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double psi =
          kind == TransformKind::dct ? dct_entry(rows[i], j, d) : hadamard_entry(rows[i], j, d);
      entries[i * d + j] = psi * scale;
    }
  }
  return MeasurementMatrix(DenseMatrix(N, d, std::move(entries)), Ensemble::partial_orthogonal,
                           kind, scale, std::move(rows), seed);
}

MeasurementMatrix make_measurement_matrix(Ensemble ensemble, std::size_t N, std::size_t d,
                                          std::uint64_t seed, TransformKind kind) {
  switch (ensemble) {
  case Ensemble::gaussian: return gaussian(N, d, seed);
  case Ensemble::bernoulli: return bernoulli(N, d, seed);
  case Ensemble::partial_orthogonal: return partial_orthogonal(N, d, kind, seed);
  }
  throw std::invalid_argument("make_measurement_matrix: bad ensemble");
}

std::size_t suggested_measurements(std::size_t n, std::size_t d, Ensemble ensemble,
                                   double epsilon, double C) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw std::invalid_argument("suggested_measurements: epsilon must lie in (0, 1/2)");
  }
  if (n < 1 || n > d) throw std::invalid_argument("suggested_measurements: need 1 <= n <= d");
  if (!(C > 0.0) || !std::isfinite(C)) {
    throw std::invalid_argument("suggested_measurements: C must be positive");
  }
  const double nn = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  const double eps2 = epsilon * epsilon;

  double bound = 0.0;
  if (ensemble == Ensemble::partial_orthogonal) {
    const double logd = std::log(dd);
    const double base = nn * logd / eps2;
    bound = base > 0.0 ? C * base * std::log(base) * logd * logd : 0.0;
  } else {
    bound = C * nn / eps2 * std::log(dd / (eps2 * nn));
  }
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(bound)));
}

} // namespace romp
