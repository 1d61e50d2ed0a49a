#include "romp/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "romp/rng.hpp"

namespace romp {

SparseSignal::SparseSignal(std::size_t d, IndexSet support, Vector values) : d_(d) {
  if (support.size() != values.size()) {
    throw std::invalid_argument("SparseSignal: support and values differ in length");
  }
  std::vector<std::size_t> order(support.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });
  support_.reserve(support.size());
  values_.reserve(values.size());
  for (std::size_t k : order) {
    if (support[k] >= d) throw std::invalid_argument("SparseSignal: index outside 0..d-1");
    if (!support_.empty() && support_.back() == support[k]) {
      throw std::invalid_argument("SparseSignal: duplicate support index");
    }
    if (values[k] == 0.0 || !std::isfinite(values[k])) {
      throw std::invalid_argument("SparseSignal: values must be finite and nonzero");
    }
    support_.push_back(support[k]);
    values_.push_back(values[k]);
  }
}

SparseSignal SparseSignal::from_dense(std::span<const double> dense) {
  IndexSet support;
  Vector values;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) {
      support.push_back(i);
      values.push_back(dense[i]);
    }
  }
  return SparseSignal(dense.size(), std::move(support), std::move(values));
}

Vector SparseSignal::to_dense() const {
  Vector out(d_, 0.0);
  for (std::size_t k = 0; k < support_.size(); ++k) out[support_[k]] = values_[k];
  return out;
}

namespace {

void require_sparsity(std::size_t d, std::size_t n) {
  if (n < 1 || n > d) {
    throw std::invalid_argument("signal sparsity must satisfy 1 <= n <= d (n=" +
                                std::to_string(n) + ", d=" + std::to_string(d) + ")");
  }
}

} // namespace

SparseSignal flat_sparse(std::size_t d, std::size_t n, std::uint64_t seed) {
  require_sparsity(d, n);
  Rng rng(derive_seed(seed, "signal/support"));
  IndexSet support = rng.sample_without_replacement(d, n);
  return SparseSignal(d, std::move(support), Vector(n, 1.0));
}

SparseSignal compressible_sparse(std::size_t d, std::size_t n, double p, std::uint64_t seed,
                                 MagnitudeOrder order) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("compressible_sparse: p must lie in (0, 1)");
  require_sparsity(d, n);
  Rng support_rng(derive_seed(seed, "signal/support"));
  Rng sign_rng(derive_seed(seed, "signal/sign"));
  IndexSet support = support_rng.sample_without_replacement(d, n);
  if (order == MagnitudeOrder::sorted) std::sort(support.begin(), support.end());

  Vector values(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double magnitude = std::pow(static_cast<double>(i + 1), -1.0 / p);
    values[i] = sign_rng.sign() * magnitude;
  }
  return SparseSignal(d, std::move(support), std::move(values));
}

SparseSignal restrict(const SparseSignal &v, std::span<const std::size_t> keep) {
  IndexSet sorted_keep(keep.begin(), keep.end());
  std::sort(sorted_keep.begin(), sorted_keep.end());
  IndexSet support;
  Vector values;
  for (std::size_t k = 0; k < v.support().size(); ++k) {
    if (std::binary_search(sorted_keep.begin(), sorted_keep.end(), v.support()[k])) {
      support.push_back(v.support()[k]);
      values.push_back(v.values()[k]);
    }
  }
  return SparseSignal(v.dimension(), std::move(support), std::move(values));
}

void to_json(nlohmann::json &j, const SparseSignal &v) {
  j = nlohmann::json{{"d", v.dimension()}, {"support", v.support()}, {"values", v.values()}};
}

void from_json(const nlohmann::json &j, SparseSignal &v) {
  v = SparseSignal(j.at("d").get<std::size_t>(), j.at("support").get<IndexSet>(),
                   j.at("values").get<Vector>());
}

} // namespace romp
