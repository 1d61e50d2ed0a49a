#pragma once

// Seeded random streams. The engine is std::mt19937_64, whose output sequence
// is fixed by the standard; every distribution below is implemented here on
// top of raw engine output so the drawn values do not depend on the standard
// library vendor.

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace romp {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// FNV-1a over the bytes of `tag`.
std::uint64_t hash_tag(std::string_view tag) noexcept;

/// Child seed for an independent stream named `tag` under `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on (0, 1].
  double uniform_open0();
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform integer in [0, bound), bound >= 1 (modulo with rejection).
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();
  /// +1 or -1 with equal probability.
  double sign();

  /// First `count` entries of a uniformly random permutation of 0..n-1 (partial
  /// Fisher-Yates). Prefixes are consistent: the first k draws do not depend on count.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count);

private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

} // namespace romp
