#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "romp/ensembles.hpp"
#include "romp/recovery.hpp"
#include "romp/signals.hpp"

using namespace romp;

namespace {

using oracle::mixed_vector;

bool comparable(std::span<const double> y, const IndexSet &sel) {
  double lo = INFINITY, hi = 0.0;
  for (auto i : sel) {
    lo = std::min(lo, std::abs(y[i]));
    hi = std::max(hi, std::abs(y[i]));
  }
  return hi <= 2.0 * lo;
}

} // namespace

TEST_CASE("identify examples") {
  CHECK(identify(Vector{0, 5, -7, 0}, 2) == IndexSet{2, 1});
  CHECK(identify(Vector{1, 0, 0}, 3) == IndexSet{0});
  CHECK(identify(Vector{3, 3, 3}, 2) == IndexSet{0, 1});
  CHECK(identify(Vector{0, 0, 0}, 2).empty());
  CHECK(identify(Vector{-1, 4, -4, 2}, 3) == IndexSet{1, 2, 3});
}

TEST_CASE("regularize examples") {
  CHECK(regularize(Vector{1, 1, 1, 1}) == IndexSet{0, 1, 2, 3});
  CHECK(regularize(Vector{8, 4, 2, 1}) == IndexSet{0, 1});
  CHECK(regularize(Vector{10, 1}) == IndexSet{0});
  CHECK(regularize(Vector{-3}) == IndexSet{0});
  // order of input positions does not matter
  CHECK(regularize(Vector{1, 2, 8, 4}) == IndexSet{2, 3});
  CHECK(regularize(Vector{8, 4, 2, 1}, Regularizer::dyadic_bands).size() >= 1);
}

TEST_CASE("exact_interval matches brute force for small m") {
  std::mt19937_64 gen(101);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t m = 1 + gen() % 12;
    const Vector y = mixed_vector(m, gen);
    const IndexSet sel = regularize(y);
    CHECK(comparable(y, sel));
    const double got = subset_energy(y, sel);
    const double best = oracle::brute_force_comparable_energy(y);
    CHECK(std::abs(got - best) <= 1e-12 * best);
  }
}

TEST_CASE("regularization energy bound holds in both modes") {
  std::mt19937_64 gen(202);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 2 + gen() % 1023;
    const Vector y = mixed_vector(m, gen);
    const double k0 = std::ceil(std::log2(static_cast<double>(m))) + 1.0;
    const double bound = norm2(y) / std::sqrt(2.0 * k0);
    const IndexSet exact = regularize(y, Regularizer::exact_interval);
    const IndexSet dyadic = regularize(y, Regularizer::dyadic_bands);
    REQUIRE_FALSE(exact.empty());
    REQUIRE_FALSE(dyadic.empty());
    CHECK(comparable(y, exact));
    CHECK(comparable(y, dyadic));
    const double e_exact = subset_energy(y, exact);
    const double e_dyadic = subset_energy(y, dyadic);
    CHECK(e_exact >= bound);
    CHECK(e_dyadic >= bound);
    CHECK(e_exact >= e_dyadic * (1.0 - 1e-12));
  }
}

TEST_CASE("romp on the identity recovers flat signals in one iteration") {
  const auto phi = DenseMatrix::identity(32);
  const auto v = flat_sparse(32, 5, 9);
  const auto x = v.to_dense();
  const auto res = romp::romp(phi, x, 5, {}, &v);
  CHECK(res.termination == Termination::residual_zero);
  CHECK(res.iterations() == 1);
  CHECK(res.index_set == v.support());
  CHECK(res.reconstruction == x);
  CHECK(res.violations.empty());
  REQUIRE(res.trace[0].newly_correct_fraction.has_value());
  CHECK(*res.trace[0].newly_correct_fraction == 1.0);
}

TEST_CASE("zero measurements terminate immediately") {
  const auto phi = gaussian(20, 40, 1);
  const auto res = romp::romp(phi, Vector(20, 0.0), 4);
  CHECK(res.termination == Termination::residual_zero);
  CHECK(res.iterations() == 0);
  CHECK(res.index_set.empty());
  CHECK(res.reconstruction == Vector(40, 0.0));
}

TEST_CASE("omp on the identity takes exactly n steps") {
  const auto phi = DenseMatrix::identity(16);
  const auto one = flat_sparse(16, 1, 4);
  CHECK(omp(phi, one.to_dense(), 1).iterations() == 1);
  const auto v = flat_sparse(16, 6, 4);
  const auto res = omp(phi, v.to_dense(), 6);
  CHECK(res.iterations() == 6);
  CHECK(res.termination == Termination::residual_zero);
  CHECK(res.index_set == v.support());
  for (const auto &rec : res.trace) CHECK(rec.selected.size() == 1);
}

TEST_CASE("reconstruct against the pseudo-inverse oracle") {
  const auto m = gaussian(40, 80, 6);
  const auto v = compressible_sparse(80, 6, 0.6, 6);
  const auto x = m.apply(v.to_dense());

  const Vector exact = reconstruct(m.dense(), x, v.support());
  const auto dense_v = v.to_dense();
  for (std::size_t i = 0; i < 80; ++i) CHECK(std::abs(exact[i] - dense_v[i]) <= 1e-10);

  IndexSet wider = v.support();
  for (std::size_t extra : {0, 7, 33, 79})
    if (std::find(wider.begin(), wider.end(), extra) == wider.end()) wider.push_back(extra);
  std::sort(wider.begin(), wider.end());
  const Vector fit = reconstruct(m.dense(), x, wider);
  const Eigen::MatrixXd sub = oracle::to_eigen(m.dense().select_columns(wider));
  const Eigen::VectorXd ref = oracle::pseudo_inverse_solve(sub, oracle::to_eigen(x));
  for (std::size_t k = 0; k < wider.size(); ++k) {
    CHECK(std::abs(fit[wider[k]] - ref(k)) <= 1e-8);
    CHECK(std::abs(fit[wider[k]] - dense_v[wider[k]]) <= 1e-8);
  }

  CHECK(reconstruct(m.dense(), Vector(40, 0.0), wider) == Vector(80, 0.0));
  const DenseMatrix dup(3, 2, {1, 1, 2, 2, 3, 3});
  const IndexSet both{0, 1};
  CHECK_THROWS_AS(reconstruct(dup, Vector{1, 2, 3}, both), RankDeficientError);
}

TEST_CASE("romp invariants on random instances") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t d = 128, N = 64, n = 1 + seed % 8;
    const auto phi = seed % 2 ? bernoulli(N, d, seed) : gaussian(N, d, seed);
    const auto v = seed % 3 ? flat_sparse(d, n, seed) : compressible_sparse(d, n, 0.5, seed);
    const auto x = phi.apply(v.to_dense());
    const auto res = romp::romp(phi, x, n, {}, &v);
    CHECK(res.violations.empty());
    // the budget is checked after each update, so one overshoot of < n is possible
    CHECK(res.index_set.size() < 3 * n);
    if (res.termination == Termination::residual_zero) CHECK(res.index_set.size() <= 2 * n);
    CHECK(std::is_sorted(res.index_set.begin(), res.index_set.end()));
    std::size_t total = 0;
    double prev = norm2(x);
    IndexSet seen;
    for (const auto &rec : res.trace) {
      CHECK_FALSE(rec.selected.empty());
      CHECK(rec.selected_max <= 2.0 * rec.selected_min);
      CHECK(rec.residual_norm_after <= rec.residual_norm_before * (1 + 1e-12));
      CHECK(rec.residual_norm_before == doctest::Approx(prev));
      CHECK(rec.orthogonality <= 1e-8 * res.adjoint_norm);
      for (auto i : rec.selected) {
        CHECK(std::find(seen.begin(), seen.end(), i) == seen.end());
        CHECK(std::find(rec.identified.begin(), rec.identified.end(), i) != rec.identified.end());
      }
      seen.insert(seen.end(), rec.selected.begin(), rec.selected.end());
      total += rec.selected.size();
      prev = rec.residual_norm_after;
    }
    CHECK(total == res.index_set.size());
    for (std::size_t i = 0; i < d; ++i)
      if (!std::binary_search(res.index_set.begin(), res.index_set.end(), i))
        CHECK(res.reconstruction[i] == 0.0);
    if (res.termination == Termination::residual_zero)
      CHECK(res.final_residual_norm <= 1e-12 + 1e-6 * norm2(x));
  }
}

TEST_CASE("recovery is exact in an easy regime") {
  int recovered = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto phi = gaussian(120, 256, seed);
    const auto v = flat_sparse(256, 4, seed + 100);
    const auto res = romp::romp(phi, phi.apply(v.to_dense()), 4, {}, &v);
    const auto dv = v.to_dense();
    double err = 0.0;
    for (std::size_t i = 0; i < 256; ++i) err = std::max(err, std::abs(res.reconstruction[i] - dv[i]));
    recovered += err <= 1e-6;
  }
  CHECK(recovered == 20);
}

TEST_CASE("rank deficiency stalls with a diagnostic") {
  // columns 0 and 1 are identical; the signal sits on both
  DenseMatrix phi(4, 3, {1, 1, 0, 1, 1, 0, 0, 0, 1, 0, 0, 0});
  const Vector x{2, 2, 0, 0};
  const auto res = romp::romp(phi, x, 2);
  CHECK(res.termination == Termination::stalled);
  CHECK_FALSE(res.diagnostic.empty());
  CHECK(res.index_set == IndexSet{0, 1});
}

TEST_CASE("dimension errors") {
  const auto phi = gaussian(10, 20, 0);
  CHECK_THROWS_AS(romp::romp(phi, Vector(9, 1.0), 2), DimensionError);
  CHECK_THROWS_AS(omp(phi, Vector(11, 1.0), 2), DimensionError);
  CHECK_THROWS(romp::romp(phi, Vector(10, 1.0), 0));
}

TEST_CASE("cgls strategy matches qr") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto phi = gaussian(80, 160, seed);
    const auto v = compressible_sparse(160, 8, 0.7, seed);
    const auto x = phi.apply(v.to_dense());
    RompOptions cg;
    cg.ls_strategy = LsStrategy::cgls;
    const auto a = romp::romp(phi, x, 8);
    const auto b = romp::romp(phi, x, 8, cg);
    CHECK(a.index_set == b.index_set);
    CHECK(a.termination == b.termination);
    for (std::size_t i = 0; i < 160; ++i)
      CHECK(std::abs(a.reconstruction[i] - b.reconstruction[i]) <= 1e-8);
  }
}

TEST_CASE("option limits") {
  const auto phi = gaussian(60, 200, 3);
  const auto v = compressible_sparse(200, 20, 0.3, 3);
  const auto x = phi.apply(v.to_dense());
  RompOptions one;
  one.max_iterations = 1;
  const auto r1 = romp::romp(phi, x, 20, one);
  CHECK(r1.iterations() == 1);
  CHECK(r1.termination == Termination::max_iterations);

  RompOptions budget;
  budget.index_budget = 3;
  const auto r2 = romp::romp(phi, x, 20, budget);
  CHECK(r2.index_set.size() >= 3);
  CHECK(r2.termination == Termination::index_budget);
}

TEST_CASE("result JSON") {
  const auto phi = DenseMatrix::identity(8);
  const auto v = flat_sparse(8, 2, 1);
  const auto res = romp::romp(phi, v.to_dense(), 2, {}, &v);
  const nlohmann::json j = res;
  CHECK(j.at("termination") == "residual_zero");
  CHECK(j.at("I").size() == 2);
  CHECK(j.at("trace").size() == 1);
  CHECK(j.at("trace")[0].at("newly_correct_fraction") == 1.0);
  CHECK(to_string(Regularizer::dyadic_bands) == "dyadic_bands");
}
