#include "romp/recovery.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

namespace romp {

std::string to_string(LsStrategy s) { return s == LsStrategy::qr ? "qr" : "cgls"; }

std::string to_string(Regularizer r) {
  return r == Regularizer::exact_interval ? "exact_interval" : "dyadic_bands";
}

std::string to_string(Termination t) {
  switch (t) {
  case Termination::residual_zero: return "residual_zero";
  case Termination::max_iterations: return "max_iterations";
  case Termination::index_budget: return "index_budget";
  case Termination::stalled: return "stalled";
  }
  return "unknown";
}

IndexSet identify(std::span<const double> u, std::size_t n) {
  if (n < 1) throw std::invalid_argument("identify: n must be >= 1");
  IndexSet nonzero;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i])) throw std::invalid_argument("identify: non-finite observation");
    if (u[i] != 0.0) nonzero.push_back(i);
  }
  const std::size_t take = std::min(n, nonzero.size());
  auto by_magnitude = [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(u[a]);
    const double mb = std::abs(u[b]);
    return ma != mb ? ma > mb : a < b;
  };
  std::partial_sort(nonzero.begin(), nonzero.begin() + static_cast<std::ptrdiff_t>(take),
                    nonzero.end(), by_magnitude);
  nonzero.resize(take);
  return nonzero;
}

double subset_energy(std::span<const double> values, std::span<const std::size_t> subset) {
  Vector picked;
  picked.reserve(subset.size());
  for (std::size_t i : subset) picked.push_back(values[i]);
  return norm2(picked);
}

namespace {

IndexSet regularize_interval(std::span<const double> values) {
  const std::size_t m = values.size();
  IndexSet order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(values[a]) > std::abs(values[b]);
  });
  Vector sorted(m);
  for (std::size_t k = 0; k < m; ++k) sorted[k] = std::abs(values[order[k]]);

  // Suffix sums of squares: a window [a, b] only cancels against entries below
  // half its largest magnitude, which keeps the relative error near m * eps.
  Vector tail(m + 1, 0.0);
  for (std::size_t k = m; k-- > 0;) tail[k] = tail[k + 1] + sorted[k] * sorted[k];

  std::size_t best_a = 0;
  std::size_t best_b = 0;
  double best_energy = -1.0;
  std::size_t b = 0;
  for (std::size_t a = 0; a < m; ++a) {
    b = std::max(b, a);
    while (b + 1 < m && sorted[a] <= 2.0 * sorted[b + 1]) ++b;
    const double energy = tail[a] - tail[b + 1];
    if (energy > best_energy) {
      best_energy = energy;
      best_a = a;
      best_b = b;
    }
  }
  IndexSet chosen(order.begin() + static_cast<std::ptrdiff_t>(best_a),
                  order.begin() + static_cast<std::ptrdiff_t>(best_b + 1));
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

IndexSet regularize_dyadic(std::span<const double> values) {
  const std::size_t m = values.size();
  const double total = norm2(values);
  IndexSet all(m);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (total == 0.0) return all;

  const auto band_count = static_cast<std::size_t>(std::bit_width(m - 1)) + 1;
  std::vector<IndexSet> bands(band_count);
  for (std::size_t i = 0; i < m; ++i) {
    const double mag = std::abs(values[i]);
    std::size_t k = 1;
    while (k <= band_count && !(mag > std::ldexp(total, -static_cast<int>(k)))) ++k;
    if (k <= band_count) bands[k - 1].push_back(i);
  }
  std::size_t best = 0;
  double best_energy = -1.0;
  for (std::size_t k = 0; k < band_count; ++k) {
    const double e = subset_energy(values, bands[k]);
    if (e > best_energy) {
      best_energy = e;
      best = k;
    }
  }
  return bands[best];
}

enum class Selection { regularized, single };

bool contains_sorted(const IndexSet &sorted, std::size_t idx) {
  return std::binary_search(sorted.begin(), sorted.end(), idx);
}

RecoveryResult pursue(const DenseMatrix &phi, std::span<const double> x, std::size_t n,
                      const RompOptions &opts, const SparseSignal *truth, Selection selection) {
  const std::size_t N = phi.rows();
  const std::size_t d = phi.cols();
  if (x.size() != N) {
    throw DimensionError("measurement vector has length " + std::to_string(x.size()) +
                         ", expected " + std::to_string(N));
  }
  if (n < 1) throw std::invalid_argument("sparsity n must be >= 1");
  if (opts.residual_tol_rel < 0.0 || opts.residual_tol_abs < 0.0) {
    throw std::invalid_argument("residual tolerances must be nonnegative");
  }
  if (truth != nullptr && truth->dimension() != d) {
    throw DimensionError("truth signal dimension does not match the matrix");
  }
  const std::size_t max_iterations = opts.max_iterations > 0 ? opts.max_iterations : n;
  const std::size_t budget = opts.index_budget > 0 ? opts.index_budget : 2 * n;

  RecoveryResult res;
  res.reconstruction.assign(d, 0.0);
  res.adjoint_norm = norm2(mat_t_vec(phi, x));

  const double x_norm = norm2(x);
  const double threshold = opts.residual_tol_abs + opts.residual_tol_rel * x_norm;
  Vector r(x.begin(), x.end());
  double r_norm = x_norm;
  res.final_residual_norm = r_norm;
  if (r_norm <= threshold) {
    res.termination = Termination::residual_zero;
    return res;
  }

  IndexSet chosen_sorted; // I, ascending
  IndexSet fitted;        // columns in the least-squares fit, in append order
  QrState qr(N);
  Vector coeffs;

  auto violation = [&](std::size_t it, const std::string &what) {
    res.violations.push_back("iteration " + std::to_string(it) + ": " + what);
  };

  for (std::size_t it = 0;; ++it) {
    if (it == max_iterations) {
      res.termination = Termination::max_iterations;
      break;
    }
    Vector u = mat_t_vec(phi, r);
    // r is orthogonal to range(Phi_I), so u vanishes on I in exact arithmetic.
    for (std::size_t i : chosen_sorted) u[i] = 0.0;

    IndexSet identified = identify(u, selection == Selection::single ? 1 : n);
    if (identified.empty()) {
      res.termination = Termination::stalled;
      res.diagnostic = "observation vector vanished while the residual is nonzero";
      break;
    }

    IndexSet selected;
    if (selection == Selection::single) {
      selected = {identified.front()};
    } else {
      Vector mags(identified.size());
      for (std::size_t k = 0; k < identified.size(); ++k) mags[k] = std::abs(u[identified[k]]);
      for (std::size_t pos : regularize(mags, opts.regularizer)) {
        selected.push_back(identified[pos]);
      }
      std::sort(selected.begin(), selected.end());
    }

    IterationRecord rec;
    rec.iteration = it;
    rec.identified = identified;
    rec.selected = selected;
    rec.residual_norm_before = r_norm;
    rec.selected_max = 0.0;
    rec.selected_min = selected.empty() ? 0.0 : std::abs(u[selected.front()]);
    for (std::size_t i : selected) {
      rec.selected_max = std::max(rec.selected_max, std::abs(u[i]));
      rec.selected_min = std::min(rec.selected_min, std::abs(u[i]));
    }
    if (truth != nullptr && !selected.empty()) {
      std::size_t hits = 0;
      for (std::size_t i : selected) hits += contains_sorted(truth->support(), i) ? 1 : 0;
      rec.newly_correct_fraction =
          static_cast<double>(hits) / static_cast<double>(selected.size());
    }
    if (opts.check_invariants) {
      if (selected.empty()) violation(it, "regularized set is empty");
      for (std::size_t i : selected) {
        if (contains_sorted(chosen_sorted, i)) {
          violation(it, "index " + std::to_string(i) + " selected twice");
        }
      }
      if (rec.selected_max > 2.0 * rec.selected_min) {
        violation(it, "selected magnitudes are not comparable");
      }
    }

    bool rank_failure = false;
    if (opts.ls_strategy == LsStrategy::qr) {
      for (std::size_t j : selected) {
        try {
          qr.append(phi.column(j));
          fitted.push_back(j);
        } catch (const RankDeficientError &e) {
          rank_failure = true;
          res.diagnostic = std::string("rank-deficient column set: ") + e.what();
          break;
        }
      }
      coeffs = qr.empty() ? Vector{} : qr.solve(x);
    } else {
      fitted.insert(fitted.end(), selected.begin(), selected.end());
      if (fitted.size() > N) {
        rank_failure = true;
        res.diagnostic = "more selected columns than measurements";
      }
      const auto cg = solve_ls_cgls(phi, fitted, x, opts.cgls_tol, opts.cgls_max_iter);
      coeffs = cg.solution;
      if (!cg.converged) {
        res.diagnostic = "CGLS hit its iteration cap at |I| = " + std::to_string(fitted.size());
      }
    }
    IndexSet merged;
    std::set_union(chosen_sorted.begin(), chosen_sorted.end(), selected.begin(), selected.end(),
                   std::back_inserter(merged));
    chosen_sorted = std::move(merged);

    const Vector fit = mat_vec_cols(phi, fitted, coeffs);
    for (std::size_t i = 0; i < N; ++i) r[i] = x[i] - fit[i];
    r_norm = norm2(r);
    rec.residual_norm_after = r_norm;
    rec.orthogonality = norm2(mat_t_vec_cols(phi, fitted, r));

    if (opts.check_invariants && !rank_failure) {
      if (r_norm > rec.residual_norm_before * (1.0 + 1e-10) + 1e-14) {
        violation(it, "residual norm increased");
      }
      if (rec.orthogonality > 1e-8 * res.adjoint_norm) {
        violation(it, "residual not orthogonal to the selected columns");
      }
    }
    res.trace.push_back(std::move(rec));

    if (rank_failure) {
      res.termination = Termination::stalled;
      break;
    }
    if (r_norm <= threshold) {
      res.termination = Termination::residual_zero;
      break;
    }
    if (selection == Selection::regularized && chosen_sorted.size() >= budget) {
      res.termination = Termination::index_budget;
      break;
    }
  }

  res.index_set = chosen_sorted;
  res.final_residual_norm = r_norm;
  if (!fitted.empty()) {
    if (opts.ls_strategy == LsStrategy::cgls) {
      try {
        coeffs = qr_of_columns(phi, fitted).solve(x);
      } catch (const RankDeficientError &) {
        // keep the CGLS coefficients
      }
    }
    for (std::size_t k = 0; k < fitted.size(); ++k) res.reconstruction[fitted[k]] = coeffs[k];
  }
  return res;
}

} // namespace

IndexSet regularize(std::span<const double> values, Regularizer mode) {
  if (values.empty()) throw std::invalid_argument("regularize: empty input");
  return mode == Regularizer::exact_interval ? regularize_interval(values)
                                             : regularize_dyadic(values);
}

RecoveryResult romp(const DenseMatrix &phi, std::span<const double> x, std::size_t n,
                    const RompOptions &opts, const SparseSignal *truth) {
  return pursue(phi, x, n, opts, truth, Selection::regularized);
}

RecoveryResult romp(const MeasurementMatrix &phi, std::span<const double> x, std::size_t n,
                    const RompOptions &opts, const SparseSignal *truth) {
  return romp(phi.dense(), x, n, opts, truth);
}

RecoveryResult omp(const DenseMatrix &phi, std::span<const double> x, std::size_t n,
                   const RompOptions &opts, const SparseSignal *truth) {
  return pursue(phi, x, n, opts, truth, Selection::single);
}

RecoveryResult omp(const MeasurementMatrix &phi, std::span<const double> x, std::size_t n,
                   const RompOptions &opts, const SparseSignal *truth) {
  return omp(phi.dense(), x, n, opts, truth);
}

Vector reconstruct(const DenseMatrix &phi, std::span<const double> x,
                   std::span<const std::size_t> index_set) {
  if (x.size() != phi.rows()) throw DimensionError("reconstruct: measurement length mismatch");
  Vector out(phi.cols(), 0.0);
  if (index_set.empty()) return out;
  if (index_set.size() > phi.rows()) {
    throw RankDeficientError("reconstruct: more columns than measurements");
  }
  const Vector y = qr_of_columns(phi, index_set).solve(x);
  for (std::size_t k = 0; k < index_set.size(); ++k) out[index_set[k]] = y[k];
  return out;
}

void to_json(nlohmann::json &j, const IterationRecord &rec) {
  j = nlohmann::json{{"iteration", rec.iteration},
                     {"J", rec.identified},
                     {"J0", rec.selected},
                     {"residual_norm_before", rec.residual_norm_before},
                     {"residual_norm_after", rec.residual_norm_after},
                     {"orthogonality", rec.orthogonality}};
  if (rec.newly_correct_fraction) {
    j["newly_correct_fraction"] = *rec.newly_correct_fraction;
  } else {
    j["newly_correct_fraction"] = nullptr;
  }
}

void to_json(nlohmann::json &j, const RecoveryResult &res) {
  j = nlohmann::json{{"I", res.index_set},
                     {"termination", to_string(res.termination)},
                     {"iterations", res.iterations()},
                     {"trace", res.trace},
                     {"final_residual_norm", res.final_residual_norm},
                     {"violations", res.violations}};
  if (!res.diagnostic.empty()) j["diagnostic"] = res.diagnostic;
}

} // namespace romp
