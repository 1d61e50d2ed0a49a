#pragma once

// Monte-Carlo recovery experiments: exact-recovery rates over (n, N) grids,
// the 99% recovery boundary, and iteration counts, written as CSV.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "romp/ensembles.hpp"
#include "romp/recovery.hpp"

namespace romp {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

enum class ExperimentKind { recovery_percent, boundary_99, iteration_count };
enum class AlgorithmChoice { romp, omp, both };

std::string to_string(ExperimentKind k);
std::string to_string(AlgorithmChoice a);
ExperimentKind parse_experiment(std::string_view name);
AlgorithmChoice parse_algorithm(std::string_view name);

struct SignalSpec {
  enum class Kind { flat, compressible };
  Kind kind = Kind::flat;
  double p = 0.5;

  /// "flat" or "compressible(<p>)"; this is the CSV signal_kind column.
  std::string label() const;
  /// Accepts "flat", "compressible" (uses `default_p`) and "compressible(<p>)".
  static SignalSpec parse(std::string_view text, double default_p = 0.5);
  bool operator==(const SignalSpec &) const = default;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::recovery_percent;
  std::size_t d = 256;
  std::vector<std::size_t> n_list;
  /// Measurement counts; for boundary_99 this is the search grid and may be
  /// left empty to use multiples of grid_step up to d.
  std::vector<std::size_t> N_list;
  Ensemble ensemble = Ensemble::gaussian;
  TransformKind transform = TransformKind::dct;
  std::vector<SignalSpec> signals{SignalSpec{}};
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  AlgorithmChoice algorithm = AlgorithmChoice::romp;
  std::filesystem::path output;
  std::size_t workers = 1;
  bool matrix_per_trial = false;
  std::size_t grid_step = 4;
  double exact_tol = 1e-6;
  RompOptions romp_options;

  /// Throws std::invalid_argument describing the first bad field.
  void validate() const;
};

/// Standard grids for `kind` (d, n and N lists).
ExperimentConfig default_config(ExperimentKind kind);

/// Overlays the keys present in a TOML document onto `base`.
ExperimentConfig config_from_toml(std::string_view toml_text, ExperimentConfig base);
ExperimentConfig load_config(const std::filesystem::path &path, ExperimentConfig base);

struct ExperimentRow {
  std::size_t d = 0;
  /// Measurement count; -1 marks a boundary search that never reached 99%.
  long long N = 0;
  std::size_t n = 0;
  std::string algorithm;
  std::string signal_kind;
  std::size_t trials = 0;
  double exact_recovery_fraction = 0.0;
  double mean_iterations = 0.0;
  double mean_I_size = 0.0;
  double mean_runtime_ms = 0.0;
};

struct TrialOutcome {
  bool recovered = false;
  std::size_t iterations = 0;
  std::size_t index_set_size = 0;
  double runtime_ms = 0.0;
};

/// Runs every trial of one (N, n, signal) cell for one algorithm, in trial order.
std::vector<TrialOutcome> run_cell(const ExperimentConfig &cfg, std::size_t N, std::size_t n,
                                   const SignalSpec &signal, AlgorithmChoice algorithm);

/// Seeds for cell (N, n) and its trials. Matrices depend on (N, n) only, so every
/// algorithm and signal family in a cell sees the same operator and supports.
std::uint64_t cell_seed(std::uint64_t seed, std::size_t d, std::size_t N, std::size_t n);
std::uint64_t trial_seed(std::uint64_t cell, std::size_t trial);

std::vector<ExperimentRow> run_recovery_percent(const ExperimentConfig &cfg);
std::vector<ExperimentRow> run_boundary_99(const ExperimentConfig &cfg);
std::vector<ExperimentRow> run_iteration_count(const ExperimentConfig &cfg);
std::vector<ExperimentRow> run_experiment(const ExperimentConfig &cfg);

std::string csv_header();
void write_csv(std::ostream &out, const std::vector<ExperimentRow> &rows,
               bool include_runtime = true);
std::string to_csv(const std::vector<ExperimentRow> &rows, bool include_runtime = true);

nlohmann::json summary_json(const ExperimentConfig &cfg, const std::vector<ExperimentRow> &rows);

/// Writes the CSV to cfg.output and the JSON summary next to it (<output>.json).
void write_outputs(const ExperimentConfig &cfg, const std::vector<ExperimentRow> &rows);

void to_json(nlohmann::json &j, const ExperimentConfig &cfg);

} // namespace romp
