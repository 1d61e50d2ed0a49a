// romp-kit: command-line front end for the recovery experiments and the
// isometry diagnostics.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "romp/ensembles.hpp"
#include "romp/harness.hpp"
#include "romp/ric.hpp"

namespace {

// Expands "a:b:step" tokens into a <= v <= b ranges; other tokens are plain counts.
std::vector<std::size_t> expand_counts(const std::vector<std::string> &tokens) {
  std::vector<std::size_t> out;
  for (const auto &tok : tokens) {
    const auto first = tok.find(':');
    if (first == std::string::npos) {
      out.push_back(std::stoul(tok));
      continue;
    }
    const auto second = tok.find(':', first + 1);
    const std::size_t lo = std::stoul(tok.substr(0, first));
    const std::size_t hi = std::stoul(tok.substr(first + 1, second - first - 1));
    const std::size_t step = second == std::string::npos ? 1 : std::stoul(tok.substr(second + 1));
    if (step == 0) throw std::invalid_argument("range step must be positive: " + tok);
    for (std::size_t v = lo; v <= hi; v += step) out.push_back(v);
  }
  return out;
}

struct RunFlags {
  std::string experiment;
  std::string config;
  std::size_t d = 0;
  std::vector<std::string> n_tokens;
  std::vector<std::string> N_tokens;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::string ensemble;
  std::string transform;
  std::vector<std::string> signals;
  double p = 0.5;
  std::string algo;
  std::string out;
  std::size_t workers = 0;
  std::size_t grid_step = 0;
  std::string ls;
  std::string regularizer;
  bool matrix_per_trial = false;
};

int run_command(const RunFlags &f, const CLI::App &cmd) {
  using namespace romp;
  ExperimentConfig cfg = default_config(parse_experiment(f.experiment));
  if (!f.config.empty()) {
    cfg = load_config(f.config, cfg);
    if (to_string(cfg.experiment) != f.experiment) {
      throw std::invalid_argument("config file names experiment '" + to_string(cfg.experiment) +
                                  "' but '" + f.experiment + "' was requested");
    }
  }
  auto given = [&](const char *name) { return cmd.count(name) > 0; };
  if (given("--d")) cfg.d = f.d;
  if (given("--n")) cfg.n_list = expand_counts(f.n_tokens);
  if (given("--N")) cfg.N_list = expand_counts(f.N_tokens);
  if (given("--trials")) cfg.trials = f.trials;
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--ensemble")) cfg.ensemble = parse_ensemble(f.ensemble);
  if (given("--transform")) cfg.transform = parse_transform(f.transform);
  if (given("--signal")) {
    cfg.signals.clear();
    for (const auto &s : f.signals) cfg.signals.push_back(SignalSpec::parse(s, f.p));
  } else if (given("--p")) {
    for (auto &s : cfg.signals) s.p = f.p;
  }
  if (given("--algo")) cfg.algorithm = parse_algorithm(f.algo);
  if (given("--out")) cfg.output = f.out;
  if (given("--workers")) cfg.workers = f.workers;
  if (given("--grid-step")) cfg.grid_step = f.grid_step;
  if (given("--matrix-per-trial")) cfg.matrix_per_trial = f.matrix_per_trial;
  if (given("--ls")) {
    cfg.romp_options.ls_strategy = f.ls == "cgls" ? LsStrategy::cgls : LsStrategy::qr;
  }
  if (given("--regularizer")) {
    cfg.romp_options.regularizer =
        f.regularizer == "dyadic_bands" ? Regularizer::dyadic_bands : Regularizer::exact_interval;
  }
  if (cfg.output.empty()) cfg.output = f.experiment + ".csv";
  cfg.validate();

  const auto rows = run_experiment(cfg);
  write_outputs(cfg, rows);
  write_csv(std::cout, rows);
  std::cerr << "wrote " << cfg.output.string() << " (" << rows.size() << " rows)\n";
  return 0;
}

struct RicFlags {
  std::string ensemble = "gaussian";
  std::string transform = "dct";
  std::size_t N = 200;
  std::size_t d = 400;
  std::size_t m = 5;
  std::size_t trials = 500;
  std::uint64_t seed = 0;
};

int ric_command(const RicFlags &f) {
  using namespace romp;
  const auto phi =
      make_measurement_matrix(parse_ensemble(f.ensemble), f.N, f.d, f.seed, parse_transform(f.transform));
  nlohmann::json report;
  report["matrix"] = {{"ensemble", f.ensemble}, {"N", f.N}, {"d", f.d}, {"seed", f.seed}};
  report["ric"] = estimate_ric(phi.dense(), f.m, f.trials, f.seed);
  report["local_approximation"] = check_local_approximation(phi.dense(), f.m, f.trials, f.seed);
  if (2 * f.m <= f.d) {
    report["projection_angle"] = check_projection_angle(phi.dense(), f.m, f.trials, f.seed);
  }
  std::cout << report.dump(2) << '\n';
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"romp-kit: regularized orthogonal matching pursuit experiments"};
  app.require_subcommand(1);

  RunFlags rf;
  auto *run = app.add_subcommand("run", "run a Monte-Carlo recovery experiment");
  run->add_option("experiment", rf.experiment, "recovery_percent | boundary_99 | iteration_count")
      ->required()
      ->check(CLI::IsMember({"recovery_percent", "boundary_99", "iteration_count"}));
  run->add_option("--config", rf.config, "TOML file with ExperimentConfig fields")
      ->check(CLI::ExistingFile);
  run->add_option("--d", rf.d, "ambient dimension");
  run->add_option("--n", rf.n_tokens, "sparsity levels (list; a:b:step ranges allowed)")
      ->delimiter(',');
  run->add_option("--N", rf.N_tokens, "measurement counts (list; a:b:step ranges allowed)")
      ->delimiter(',');
  run->add_option("--trials", rf.trials, "trials per cell");
  run->add_option("--seed", rf.seed, "master seed");
  run->add_option("--ensemble", rf.ensemble, "gaussian | bernoulli | partial_orthogonal");
  run->add_option("--transform", rf.transform, "dct | hadamard (partial_orthogonal only)");
  run->add_option("--signal", rf.signals, "flat | compressible | compressible(<p>)")
      ->delimiter(',');
  run->add_option("--p", rf.p, "decay exponent for compressible signals");
  run->add_option("--algo", rf.algo, "romp | omp | both")
      ->check(CLI::IsMember({"romp", "omp", "both"}));
  run->add_option("--out", rf.out, "CSV output path (JSON summary goes to <out>.json)");
  run->add_option("--workers", rf.workers, "worker threads per cell")->check(CLI::PositiveNumber);
  run->add_option("--grid-step", rf.grid_step, "N grid step for boundary_99");
  run->add_option("--ls", rf.ls, "qr | cgls")->check(CLI::IsMember({"qr", "cgls"}));
  run->add_option("--regularizer", rf.regularizer, "exact_interval | dyadic_bands")
      ->check(CLI::IsMember({"exact_interval", "dyadic_bands"}));
  run->add_flag("--matrix-per-trial", rf.matrix_per_trial,
                "draw a fresh matrix for every trial instead of one per cell");

  RicFlags icf;
  auto *ric = app.add_subcommand("ric", "empirical isometry diagnostics as JSON");
  ric->add_option("--ensemble", icf.ensemble, "gaussian | bernoulli | partial_orthogonal");
  ric->add_option("--transform", icf.transform, "dct | hadamard");
  ric->add_option("--N", icf.N, "measurements");
  ric->add_option("--d", icf.d, "dimension");
  ric->add_option("--m", icf.m, "sparsity level probed");
  ric->add_option("--trials", icf.trials, "random probes");
  ric->add_option("--seed", icf.seed, "seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(rf, *run);
    if (ric->parsed()) return ric_command(icf);
  } catch (const std::exception &e) {
    std::cerr << "romp-kit: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
