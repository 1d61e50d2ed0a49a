#include "romp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "romp/rng.hpp"
#include "romp/signals.hpp"

namespace romp {

std::string to_string(ExperimentKind k) {
  switch (k) {
  case ExperimentKind::recovery_percent: return "recovery_percent";
  case ExperimentKind::boundary_99: return "boundary_99";
  case ExperimentKind::iteration_count: return "iteration_count";
  }
  return "unknown";
}

std::string to_string(AlgorithmChoice a) {
  switch (a) {
  case AlgorithmChoice::romp: return "romp";
  case AlgorithmChoice::omp: return "omp";
  case AlgorithmChoice::both: return "both";
  }
  return "unknown";
}

ExperimentKind parse_experiment(std::string_view name) {
  if (name == "recovery_percent") return ExperimentKind::recovery_percent;
  if (name == "boundary_99") return ExperimentKind::boundary_99;
  if (name == "iteration_count") return ExperimentKind::iteration_count;
  throw std::invalid_argument("unknown experiment: " + std::string(name));
}

AlgorithmChoice parse_algorithm(std::string_view name) {
  if (name == "romp") return AlgorithmChoice::romp;
  if (name == "omp") return AlgorithmChoice::omp;
  if (name == "both") return AlgorithmChoice::both;
  throw std::invalid_argument("unknown algorithm: " + std::string(name));
}

namespace {

LsStrategy parse_ls(std::string_view name) {
  if (name == "qr") return LsStrategy::qr;
  if (name == "cgls") return LsStrategy::cgls;
  throw std::invalid_argument("unknown least-squares strategy: " + std::string(name));
}

Regularizer parse_regularizer(std::string_view name) {
  if (name == "exact_interval") return Regularizer::exact_interval;
  if (name == "dyadic_bands") return Regularizer::dyadic_bands;
  throw std::invalid_argument("unknown regularizer: " + std::string(name));
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

} // namespace

std::string SignalSpec::label() const {
  if (kind == Kind::flat) return "flat";
  return "compressible(" + format_number(p) + ")";
}

SignalSpec SignalSpec::parse(std::string_view text, double default_p) {
  if (text == "flat") return {};
  SignalSpec s;
  s.kind = Kind::compressible;
  s.p = default_p;
  constexpr std::string_view prefix = "compressible";
  if (text.substr(0, prefix.size()) != prefix) {
    throw std::invalid_argument("unknown signal kind: " + std::string(text));
  }
  std::string_view rest = text.substr(prefix.size());
  if (!rest.empty()) {
    if (rest.front() != '(' || rest.back() != ')') {
      throw std::invalid_argument("malformed signal kind: " + std::string(text));
    }
    const std::string inner(rest.substr(1, rest.size() - 2));
    std::size_t used = 0;
    s.p = std::stod(inner, &used);
    if (used != inner.size()) throw std::invalid_argument("malformed p in: " + std::string(text));
  }
  if (!(s.p > 0.0 && s.p < 1.0)) {
    throw std::invalid_argument("compressible signals need 0 < p < 1: " + std::string(text));
  }
  return s;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string &msg) { throw std::invalid_argument("config: " + msg); };
  if (d < 1) fail("d must be positive");
  if (trials < 1) fail("trials must be positive");
  if (workers < 1) fail("workers must be positive");
  if (grid_step < 1) fail("grid_step must be positive");
  if (n_list.empty()) fail("n_list is empty");
  if (signals.empty()) fail("no signal kind given");
  if (!(exact_tol > 0.0)) fail("exact_tol must be positive");
  for (std::size_t n : n_list) {
    if (n < 1 || n > d) fail("every n must satisfy 1 <= n <= d");
  }
  if (experiment != ExperimentKind::boundary_99 && N_list.empty()) fail("N_list is empty");
  for (std::size_t N : N_list) {
    if (N < 1) fail("every N must be positive");
    if (ensemble == Ensemble::partial_orthogonal && N > d) {
      fail("partial_orthogonal needs N <= d");
    }
  }
  for (const auto &s : signals) {
    if (s.kind == SignalSpec::Kind::compressible && !(s.p > 0.0 && s.p < 1.0)) {
      fail("compressible signals need 0 < p < 1");
    }
  }
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.experiment = kind;
  switch (kind) {
  case ExperimentKind::recovery_percent:
    cfg.d = 256;
    cfg.n_list = {4, 12, 20, 28, 36};
    for (std::size_t N = 16; N <= 256; N += 16) cfg.N_list.push_back(N);
    break;
  case ExperimentKind::boundary_99:
    cfg.d = 256;
    for (std::size_t n = 1; n <= 33; n += 4) cfg.n_list.push_back(n);
    break;
  case ExperimentKind::iteration_count:
    cfg.d = 10000;
    cfg.N_list = {200};
    cfg.n_list = {1, 4, 8, 12, 16, 20, 24, 28, 32, 36, 40};
    break;
  }
  return cfg;
}

namespace {

std::vector<std::size_t> read_counts(const toml::node &node, const std::string &key) {
  std::vector<std::size_t> out;
  auto push = [&](const toml::node &n) {
    const auto v = n.value<std::int64_t>();
    if (!v || *v < 0) throw std::invalid_argument("config: " + key + " needs nonnegative integers");
    out.push_back(static_cast<std::size_t>(*v));
  };
  if (const auto *arr = node.as_array()) {
    for (const auto &el : *arr) push(el);
  } else {
    push(node);
  }
  return out;
}

template <typename T> T require_value(const toml::node &node, const std::string &key) {
  const auto v = node.value<T>();
  if (!v) throw std::invalid_argument("config: wrong type for key '" + key + "'");
  return *v;
}

std::size_t require_count(const toml::node &node, const std::string &key) {
  const auto v = require_value<std::int64_t>(node, key);
  if (v < 0) throw std::invalid_argument("config: '" + key + "' must be nonnegative");
  return static_cast<std::size_t>(v);
}

} // namespace

ExperimentConfig config_from_toml(std::string_view toml_text, ExperimentConfig cfg) {
  toml::table table;
  try {
    table = toml::parse(toml_text);
  } catch (const toml::parse_error &e) {
    throw std::invalid_argument(std::string("config: TOML parse error: ") +
                                std::string(e.description()));
  }

  std::optional<double> p;
  if (const auto *node = table.get("p")) p = require_value<double>(*node, "p");
  const double default_p = p.value_or(0.5);

  for (const auto &[key_node, node] : table) {
    const std::string key(key_node.str());
    if (key == "experiment") {
      cfg.experiment = parse_experiment(require_value<std::string>(node, key));
    } else if (key == "d") {
      cfg.d = require_count(node, key);
    } else if (key == "n_list") {
      cfg.n_list = read_counts(node, key);
    } else if (key == "N_list") {
      cfg.N_list = read_counts(node, key);
    } else if (key == "ensemble") {
      cfg.ensemble = parse_ensemble(require_value<std::string>(node, key));
    } else if (key == "transform_kind") {
      cfg.transform = parse_transform(require_value<std::string>(node, key));
    } else if (key == "signal_kind") {
      cfg.signals.clear();
      if (const auto *arr = node.as_array()) {
        for (const auto &el : *arr) {
          cfg.signals.push_back(SignalSpec::parse(require_value<std::string>(el, key), default_p));
        }
      } else {
        cfg.signals.push_back(SignalSpec::parse(require_value<std::string>(node, key), default_p));
      }
    } else if (key == "p") {
      // consumed above
    } else if (key == "trials") {
      cfg.trials = require_count(node, key);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(require_value<std::int64_t>(node, key));
    } else if (key == "algorithm") {
      cfg.algorithm = parse_algorithm(require_value<std::string>(node, key));
    } else if (key == "output") {
      cfg.output = require_value<std::string>(node, key);
    } else if (key == "workers") {
      cfg.workers = require_count(node, key);
    } else if (key == "matrix_per_trial") {
      cfg.matrix_per_trial = require_value<bool>(node, key);
    } else if (key == "grid_step") {
      cfg.grid_step = require_count(node, key);
    } else if (key == "exact_tol") {
      cfg.exact_tol = require_value<double>(node, key);
    } else if (key == "ls_strategy") {
      cfg.romp_options.ls_strategy = parse_ls(require_value<std::string>(node, key));
    } else if (key == "regularizer") {
      cfg.romp_options.regularizer = parse_regularizer(require_value<std::string>(node, key));
    } else if (key == "max_iterations") {
      cfg.romp_options.max_iterations = require_count(node, key);
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path &path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_toml(buf.str(), std::move(base));
}

std::uint64_t cell_seed(std::uint64_t seed, std::size_t d, std::size_t N, std::size_t n) {
  return derive_seed(seed, (static_cast<std::uint64_t>(N) << 32) ^ n, d);
}

std::uint64_t trial_seed(std::uint64_t cell, std::size_t trial) {
  return derive_seed(cell, trial, hash_tag("trial"));
}

namespace {

template <typename Fn> void parallel_for(std::size_t count, std::size_t workers, Fn &&fn) {
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

SparseSignal make_signal(const SignalSpec &spec, std::size_t d, std::size_t n, std::uint64_t seed) {
  return spec.kind == SignalSpec::Kind::flat ? flat_sparse(d, n, seed)
                                             : compressible_sparse(d, n, spec.p, seed);
}

TrialOutcome run_trial(const DenseMatrix &phi, const SparseSignal &v, std::size_t n,
                       AlgorithmChoice algorithm, const ExperimentConfig &cfg) {
  const Vector x = mat_vec(phi, v.to_dense());
  const auto start = std::chrono::steady_clock::now();
  const RecoveryResult res = algorithm == AlgorithmChoice::omp
                                 ? omp(phi, x, n, cfg.romp_options)
                                 : romp(phi, x, n, cfg.romp_options);
  const auto stop = std::chrono::steady_clock::now();

  const Vector truth = v.to_dense();
  double err = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    err = std::max(err, std::abs(res.reconstruction[i] - truth[i]));
  }
  TrialOutcome out;
  out.recovered = err <= cfg.exact_tol;
  out.iterations = res.iterations();
  out.index_set_size = res.index_set.size();
  out.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return out;
}

ExperimentRow summarize(const ExperimentConfig &cfg, std::size_t N, std::size_t n,
                        const SignalSpec &signal, AlgorithmChoice algorithm,
                        const std::vector<TrialOutcome> &outcomes) {
  ExperimentRow row;
  row.d = cfg.d;
  row.N = static_cast<long long>(N);
  row.n = n;
  row.algorithm = to_string(algorithm);
  row.signal_kind = signal.label();
  row.trials = outcomes.size();
  std::size_t hits = 0;
  double iters = 0.0;
  double sizes = 0.0;
  double runtime = 0.0;
  for (const auto &o : outcomes) {
    hits += o.recovered ? 1 : 0;
    iters += static_cast<double>(o.iterations);
    sizes += static_cast<double>(o.index_set_size);
    runtime += o.runtime_ms;
  }
  const double t = static_cast<double>(outcomes.size());
  row.exact_recovery_fraction = static_cast<double>(hits) / t;
  row.mean_iterations = iters / t;
  row.mean_I_size = sizes / t;
  row.mean_runtime_ms = runtime / t;
  return row;
}

std::vector<AlgorithmChoice> algorithms_of(AlgorithmChoice choice) {
  if (choice == AlgorithmChoice::both) return {AlgorithmChoice::romp, AlgorithmChoice::omp};
  return {choice};
}

std::vector<ExperimentRow> run_grid(const ExperimentConfig &cfg) {
  cfg.validate();
  std::vector<ExperimentRow> rows;
  for (std::size_t n : cfg.n_list) {
    for (std::size_t N : cfg.N_list) {
      for (const auto &signal : cfg.signals) {
        for (auto algo : algorithms_of(cfg.algorithm)) {
          rows.push_back(summarize(cfg, N, n, signal, algo, run_cell(cfg, N, n, signal, algo)));
        }
      }
    }
  }
  return rows;
}

} // namespace

std::vector<TrialOutcome> run_cell(const ExperimentConfig &cfg, std::size_t N, std::size_t n,
                                   const SignalSpec &signal, AlgorithmChoice algorithm) {
  if (algorithm == AlgorithmChoice::both) {
    throw std::invalid_argument("run_cell: pick a single algorithm");
  }
  const std::uint64_t cell = cell_seed(cfg.seed, cfg.d, N, n);
  std::optional<MeasurementMatrix> shared;
  if (!cfg.matrix_per_trial) {
    shared.emplace(make_measurement_matrix(cfg.ensemble, N, cfg.d, derive_seed(cell, "matrix"),
                                           cfg.transform));
  }
  std::vector<TrialOutcome> outcomes(cfg.trials);
  parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) {
    const std::uint64_t ts = trial_seed(cell, t);
    const SparseSignal v = make_signal(signal, cfg.d, n, derive_seed(ts, "signal"));
    if (shared) {
      outcomes[t] = run_trial(shared->dense(), v, n, algorithm, cfg);
    } else {
      const auto phi = make_measurement_matrix(cfg.ensemble, N, cfg.d,
                                               derive_seed(ts, "matrix"), cfg.transform);
      outcomes[t] = run_trial(phi.dense(), v, n, algorithm, cfg);
    }
  });
  return outcomes;
}

std::vector<ExperimentRow> run_recovery_percent(const ExperimentConfig &cfg) {
  return run_grid(cfg);
}

std::vector<ExperimentRow> run_iteration_count(const ExperimentConfig &cfg) {
  return run_grid(cfg);
}

std::vector<ExperimentRow> run_boundary_99(const ExperimentConfig &cfg) {
  cfg.validate();
  std::vector<std::size_t> grid = cfg.N_list;
  if (grid.empty()) {
    for (std::size_t N = cfg.grid_step; N <= cfg.d; N += cfg.grid_step) grid.push_back(N);
    if (grid.empty() || grid.back() != cfg.d) grid.push_back(cfg.d);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  constexpr double kTarget = 0.99;
  std::vector<ExperimentRow> rows;
  for (std::size_t n : cfg.n_list) {
    for (const auto &signal : cfg.signals) {
      for (auto algo : algorithms_of(cfg.algorithm)) {
        std::map<std::size_t, ExperimentRow> cache;
        auto evaluate = [&](std::size_t k) -> const ExperimentRow & {
          auto it = cache.find(k);
          if (it == cache.end()) {
            const std::size_t N = grid[k];
            it = cache.emplace(k, summarize(cfg, N, n, signal, algo,
                                            run_cell(cfg, N, n, signal, algo)))
                     .first;
          }
          return it->second;
        };
        std::size_t lo = 0;
        std::size_t hi = grid.size() - 1;
        if (evaluate(hi).exact_recovery_fraction < kTarget) {
          ExperimentRow sentinel = evaluate(hi);
          sentinel.N = -1;
          rows.push_back(sentinel);
          continue;
        }
        while (lo < hi) {
          const std::size_t mid = lo + (hi - lo) / 2;
          if (evaluate(mid).exact_recovery_fraction >= kTarget) {
            hi = mid;
          } else {
            lo = mid + 1;
          }
        }
        rows.push_back(evaluate(hi));
      }
    }
  }
  return rows;
}

std::vector<ExperimentRow> run_experiment(const ExperimentConfig &cfg) {
  switch (cfg.experiment) {
  case ExperimentKind::recovery_percent: return run_recovery_percent(cfg);
  case ExperimentKind::boundary_99: return run_boundary_99(cfg);
  case ExperimentKind::iteration_count: return run_iteration_count(cfg);
  }
  throw std::invalid_argument("run_experiment: bad experiment kind");
}

std::string csv_header() {
  return "d,N,n,algorithm,signal_kind,trials,exact_recovery_fraction,mean_iterations,"
         "mean_I_size,mean_runtime_ms";
}

void write_csv(std::ostream &out, const std::vector<ExperimentRow> &rows, bool include_runtime) {
  std::string header = csv_header();
  if (!include_runtime) header.resize(header.rfind(','));
  out << header << '\n';
  for (const auto &r : rows) {
    out << r.d << ',' << r.N << ',' << r.n << ',' << r.algorithm << ',' << r.signal_kind << ','
        << r.trials << ',' << format_number(r.exact_recovery_fraction) << ','
        << format_number(r.mean_iterations) << ',' << format_number(r.mean_I_size);
    if (include_runtime) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", r.mean_runtime_ms);
      out << ',' << buf;
    }
    out << '\n';
  }
}

std::string to_csv(const std::vector<ExperimentRow> &rows, bool include_runtime) {
  std::ostringstream os;
  write_csv(os, rows, include_runtime);
  return os.str();
}

void to_json(nlohmann::json &j, const ExperimentConfig &cfg) {
  std::vector<std::string> signals;
  for (const auto &s : cfg.signals) signals.push_back(s.label());
  j = nlohmann::json{{"experiment", to_string(cfg.experiment)},
                     {"d", cfg.d},
                     {"n_list", cfg.n_list},
                     {"N_list", cfg.N_list},
                     {"ensemble", to_string(cfg.ensemble)},
                     {"transform_kind", to_string(cfg.transform)},
                     {"signal_kind", signals},
                     {"trials", cfg.trials},
                     {"seed", cfg.seed},
                     {"algorithm", to_string(cfg.algorithm)},
                     {"output", cfg.output.string()},
                     {"workers", cfg.workers},
                     {"matrix_per_trial", cfg.matrix_per_trial},
                     {"grid_step", cfg.grid_step},
                     {"exact_tol", cfg.exact_tol},
                     {"ls_strategy", to_string(cfg.romp_options.ls_strategy)},
                     {"regularizer", to_string(cfg.romp_options.regularizer)},
                     {"max_iterations", cfg.romp_options.max_iterations}};
}

nlohmann::json summary_json(const ExperimentConfig &cfg, const std::vector<ExperimentRow> &rows) {
  nlohmann::json out;
  out["toolkit_version"] = std::string(kToolkitVersion);
  out["config"] = cfg;
  out["row_count"] = rows.size();
  nlohmann::json summary = nlohmann::json::array();
  for (const auto &r : rows) {
    summary.push_back({{"N", r.N},
                       {"n", r.n},
                       {"algorithm", r.algorithm},
                       {"signal_kind", r.signal_kind},
                       {"exact_recovery_fraction", r.exact_recovery_fraction},
                       {"mean_iterations", r.mean_iterations}});
  }
  out["rows"] = std::move(summary);
  return out;
}

void write_outputs(const ExperimentConfig &cfg, const std::vector<ExperimentRow> &rows) {
  if (cfg.output.empty()) throw std::invalid_argument("write_outputs: no output path configured");
  {
    std::ofstream csv(cfg.output);
    if (!csv) throw std::runtime_error("cannot write " + cfg.output.string());
    write_csv(csv, rows);
    if (!csv) throw std::runtime_error("error while writing " + cfg.output.string());
  }
  std::filesystem::path sidecar = cfg.output;
  sidecar += ".json";
  std::ofstream js(sidecar);
  if (!js) throw std::runtime_error("cannot write " + sidecar.string());
  js << summary_json(cfg, rows).dump(2) << '\n';
}

} // namespace romp
