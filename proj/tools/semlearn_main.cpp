#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "semlearn/clime.hpp"
#include "semlearn/errors.hpp"
#include "semlearn/finite.hpp"
#include "semlearn/io.hpp"
#include "semlearn/population.hpp"
#include "semlearn/sem.hpp"
#include "semlearn/synth.hpp"

namespace {

using json = nlohmann::json;
using namespace semlearn;

// Exit codes: 0 success, 1 IO/parse/flag problems, 2 identifiability check
// not satisfied, 3 numeric failure inside a learner, 4 enumeration limit.
constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNotSatisfied = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitTooLarge = 4;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::io_error:
    case ErrorCode::parse_error:
    case ErrorCode::invalid_vertex:
    case ErrorCode::cycle_detected:
    case ErrorCode::invalid_params:
    case ErrorCode::degenerate_range:
    case ErrorCode::invalid_inputs:
      return kExitInput;
    case ErrorCode::too_large:
      return kExitTooLarge;
    default:
      return kExitNumeric;
  }
}

int fail(const Error& e) {
  json j;
  j["error"] = {{"code", error_code_name(e.code())}, {"message", e.what()}};
  std::cout << j.dump(2) << "\n";
  return exit_code_for(e.code());
}

void emit(const std::string& content, const std::string& output_path) {
  if (output_path.empty())
    std::cout << content;
  else
    write_file_atomic(output_path, content);
}

std::string format_double(double v) {
  std::array<char, 40> buf;
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string input, output, format = "json";
  bool population = false, covariance = false, center = false;
  double lambda = -1.0, epsilon = -1.0;
  bool lambda_set = false, epsilon_set = false;
  std::string known_variances_path;
  std::string tie_break = "lowest";
  std::uint64_t tie_seed = 0;
  // The restricted refit is feasible at every lambda; the full residual-row
  // form needs lambda to dominate the covariance deviation, which the
  // heuristic default lambda does not promise. Library callers picking their
  // own lambda get the full form by default instead.
  std::string update_mode = "restricted";
  double support_cutoff = -1.0;
  double lp_tol = 1e-8;
};

TieBreak tie_break_from(const FitArgs& args) {
  TieBreak tb;
  if (args.tie_break == "lowest")
    tb.kind = TieBreakKind::lowest_index;
  else if (args.tie_break == "highest")
    tb.kind = TieBreakKind::highest_index;
  else
    tb.kind = TieBreakKind::random_seeded;
  tb.seed = args.tie_seed;
  return tb;
}

int run_fit(const FitArgs& args) {
  std::optional<KnownVarianceSpec> known;
  if (!args.known_variances_path.empty())
    known = KnownVarianceSpec{vector_from_json(read_file(args.known_variances_path)), {}};

  LearnResult result;
  if (args.population) {
    const Eigen::MatrixXd omega = matrix_from_json(read_file(args.input));
    const double cutoff = args.support_cutoff >= 0.0 ? args.support_cutoff : kZeroCutoff;
    result = learn_population(omega, known, tie_break_from(args), cutoff);
  } else {
    Eigen::MatrixXd sigma_n;
    double lambda = args.lambda;
    if (args.covariance) {
      sigma_n = matrix_from_json(read_file(args.input));
    } else {
      DataMatrix data = data_from_csv(read_file(args.input));
      if (args.center) {
        const Eigen::RowVectorXd means = data.values.colwise().mean();
        data.values.rowwise() -= means;
      }
      if (!args.lambda_set)
        lambda = 0.5 * std::sqrt(std::log(static_cast<double>(data.p)) / data.n);
      sigma_n = empirical_covariance(data);
    }
    LearnerConfig config;
    config.lambda_n = lambda;
    config.threshold_eps = args.epsilon_set ? args.epsilon : 2.0 * lambda;
    config.known_variances = known;
    config.tie_break = tie_break_from(args);
    config.lp_tol = args.lp_tol;
    if (args.support_cutoff >= 0.0) config.support_cutoff = args.support_cutoff;
    config.update_mode = args.update_mode == "restricted" ? UpdateMode::restricted_rows
                                                          : UpdateMode::full_residual_rows;
    result = learn_finite(sigma_n, config);
  }

  emit(args.format == "dot" ? learn_result_to_dot(result) : learn_result_to_json(result),
       args.output);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  int p = 0, d = 4, n = 0;
  double edge_prob = 0.3;
  std::uint64_t seed = 1;
  std::string noise = "gaussian";
  int noise_m = 1;
  double noise_km = 9.0;
  double weight_low = 0.3, weight_high = 1.0;
  double variance = 1.0;
  std::vector<double> variance_range;
  std::string model_out, data_out;
};

NoiseKind noise_kind_from(const std::string& name) {
  if (name == "gaussian") return NoiseKind::gaussian;
  if (name == "scaled_rademacher_mix") return NoiseKind::scaled_rademacher_mix;
  if (name == "bounded_moment_t") return NoiseKind::bounded_moment_t;
  throw Error(ErrorCode::parse_error,
              "unknown noise kind '" + name +
                  "' (expected gaussian, scaled_rademacher_mix, or bounded_moment_t)");
}

int run_simulate(const SimulateArgs& args) {
  const Dag dag = random_dag(args.p, args.d, args.edge_prob, derive_seed(args.seed, 0));
  const VarianceMode variances =
      args.variance_range.empty()
          ? VarianceMode::homoscedastic(args.variance)
          : VarianceMode::range(args.variance_range[0], args.variance_range[1]);
  const Sem sem = random_sem(dag, args.weight_low, args.weight_high, variances,
                             derive_seed(args.seed, 1));
  NoiseModel noise;
  noise.kind = noise_kind_from(args.noise);
  noise.m = args.noise_m;
  noise.K_m = args.noise_km;
  const DataMatrix data = sample_data(sem, args.n, noise, derive_seed(args.seed, 2));
  write_file_atomic(args.model_out, sem_to_json(sem));
  write_file_atomic(args.data_out, data_to_csv(data));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// check

struct CheckArgs {
  std::string input, output;
  double gap = 0.0;
  double lambda = -1.0;
  bool lambda_set = false;
  std::string known_variances_path;
  double alpha = -1.0;
  bool alpha_set = false;
  std::string misspec_path;
  int limit = kDefaultEnumerationLimit;
};

int run_check(const CheckArgs& args) {
  const Sem sem = sem_from_json(read_file(args.input));

  if (!args.misspec_path.empty()) {
    KnownVarianceSpec d_prime{vector_from_json(read_file(args.misspec_path)), {}};
    const MisspecificationResult res = misspecification_margin(sem, d_prime, args.limit);
    json j;
    j["holds"] = res.holds;
    j["margin"] = std::isfinite(res.margin) ? json(res.margin) : json(nullptr);
    emit(j.dump(2) + "\n", args.output);
    return res.holds ? kExitOk : kExitNotSatisfied;
  }

  IdentifiabilityReport report;
  if (args.lambda_set) {
    std::optional<KnownVarianceSpec> known;
    if (!args.known_variances_path.empty()) {
      known = KnownVarianceSpec{vector_from_json(read_file(args.known_variances_path)), {}};
      if (args.alpha_set) known->alpha = args.alpha;
    }
    report = check_finite_sample_identifiability(sem, args.lambda, known, args.limit);
  } else {
    report = check_identifiability(sem, args.gap, args.limit);
  }
  emit(report_to_json(report), args.output);
  return report.satisfied ? kExitOk : kExitNotSatisfied;
}

// ---------------------------------------------------------------------------
// benchmark

struct LambdaRule {
  enum class Kind { scaled, fixed, population };
  Kind kind = Kind::scaled;
  double value = 0.5;

  std::string name() const {
    switch (kind) {
      case Kind::scaled:
        return "scaled:" + format_double(value);
      case Kind::fixed:
        return "fixed:" + format_double(value);
      default:
        return "population";
    }
  }
};

struct BenchConfig {
  std::vector<int> p, d, n;
  std::vector<std::string> noise;
  std::vector<LambdaRule> rules;
  int trials = 1;
  std::uint64_t seed = 1;
  double edge_prob = 0.3;
  double weight_low = 0.3, weight_high = 1.0;
  VarianceMode variances = VarianceMode::homoscedastic(1.0);
  double epsilon_factor = 2.0;
  int noise_m = 1;
  double noise_km = 9.0;
  // Same default as `fit`: the scaled-lambda rules this harness exists for
  // run below the full form's feasibility premise.
  UpdateMode update_mode = UpdateMode::restricted_rows;
};

std::vector<int> int_list(const json& j, const char* field) {
  std::vector<int> out;
  const json& v = j.at(field);
  if (v.is_number_integer()) {
    out.push_back(v.get<int>());
  } else if (v.is_array() && !v.empty()) {
    for (const auto& e : v) {
      if (!e.is_number_integer())
        throw Error(ErrorCode::parse_error, std::string(field) + " entries must be integers");
      out.push_back(e.get<int>());
    }
  } else {
    throw Error(ErrorCode::parse_error,
                std::string(field) + " must be an integer or a non-empty array");
  }
  for (int x : out)
    if (x < 1)
      throw Error(ErrorCode::parse_error, std::string(field) + " entries must be positive");
  return out;
}

BenchConfig bench_config_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object())
    throw Error(ErrorCode::parse_error, "benchmark config must be a JSON object");
  BenchConfig cfg;
  cfg.p = int_list(j, "p");
  cfg.d = int_list(j, "d");
  cfg.n = int_list(j, "n");

  if (j.contains("noise")) {
    const json& v = j["noise"];
    if (v.is_string())
      cfg.noise.push_back(v.get<std::string>());
    else if (v.is_array() && !v.empty())
      for (const auto& e : v) cfg.noise.push_back(e.get<std::string>());
    else
      throw Error(ErrorCode::parse_error, "noise must be a string or non-empty array");
  } else {
    cfg.noise.push_back("gaussian");
  }
  for (const auto& name : cfg.noise) noise_kind_from(name);  // validate early

  auto parse_rule = [](const json& r) {
    if (!r.is_object() || !r.contains("kind"))
      throw Error(ErrorCode::parse_error, "each lambda_rule needs a kind");
    LambdaRule rule;
    const std::string kind = r["kind"].get<std::string>();
    if (kind == "scaled")
      rule.kind = LambdaRule::Kind::scaled;
    else if (kind == "fixed")
      rule.kind = LambdaRule::Kind::fixed;
    else if (kind == "population")
      rule.kind = LambdaRule::Kind::population;
    else
      throw Error(ErrorCode::parse_error,
                  "unknown lambda_rule kind '" + kind +
                      "' (expected scaled, fixed, or population)");
    if (rule.kind != LambdaRule::Kind::population) {
      if (!r.contains("value") || !r["value"].is_number())
        throw Error(ErrorCode::parse_error, "lambda_rule '" + kind + "' needs a numeric value");
      rule.value = r["value"].get<double>();
      if (!(rule.value >= 0.0))
        throw Error(ErrorCode::parse_error, "lambda_rule value must be nonnegative");
    }
    return rule;
  };
  if (j.contains("lambda_rule")) {
    const json& v = j["lambda_rule"];
    if (v.is_array() && !v.empty())
      for (const auto& r : v) cfg.rules.push_back(parse_rule(r));
    else
      cfg.rules.push_back(parse_rule(v));
  } else {
    cfg.rules.push_back(LambdaRule{});
  }

  if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
  if (cfg.trials < 1) throw Error(ErrorCode::parse_error, "trials must be positive");
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("edge_prob")) cfg.edge_prob = j["edge_prob"].get<double>();
  if (j.contains("weight_range")) {
    const json& w = j["weight_range"];
    if (!w.is_array() || w.size() != 2)
      throw Error(ErrorCode::parse_error, "weight_range must be [low, high]");
    cfg.weight_low = w[0].get<double>();
    cfg.weight_high = w[1].get<double>();
  }
  if (j.contains("variance") && j.contains("variance_range"))
    throw Error(ErrorCode::parse_error, "give variance or variance_range, not both");
  if (j.contains("variance"))
    cfg.variances = VarianceMode::homoscedastic(j["variance"].get<double>());
  if (j.contains("variance_range")) {
    const json& w = j["variance_range"];
    if (!w.is_array() || w.size() != 2)
      throw Error(ErrorCode::parse_error, "variance_range must be [low, high]");
    cfg.variances = VarianceMode::range(w[0].get<double>(), w[1].get<double>());
  }
  if (j.contains("epsilon_factor")) cfg.epsilon_factor = j["epsilon_factor"].get<double>();
  if (!(cfg.epsilon_factor >= 0.0))
    throw Error(ErrorCode::parse_error, "epsilon_factor must be nonnegative");
  if (j.contains("noise_m")) cfg.noise_m = j["noise_m"].get<int>();
  if (j.contains("noise_km")) cfg.noise_km = j["noise_km"].get<double>();
  if (j.contains("update_mode")) {
    const std::string mode = j["update_mode"].get<std::string>();
    if (mode == "full")
      cfg.update_mode = UpdateMode::full_residual_rows;
    else if (mode == "restricted")
      cfg.update_mode = UpdateMode::restricted_rows;
    else
      throw Error(ErrorCode::parse_error,
                  "unknown update_mode '" + mode + "' (expected full or restricted)");
  }
  return cfg;
}

struct Cell {
  int p, d, n;
  std::string noise;
  LambdaRule rule;
};

struct TrialRow {
  std::uint64_t seed = 0;
  int exact_recovery = 0;
  int hamming = 0;
  double max_abs_error = 0.0;
  double wall_time_ms = 0.0;
};

struct CellResult {
  std::vector<TrialRow> rows;                  // successes, in trial order
  std::vector<std::string> errors;             // failures, in trial order
};

CellResult run_cell(const Cell& cell, const BenchConfig& cfg, std::size_t cell_index) {
  CellResult out;
  NoiseModel noise;
  noise.kind = noise_kind_from(cell.noise);
  noise.m = cfg.noise_m;
  noise.K_m = cfg.noise_km;
  for (int t = 0; t < cfg.trials; ++t) {
    const std::uint64_t trial_seed =
        derive_seed(cfg.seed, cell_index * static_cast<std::uint64_t>(cfg.trials) + t);
    try {
      const Dag dag = random_dag(cell.p, cell.d, cfg.edge_prob, derive_seed(trial_seed, 0));
      const Sem sem = random_sem(dag, cfg.weight_low, cfg.weight_high, cfg.variances,
                                 derive_seed(trial_seed, 1));
      LearnResult result;
      const auto t0 = std::chrono::steady_clock::now();
      if (cell.rule.kind == LambdaRule::Kind::population) {
        result = learn_population(precision_of(sem));
      } else {
        const DataMatrix data = sample_data(sem, cell.n, noise, derive_seed(trial_seed, 2));
        LearnerConfig config;
        config.lambda_n = cell.rule.kind == LambdaRule::Kind::fixed
                              ? cell.rule.value
                              : cell.rule.value *
                                    std::sqrt(std::log(static_cast<double>(cell.p)) / cell.n);
        config.threshold_eps = cfg.epsilon_factor * config.lambda_n;
        config.update_mode = cfg.update_mode;
        result = learn_finite(data, config);
      }
      const auto t1 = std::chrono::steady_clock::now();

      TrialRow row;
      row.seed = trial_seed;
      row.exact_recovery = result.G_hat.edges == sem.dag.edges ? 1 : 0;
      EdgeSet diff;
      std::set_symmetric_difference(result.G_hat.edges.begin(), result.G_hat.edges.end(),
                                    sem.dag.edges.begin(), sem.dag.edges.end(),
                                    std::inserter(diff, diff.begin()));
      row.hamming = static_cast<int>(diff.size());
      row.max_abs_error = (result.B_hat - sem.B).cwiseAbs().maxCoeff();
      row.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      out.rows.push_back(row);
    } catch (const Error& e) {
      out.errors.push_back("trial " + std::to_string(t) + ": " + e.what());
    }
  }
  return out;
}

struct BenchmarkArgs {
  std::string config_path;
  std::string csv_out = "benchmark_report.csv";
  std::string summary_out = "benchmark_summary.json";
  int workers = 0;
};

int run_benchmark(const BenchmarkArgs& args) {
  const BenchConfig cfg = bench_config_from_json(read_file(args.config_path));

  std::vector<Cell> cells;
  for (int p : cfg.p)
    for (int d : cfg.d)
      for (int n : cfg.n)
        for (const auto& noise : cfg.noise)
          for (const auto& rule : cfg.rules) cells.push_back(Cell{p, d, n, noise, rule});

  int workers = args.workers;
  if (workers <= 0) {
    if (const char* env = std::getenv("SEMLEARN_WORKERS")) workers = std::atoi(env);
  }
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, std::max(1, static_cast<int>(cells.size())));

  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto drain = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= cells.size()) return;
      results[idx] = run_cell(cells[idx], cfg, idx);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(drain);
  drain();
  for (auto& th : pool) th.join();

  std::string csv = "p,d,n,noise,seed,exact_recovery,hamming_distance,max_abs_error,wall_time_ms\n";
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (const TrialRow& row : results[c].rows) {
      csv += std::to_string(cells[c].p) + ',' + std::to_string(cells[c].d) + ',' +
             std::to_string(cells[c].n) + ',' + cells[c].noise + ',' +
             std::to_string(row.seed) + ',' + std::to_string(row.exact_recovery) + ',' +
             std::to_string(row.hamming) + ',' + format_double(row.max_abs_error) + ',' +
             format_double(row.wall_time_ms) + '\n';
    }
  write_file_atomic(args.csv_out, csv);

  json summary;
  summary["trials_per_cell"] = cfg.trials;
  summary["seed"] = cfg.seed;
  summary["cells"] = json::array();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const CellResult& res = results[c];
    json cell;
    cell["p"] = cells[c].p;
    cell["d"] = cells[c].d;
    cell["n"] = cells[c].n;
    cell["noise"] = cells[c].noise;
    cell["lambda_rule"] = cells[c].rule.name();
    cell["successes"] = res.rows.size();
    cell["errors"] = res.errors;
    if (res.rows.empty()) {
      cell["exact_recovery_rate"] = nullptr;
      cell["median_hamming"] = nullptr;
      cell["median_max_abs_error"] = nullptr;
      cell["median_wall_time_ms"] = nullptr;
    } else {
      std::vector<double> recovery, hamming, err, wall;
      for (const TrialRow& row : res.rows) {
        recovery.push_back(row.exact_recovery);
        hamming.push_back(row.hamming);
        err.push_back(row.max_abs_error);
        wall.push_back(row.wall_time_ms);
      }
      double rate = 0.0;
      for (double r : recovery) rate += r;
      cell["exact_recovery_rate"] = rate / recovery.size();
      cell["median_hamming"] = median_of(hamming);
      cell["median_max_abs_error"] = median_of(err);
      cell["median_wall_time_ms"] = median_of(wall);
    }
    summary["cells"].push_back(std::move(cell));
  }
  write_file_atomic(args.summary_out, summary.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure and weight recovery for linear structural equation models"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand(
      "fit", "Learn a DAG and weights from samples (CSV), a covariance (JSON), or a "
             "precision matrix (JSON, --population)");
  fit->add_option("input", fit_args.input, "Input file")->required();
  fit->add_option("-o,--output", fit_args.output, "Output path (default: stdout)");
  fit->add_option("--format", fit_args.format, "Output format")
      ->check(CLI::IsMember({"json", "dot"}));
  CLI::Option* opt_pop = fit->add_flag("--population", fit_args.population,
                                       "Input is an exact precision matrix (JSON)");
  CLI::Option* opt_cov = fit->add_flag("--covariance", fit_args.covariance,
                                       "Input is an empirical covariance matrix (JSON)");
  CLI::Option* opt_lambda =
      fit->add_option("--lambda", fit_args.lambda,
                      "L1 constraint radius (default for CSV input: 0.5*sqrt(log(p)/n))")
          ->check(CLI::NonNegativeNumber);
  CLI::Option* opt_eps =
      fit->add_option("--epsilon", fit_args.epsilon,
                      "Weight threshold (default: 2*lambda)")
          ->check(CLI::NonNegativeNumber);
  CLI::Option* opt_center = fit->add_flag(
      "--center", fit_args.center, "Mean-center CSV columns before the covariance");
  fit->add_option("--known-variances", fit_args.known_variances_path,
                  "JSON array of noise variances (up to scale)");
  fit->add_option("--tie-break", fit_args.tie_break, "Terminal-selection tie rule")
      ->check(CLI::IsMember({"lowest", "highest", "random"}));
  fit->add_option("--tie-seed", fit_args.tie_seed, "Seed for --tie-break random");
  fit->add_option("--update-mode", fit_args.update_mode,
                  "Constraint rows for post-removal refits (full needs a "
                  "lambda that dominates the covariance error; restricted is "
                  "feasible at any lambda)")
      ->check(CLI::IsMember({"full", "restricted"}));
  fit->add_option("--support-cutoff", fit_args.support_cutoff,
                  "Magnitude below which estimated entries count as zero")
      ->check(CLI::NonNegativeNumber);
  fit->add_option("--lp-tol", fit_args.lp_tol, "LP feasibility tolerance")
      ->check(CLI::PositiveNumber);
  opt_pop->excludes(opt_cov);
  opt_pop->excludes(opt_lambda);
  opt_pop->excludes(opt_eps);
  opt_pop->excludes(opt_center);
  opt_cov->excludes(opt_center);
  opt_cov->needs(opt_lambda);

  SimulateArgs sim_args;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Sample a random model and observational data from it");
  simulate->add_option("--p", sim_args.p, "Vertex count")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--n", sim_args.n, "Sample count")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--d", sim_args.d, "Degree bound")->check(CLI::PositiveNumber);
  simulate->add_option("--edge-prob", sim_args.edge_prob, "Edge proposal probability")
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--seed", sim_args.seed, "Generator seed");
  simulate->add_option("--noise", sim_args.noise, "Noise kind")
      ->check(CLI::IsMember({"gaussian", "scaled_rademacher_mix", "bounded_moment_t"}));
  simulate->add_option("--noise-m", sim_args.noise_m, "Moment index for bounded_moment_t")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--noise-km", sim_args.noise_km, "Moment bound for bounded_moment_t")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--weight-low", sim_args.weight_low, "Smallest |weight|")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--weight-high", sim_args.weight_high, "Largest |weight|")
      ->check(CLI::PositiveNumber);
  CLI::Option* opt_var =
      simulate->add_option("--variance", sim_args.variance, "Shared noise variance")
          ->check(CLI::PositiveNumber);
  CLI::Option* opt_var_range =
      simulate
          ->add_option("--variance-range", sim_args.variance_range,
                       "Noise variance range LOW HIGH")
          ->expected(2);
  opt_var->excludes(opt_var_range);
  simulate->add_option("--model-out", sim_args.model_out, "Ground-truth model JSON path")
      ->required();
  simulate->add_option("--data-out", sim_args.data_out, "Sample CSV path")->required();

  CheckArgs check_args;
  CLI::App* check = app.add_subcommand(
      "check", "Test whether a model is identifiable by terminal-score elimination");
  check->add_option("input", check_args.input, "Model JSON file")->required();
  check->add_option("-o,--output", check_args.output, "Also write the report here");
  CLI::Option* opt_gap =
      check->add_option("--gap", check_args.gap, "Required strict margin")
          ->check(CLI::NonNegativeNumber);
  CLI::Option* opt_check_lambda =
      check
          ->add_option("--lambda", check_args.lambda,
                       "Check the finite-sample conditions at this regularization")
          ->check(CLI::NonNegativeNumber);
  check->add_option("--known-variances", check_args.known_variances_path,
                    "JSON array of noise variances (up to scale)");
  CLI::Option* opt_alpha =
      check->add_option("--alpha", check_args.alpha,
                        "Scale relating supplied variances to the truth")
          ->check(CLI::PositiveNumber);
  CLI::Option* opt_misspec = check->add_option(
      "--misspec", check_args.misspec_path,
      "JSON array of misspecified variances; reports the tolerance margin instead");
  check->add_option("--limit", check_args.limit, "Ancestral-set enumeration limit")
      ->check(CLI::PositiveNumber);
  opt_misspec->excludes(opt_gap);
  opt_misspec->excludes(opt_check_lambda);
  opt_misspec->excludes(opt_alpha);
  opt_gap->excludes(opt_check_lambda);

  BenchmarkArgs bench_args;
  CLI::App* benchmark = app.add_subcommand(
      "benchmark", "Run a recovery-rate and scaling experiment grid");
  benchmark->add_option("config", bench_args.config_path, "Benchmark config JSON")
      ->required();
  benchmark->add_option("--csv-out", bench_args.csv_out, "Per-trial report CSV path");
  benchmark->add_option("--summary-out", bench_args.summary_out,
                        "Per-cell summary JSON path");
  benchmark->add_option("--workers", bench_args.workers,
                        "Concurrent cells (default: SEMLEARN_WORKERS or hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    json j;
    j["error"] = {{"code", "parse_error"}, {"message", e.what()}};
    std::cout << j.dump(2) << "\n";
    return kExitInput;
  }

  try {
    fit_args.lambda_set = opt_lambda->count() > 0;
    fit_args.epsilon_set = opt_eps->count() > 0;
    check_args.lambda_set = opt_check_lambda->count() > 0;
    check_args.alpha_set = opt_alpha->count() > 0;
    if (fit->parsed()) return run_fit(fit_args);
    if (simulate->parsed()) return run_simulate(sim_args);
    if (check->parsed()) return run_check(check_args);
    if (benchmark->parsed()) return run_benchmark(bench_args);
  } catch (const Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    json j;
    j["error"] = {{"code", "internal"}, {"message", e.what()}};
    std::cout << j.dump(2) << "\n";
    return kExitNumeric;
  }
  return kExitInput;
}
