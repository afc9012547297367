#include <cmath>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "rlz/analysis.hpp"
#include "rlz/calibration.hpp"
#include "rlz/errors.hpp"
#include "rlz/experiments.hpp"
#include "rlz/missing_data.hpp"

using nlohmann::json;
using namespace rlz;

namespace {

json to_json(const RealVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json to_json(const IndexSet& s) {
  json out = json::array();
  for (auto i : s) out.push_back(i);
  return out;
}

DenseMatrix load_matrix(const std::string& path) { return read_csv_table(read_file(path)).values; }

SignVector load_signs(const std::string& path, std::string_view what) {
  const RealVector v = read_csv_vector(read_file(path));
  SignVector s(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) != -1.0 && v(i) != 0.0 && v(i) != 1.0)
      throw InputError(std::string(what) + " entries must be -1, 0 or 1");
    s(i) = static_cast<int>(v(i));
  }
  return s;
}

std::optional<double> parse_tau(const std::string& text) {
  if (text == "qut") return std::nullopt;
  double v = 0.0;
  std::size_t used = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(v >= 0.0)) throw InputError("--tau must be a number >= 0 or 'qut'");
  return v;
}

struct FitArgs {
  std::string x, y, out, tau = "qut";
  double lambda = 1.0, alpha = 0.05;
  int dictionaries = 20, mc = 500;
  bool restrict_rows = false, without_omega = false;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

void run_fit(const FitArgs& a) {
  const IncompleteMatrix inc = IncompleteMatrix::from_values(load_matrix(a.x));
  const RealVector y = read_csv_vector(read_file(a.y));

  RlzConfig cfg;
  cfg.lambda = a.lambda;
  cfg.tau = parse_tau(a.tau);
  cfg.dictionaries = a.dictionaries;
  cfg.master_seed = a.seed;
  cfg.workers = a.workers;
  QutSpec qut;
  qut.alpha = a.alpha;
  qut.n_mc = a.mc;
  qut.workers = a.workers;
  MissingDataOptions mopts;
  mopts.restrict_corruption_rows = a.restrict_rows;
  mopts.without_omega = a.without_omega;

  const MissingDataFit mf = rlz_with_missing(y, inc, cfg, qut, {}, mopts);
  const RlzFit& fit = mf.fit;
  json j;
  j["beta_hat"] = to_json(fit.beta_hat);
  j["beta_hat_original_scale"] = to_json(mf.beta_original_scale);
  j["beta_med"] = to_json(fit.beta_med);
  j["omega_med"] = fit.omega_med ? to_json(*fit.omega_med) : json(nullptr);
  j["omega_hat"] = fit.omega_hat ? to_json(*fit.omega_hat) : json(nullptr);
  j["tau_used"] = fit.tau_used;
  j["tau_omega_used"] = fit.tau_omega_used;
  j["pivot_quantile"] = mf.qut ? json(mf.qut->pivot_quantile) : json(nullptr);
  j["qut_dropped_draws"] = mf.qut ? json(mf.qut->dropped_draws) : json(nullptr);
  j["lambda"] = a.lambda;
  j["alpha"] = a.alpha;
  j["M"] = a.dictionaries;
  j["seed"] = a.seed;
  j["incomplete_rows"] = to_json(mf.incomplete_rows);
  j["center"] = to_json(mf.center);
  j["scale"] = to_json(mf.scale);
  json statuses = json::array();
  for (auto s : fit.per_dictionary_status) statuses.push_back(std::string(to_string(s)));
  j["per_dictionary_status"] = statuses;
  j["warnings"] = fit.warnings;
  write_file(a.out, j.dump(2) + "\n");
  for (const auto& w : fit.warnings) std::cerr << "warning: " << w << "\n";
}

struct QutArgs {
  std::string x, out;
  double lambda = 1.0, alpha = 0.05;
  int dictionaries = 20, mc = 500;
  bool restrict_rows = false, without_omega = false;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

void run_qut(const QutArgs& a) {
  const IncompleteMatrix inc = IncompleteMatrix::from_values(load_matrix(a.x));
  // Same preprocessing as `fit`, so the quantile applies to its design.
  const DenseMatrix X = standardize_columns(mean_impute(inc));
  QutSpec spec;
  spec.alpha = a.alpha;
  spec.n_mc = a.mc;
  spec.lambda = a.lambda;
  spec.dictionaries = a.dictionaries;
  spec.master_seed = a.seed;
  spec.without_omega = a.without_omega;
  spec.workers = a.workers;
  if (a.restrict_rows) spec.corruption_cols = inc.incomplete_rows;
  const QutResult r = qut_threshold(X, spec);
  json j;
  j["pivot_quantile"] = r.pivot_quantile;
  j["alpha"] = a.alpha;
  j["n_mc"] = a.mc;
  j["dropped_draws"] = r.dropped_draws;
  j["mc_statistics"] = r.mc_statistics;
  write_file(a.out, j.dump(2) + "\n");
}

struct IdentifyArgs {
  std::string x, theta, theta_tilde, out;
  double lambda = 1.0;
  unsigned workers = 1;
};

void run_identify(const IdentifyArgs& a) {
  const DenseMatrix X = load_matrix(a.x);
  AnalysisOptions opts;
  opts.workers = a.workers;
  const IdentifiabilityVerdict v =
      check_identifiability(X, load_signs(a.theta, "theta"), load_signs(a.theta_tilde, "theta_tilde"), a.lambda, opts);
  json j;
  j["identifiable"] = v.identifiable;
  j["method"] = std::string(to_string(v.method));
  j["certified"] = v.certified;
  j["inconclusive"] = v.inconclusive;
  j["max_value"] = v.max_value;
  if (v.witness) {
    j["witness"] = {{"beta", to_json(v.witness->beta)}, {"omega", to_json(v.witness->omega)}};
  } else {
    j["witness"] = nullptr;
  }
  write_file(a.out, j.dump(2) + "\n");
}

struct SimulateArgs {
  std::string config, out, raw;
  unsigned workers = 1;
};

void run_simulate(const SimulateArgs& a) {
  const SimulationSpec spec = simulation_spec_from_json(read_file(a.config));
  const ExperimentResult res = run_experiment(spec, a.workers);
  write_file(a.out, metrics_csv(res.metrics));
  if (!a.raw.empty()) write_file(a.raw, raw_csv(res.raw));
  for (const auto& m : res.metrics)
    std::cerr << to_string(m.estimator) << ": " << m.failures << " failed replications, "
              << m.runtime_seconds << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust Lasso-Zero and thresholded justice pursuit"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit robust lasso-zero to a design with missing entries");
  fit_cmd->add_option("--x", fit.x, "Design CSV with header; NA marks a missing entry")->required();
  fit_cmd->add_option("--y", fit.y, "Response CSV, one column")->required();
  fit_cmd->add_option("--lambda", fit.lambda, "Weight of the corruption term")->capture_default_str();
  fit_cmd->add_option("--alpha", fit.alpha, "QUT level")->capture_default_str();
  fit_cmd->add_option("--dictionaries", fit.dictionaries, "Number of noise dictionaries")->capture_default_str();
  fit_cmd->add_option("--tau", fit.tau, "Threshold: a number or 'qut'")->capture_default_str();
  fit_cmd->add_flag("--restrict-corruption-rows", fit.restrict_rows,
                    "Corruption variables only for rows with a missing entry");
  fit_cmd->add_flag("--no-omega", fit.without_omega, "Plain lasso-zero without corruption variables");
  fit_cmd->add_option("--seed", fit.seed, "Master seed")->capture_default_str();
  fit_cmd->add_option("--mc", fit.mc, "QUT Monte Carlo draws")->capture_default_str();
  fit_cmd->add_option("--workers", fit.workers, "Worker threads")->capture_default_str();
  fit_cmd->add_option("--out", fit.out, "Output JSON")->required();

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a simulation study from a JSON config");
  sim_cmd->add_option("--config", sim.config, "Simulation config JSON")->required();
  sim_cmd->add_option("--out", sim.out, "Metrics CSV")->required();
  sim_cmd->add_option("--raw", sim.raw, "Per-replication CSV");
  sim_cmd->add_option("--workers", sim.workers, "Worker threads")->capture_default_str();

  QutArgs qut;
  auto* qut_cmd = app.add_subcommand("qut", "Monte Carlo quantile of the pivotized null statistic");
  qut_cmd->add_option("--x", qut.x, "Design CSV with header")->required();
  qut_cmd->add_option("--alpha", qut.alpha, "Level")->capture_default_str();
  qut_cmd->add_option("--mc", qut.mc, "Monte Carlo draws")->capture_default_str();
  qut_cmd->add_option("--lambda", qut.lambda, "Weight of the corruption term")->capture_default_str();
  qut_cmd->add_option("--dictionaries", qut.dictionaries, "Number of noise dictionaries")->capture_default_str();
  qut_cmd->add_flag("--restrict-corruption-rows", qut.restrict_rows,
                    "Corruption variables only for rows with a missing entry");
  qut_cmd->add_flag("--no-omega", qut.without_omega, "Plain lasso-zero without corruption variables");
  qut_cmd->add_option("--seed", qut.seed, "Master seed")->capture_default_str();
  qut_cmd->add_option("--workers", qut.workers, "Worker threads")->capture_default_str();
  qut_cmd->add_option("--out", qut.out, "Output JSON")->required();

  IdentifyArgs id;
  auto* id_cmd = app.add_subcommand("identify", "Check identifiability of a sign pair by justice pursuit");
  id_cmd->add_option("--x", id.x, "Design CSV with header")->required();
  id_cmd->add_option("--theta", id.theta, "Signs of beta, one column")->required();
  id_cmd->add_option("--theta-tilde", id.theta_tilde, "Signs of omega, one column")->required();
  id_cmd->add_option("--lambda", id.lambda, "Weight of the corruption term")->capture_default_str();
  id_cmd->add_option("--workers", id.workers, "Worker threads")->capture_default_str();
  id_cmd->add_option("--out", id.out, "Output JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*fit_cmd) run_fit(fit);
    else if (*sim_cmd) run_simulate(sim);
    else if (*qut_cmd) run_qut(qut);
    else if (*id_cmd) run_identify(id);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
