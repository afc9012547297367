#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "json.hpp"

#include "rlz/calibration.hpp"
#include "rlz/errors.hpp"
#include "rlz/experiments.hpp"

namespace rlz {

namespace {

int sign_int(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

void check_lengths(const RealVector& a, const RealVector& b) {
  if (a.size() != b.size()) throw InputError("beta_hat and beta0 differ in length");
}

int correct_signs(const RealVector& beta_hat, const RealVector& beta0) {
  int correct = 0;
  for (Eigen::Index j = 0; j < beta0.size(); ++j)
    if (beta0(j) != 0 && sign_int(beta_hat(j)) == sign_int(beta0(j))) ++correct;
  return correct;
}

}  // namespace

double s_tpp(const RealVector& beta_hat, const RealVector& beta0) {
  check_lengths(beta_hat, beta0);
  const auto s0 = (beta0.array() != 0.0).count();
  if (s0 == 0) throw InputError("s-TPP is undefined for beta0 = 0; report PSR only");
  return static_cast<double>(correct_signs(beta_hat, beta0)) / static_cast<double>(s0);
}

double s_fdp(const RealVector& beta_hat, const RealVector& beta0) {
  check_lengths(beta_hat, beta0);
  const auto discoveries = (beta_hat.array() != 0.0).count();
  const auto wrong = discoveries - correct_signs(beta_hat, beta0);
  return static_cast<double>(wrong) / static_cast<double>(std::max<Eigen::Index>(1, discoveries));
}

int psr_indicator(const RealVector& beta_hat, const RealVector& beta0) {
  check_lengths(beta_hat, beta0);
  for (Eigen::Index j = 0; j < beta0.size(); ++j)
    if (sign_int(beta_hat(j)) != sign_int(beta0(j))) return 0;
  return 1;
}

OracleThreshold oracle_s_threshold(const RealVector& v, Eigen::Index s) {
  const Eigen::Index p = v.size();
  if (s < 1 || s > p) throw InputError("oracle-s tuning needs 1 <= s <= p");
  std::vector<double> mags(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) mags[static_cast<std::size_t>(j)] = std::abs(v(j));
  std::sort(mags.begin(), mags.end(), std::greater<>());
  const auto su = static_cast<std::size_t>(s);

  OracleThreshold out;
  const double cut = mags[su - 1];
  if (su == mags.size()) {
    out.tau = cut > 0.0 ? std::nextafter(cut, 0.0) : 0.0;
  } else if (mags[su] == cut && cut > 0.0) {
    out.tie_at_cut = true;
    std::size_t k = su;
    while (k < mags.size() && mags[k] == cut) ++k;
    out.tau = k < mags.size() ? mags[k] : 0.0;
  } else {
    out.tau = mags[su];
  }
  out.support_size = (v.array().abs() > out.tau).count();
  out.short_support = out.support_size < s;
  return out;
}

std::string_view to_string(EstimatorTag e) {
  switch (e) {
    case EstimatorTag::rlass0: return "rlass0";
    case EstimatorTag::lass0: return "lass0";
    case EstimatorTag::tjp: return "tjp";
  }
  return "unknown";
}

std::string_view to_string(Tuning t) { return t == Tuning::oracle_s ? "oracle_s" : "automatic"; }

void SimulationSpec::validate() const {
  if (n < 1 || p < 1) throw InputError("n and p must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) throw InputError("rho must lie in [0, 1)");
  if (s < 1 || s > p) throw InputError("s must satisfy 1 <= s <= p");
  if (!(sigma_noise >= 0.0)) throw InputError("sigma_noise must be >= 0");
  if (!(beta_scale > 0.0)) throw InputError("beta_scale must be > 0");
  if (!(mnar_a >= 0.0)) throw InputError("mnar_a must be >= 0");
  if (!(pi >= 0.0 && pi < 1.0)) throw InputError("pi must lie in [0, 1)");
  if (k < 0 || k > n) throw InputError("k must satisfy 0 <= k <= n");
  if (k > 0 && restrict_corruption_rows)
    throw InputError("k > 0 corrupts complete rows; set restrict_corruption_rows to false");
  if (!(corruption_scale > 0.0)) throw InputError("corruption_scale must be > 0");
  if (replications < 1) throw InputError("replications must be >= 1");
  if (estimators.empty()) throw InputError("estimators must not be empty");
  if (M < 1) throw InputError("M must be >= 1");
  if (!(lambda > 0.0)) throw InputError("lambda must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (tuning == Tuning::automatic) {
    if (n_mc < 50) throw InputError("n_mc must be >= 50");
    if (std::find(estimators.begin(), estimators.end(), EstimatorTag::tjp) != estimators.end())
      throw InputError("tjp has no noise dictionaries to pivotize; use oracle_s tuning");
  }
}

namespace {

using nlohmann::json;

template <typename E>
E parse_enum(const json& j, const std::string& key,
             std::initializer_list<std::pair<std::string_view, E>> options) {
  if (!j.is_string()) throw InputError("spec field '" + key + "' must be a string");
  const auto text = j.get<std::string>();
  for (const auto& [name, value] : options)
    if (name == text) return value;
  throw InputError("spec field '" + key + "' has unknown value '" + text + "'");
}

template <typename T>
T number(const json& j, const std::string& key) {
  if (!j.is_number()) throw InputError("spec field '" + key + "' must be a number");
  if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) throw InputError("spec field '" + key + "' must be an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (j.is_number_unsigned()) return j.get<T>();
      const auto v = j.get<std::int64_t>();
      if (v < 0) throw InputError("spec field '" + key + "' must be >= 0");
      return static_cast<T>(v);
    }
  }
  return j.get<T>();
}

}  // namespace

SimulationSpec simulation_spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("spec must be a JSON object");
  SimulationSpec spec;
  for (const auto& [key, val] : j.items()) {
    if (key == "n") spec.n = number<Eigen::Index>(val, key);
    else if (key == "p") spec.p = number<Eigen::Index>(val, key);
    else if (key == "rho") spec.rho = number<double>(val, key);
    else if (key == "s") spec.s = number<Eigen::Index>(val, key);
    else if (key == "sigma_noise") spec.sigma_noise = number<double>(val, key);
    else if (key == "beta_magnitude") {
      if (val != "pm1") throw InputError("spec field 'beta_magnitude' supports only \"pm1\"");
    } else if (key == "beta_scale") spec.beta_scale = number<double>(val, key);
    else if (key == "mechanism")
      spec.mechanism = parse_enum<Mechanism>(val, key, {{"mcar", Mechanism::mcar}, {"mnar", Mechanism::mnar}});
    else if (key == "mnar_a") spec.mnar_a = number<double>(val, key);
    else if (key == "pi") spec.pi = number<double>(val, key);
    else if (key == "k") spec.k = number<Eigen::Index>(val, key);
    else if (key == "corruption_scale") spec.corruption_scale = number<double>(val, key);
    else if (key == "replications") spec.replications = number<int>(val, key);
    else if (key == "estimators") {
      if (!val.is_array()) throw InputError("spec field 'estimators' must be an array");
      spec.estimators.clear();
      for (const auto& e : val)
        spec.estimators.push_back(parse_enum<EstimatorTag>(
            e, key, {{"rlass0", EstimatorTag::rlass0}, {"lass0", EstimatorTag::lass0}, {"tjp", EstimatorTag::tjp}}));
    } else if (key == "tuning")
      spec.tuning = parse_enum<Tuning>(val, key, {{"oracle_s", Tuning::oracle_s}, {"automatic", Tuning::automatic}});
    else if (key == "M") spec.M = number<int>(val, key);
    else if (key == "lambda") spec.lambda = number<double>(val, key);
    else if (key == "alpha") spec.alpha = number<double>(val, key);
    else if (key == "n_mc") spec.n_mc = number<int>(val, key);
    else if (key == "imputation")
      spec.imputation = parse_enum<Imputation>(val, key, {{"mean", Imputation::mean}, {"zero", Imputation::zero}});
    else if (key == "restrict_corruption_rows") {
      if (!val.is_boolean()) throw InputError("spec field 'restrict_corruption_rows' must be true or false");
      spec.restrict_corruption_rows = val.get<bool>();
    } else if (key == "master_seed") spec.master_seed = number<std::uint64_t>(val, key);
    else throw InputError("unknown spec field '" + key + "'");
  }
  spec.validate();
  return spec;
}

std::string simulation_spec_to_json(const SimulationSpec& spec) {
  json j;
  j["n"] = spec.n;
  j["p"] = spec.p;
  j["rho"] = spec.rho;
  j["s"] = spec.s;
  j["sigma_noise"] = spec.sigma_noise;
  j["beta_magnitude"] = "pm1";
  j["beta_scale"] = spec.beta_scale;
  j["mechanism"] = spec.mechanism == Mechanism::mcar ? "mcar" : "mnar";
  j["mnar_a"] = spec.mnar_a;
  j["pi"] = spec.pi;
  j["k"] = spec.k;
  j["corruption_scale"] = spec.corruption_scale;
  j["replications"] = spec.replications;
  j["estimators"] = json::array();
  for (auto e : spec.estimators) j["estimators"].push_back(std::string(to_string(e)));
  j["tuning"] = std::string(to_string(spec.tuning));
  j["M"] = spec.M;
  j["lambda"] = spec.lambda;
  j["alpha"] = spec.alpha;
  j["n_mc"] = spec.n_mc;
  j["imputation"] = spec.imputation == Imputation::mean ? "mean" : "zero";
  j["restrict_corruption_rows"] = spec.restrict_corruption_rows;
  j["master_seed"] = spec.master_seed;
  return j.dump(2);
}

ReplicationData draw_replication(const SimulationSpec& spec, int replication) {
  const auto r = static_cast<std::uint64_t>(replication);
  const RngStream root(spec.master_seed, {r});
  ReplicationData d;
  d.X = standardize_columns(sample_design(spec.n, spec.p, toeplitz_sigma(spec.p, spec.rho), root.child(0)));

  if (spec.pi > 0.0) {
    const double a = spec.mechanism == Mechanism::mcar ? 0.0 : spec.mnar_a;
    d.observed = generate_missingness(d.X, MissingnessSpec::calibrated(a, spec.pi), root.child(1));
  } else {
    d.observed = IncompleteMatrix::complete(d.X);
  }

  const RngStream signal = root.child(2);
  auto eng = signal.child(0).engine();
  std::vector<Eigen::Index> cols(static_cast<std::size_t>(spec.p));
  std::iota(cols.begin(), cols.end(), Eigen::Index{0});
  std::shuffle(cols.begin(), cols.end(), eng);
  std::bernoulli_distribution coin(0.5);
  d.beta0 = RealVector::Zero(spec.p);
  for (Eigen::Index j = 0; j < spec.s; ++j)
    d.beta0(cols[static_cast<std::size_t>(j)]) = coin(eng) ? spec.beta_scale : -spec.beta_scale;

  d.omega0 = RealVector::Zero(spec.n);
  if (spec.k > 0) {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(spec.n));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    std::shuffle(rows.begin(), rows.end(), eng);
    for (Eigen::Index i = 0; i < spec.k; ++i)
      d.omega0(rows[static_cast<std::size_t>(i)]) = coin(eng) ? spec.corruption_scale : -spec.corruption_scale;
  }
  const RealVector eps = spec.sigma_noise * standard_normal_vector(spec.n, signal.child(1));
  d.y = d.X * d.beta0 + std::sqrt(static_cast<double>(spec.n)) * d.omega0 + eps;
  d.fit_seed = root.child(3).derived_seed();
  return d;
}

ReplicationRecord run_replication(const SimulationSpec& spec, const ReplicationData& data,
                                  EstimatorTag estimator, int replication) {
  ReplicationRecord rec;
  rec.replication = replication;
  rec.estimator = estimator;
  RealVector beta_hat;
  std::optional<OracleThreshold> oracle;

  if (estimator == EstimatorTag::tjp) {
    const DenseMatrix imputed = spec.imputation == Imputation::mean ? mean_impute(data.observed)
                                                                    : zero_impute(data.observed);
    const DenseMatrix Xt = standardize_columns(imputed);
    std::optional<IndexSet> cols;
    if (spec.restrict_corruption_rows) cols = data.observed.incomplete_rows;
    const JpSolution jp = solve_jp(Xt, data.y, spec.lambda, cols);
    if (!jp.ok()) throw SolverError("justice pursuit: " + std::string(to_string(jp.status)));
    oracle = oracle_s_threshold(jp.beta, spec.s);
    beta_hat = hard_threshold(jp.beta, oracle->tau);
    rec.tau = oracle->tau;
  } else {
    RlzConfig cfg;
    cfg.lambda = spec.lambda;
    cfg.dictionaries = spec.M;
    cfg.master_seed = data.fit_seed;
    if (spec.tuning == Tuning::oracle_s) cfg.tau = 0.0;
    MissingDataOptions mopts;
    mopts.imputation = spec.imputation;
    mopts.restrict_corruption_rows = spec.restrict_corruption_rows;
    mopts.without_omega = estimator == EstimatorTag::lass0;
    QutSpec qut;
    qut.alpha = spec.alpha;
    qut.n_mc = spec.n_mc;
    MissingDataFit mf = rlz_with_missing(data.y, data.observed, cfg, qut, {}, mopts);
    if (spec.tuning == Tuning::oracle_s) {
      oracle = oracle_s_threshold(mf.fit.beta_med, spec.s);
      apply_threshold(mf.fit, oracle->tau);
    }
    beta_hat = mf.fit.beta_hat;
    rec.tau = mf.fit.tau_used;
  }

  rec.psr = psr_indicator(beta_hat, data.beta0);
  rec.s_tpp = s_tpp(beta_hat, data.beta0);
  rec.s_fdp = s_fdp(beta_hat, data.beta0);
  rec.support_size = (beta_hat.array() != 0.0).count();
  if (oracle) {
    rec.tie_at_cut = oracle->tie_at_cut;
    rec.short_support = oracle->short_support;
    if (!rec.tie_at_cut && !rec.short_support) {
      if (rec.support_size != spec.s)
        throw std::logic_error("oracle-s support size differs from s without a tie");
      if (std::abs(rec.s_fdp - (1.0 - rec.s_tpp)) > 1e-12)
        throw std::logic_error("s-FDP != 1 - s-TPP under oracle-s tuning without a tie");
    }
  }
  return rec;
}

ExperimentResult run_experiment(const SimulationSpec& spec, unsigned workers) {
  spec.validate();
  const auto reps = static_cast<std::size_t>(spec.replications);
  const std::size_t E = spec.estimators.size();
  std::vector<ReplicationRecord> raw(reps * E);
  std::vector<double> seconds(reps * E, 0.0);

  parallel_for(reps, workers, [&](std::size_t r) {
    const ReplicationData data = draw_replication(spec, static_cast<int>(r));
    for (std::size_t e = 0; e < E; ++e) {
      const auto start = std::chrono::steady_clock::now();
      ReplicationRecord& rec = raw[r * E + e];
      try {
        rec = run_replication(spec, data, spec.estimators[e], static_cast<int>(r));
      } catch (const SolverError& err) {
        rec = ReplicationRecord{};
        rec.replication = static_cast<int>(r);
        rec.estimator = spec.estimators[e];
        rec.failed = true;
        rec.error = err.what();
      }
      seconds[r * E + e] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  });

  ExperimentResult out;
  for (std::size_t e = 0; e < E; ++e) {
    MetricsRecord m;
    m.estimator = spec.estimators[e];
    m.tuning = spec.tuning;
    std::vector<double> psr, tpr, fdr;
    for (std::size_t r = 0; r < reps; ++r) {
      const ReplicationRecord& rec = raw[r * E + e];
      m.runtime_seconds += seconds[r * E + e];
      if (rec.failed) {
        ++m.failures;
        continue;
      }
      psr.push_back(rec.psr);
      tpr.push_back(rec.s_tpp);
      fdr.push_back(rec.s_fdp);
    }
    m.replications = static_cast<int>(psr.size());
    if (m.replications > 0) {
      const double count = static_cast<double>(m.replications);
      auto mean = [&](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / count; };
      auto se = [&](const std::vector<double>& v, double mu) {
        if (v.size() < 2) return 0.0;
        double ss = 0.0;
        for (double x : v) ss += (x - mu) * (x - mu);
        return std::sqrt(ss / (count - 1.0) / count);
      };
      m.psr = mean(psr);
      m.psr_se = std::sqrt(m.psr * (1.0 - m.psr) / count);
      m.s_tpr = mean(tpr);
      m.s_tpr_se = se(tpr, m.s_tpr);
      m.s_fdr = mean(fdr);
      m.s_fdr_se = se(fdr, m.s_fdr);
    }
    out.metrics.push_back(m);
  }
  out.raw = std::move(raw);
  return out;
}

std::string metrics_csv(const std::vector<MetricsRecord>& metrics) {
  std::string out = "estimator,tuning,replications,failures,psr,psr_se,s_tpr,s_tpr_se,s_fdr,s_fdr_se\n";
  for (const auto& m : metrics) {
    out += std::string(to_string(m.estimator)) + "," + std::string(to_string(m.tuning)) + "," +
           std::to_string(m.replications) + "," + std::to_string(m.failures) + "," + format_double(m.psr) +
           "," + format_double(m.psr_se) + "," + format_double(m.s_tpr) + "," + format_double(m.s_tpr_se) +
           "," + format_double(m.s_fdr) + "," + format_double(m.s_fdr_se) + "\n";
  }
  return out;
}

std::string raw_csv(const std::vector<ReplicationRecord>& raw) {
  std::string out = "replication,estimator,failed,psr,s_tpp,s_fdp,support_size,tau,tie_at_cut\n";
  for (const auto& r : raw) {
    out += std::to_string(r.replication) + "," + std::string(to_string(r.estimator)) + "," +
           (r.failed ? "1" : "0") + "," + std::to_string(r.psr) + "," + format_double(r.s_tpp) + "," +
           format_double(r.s_fdp) + "," + std::to_string(r.support_size) + "," + format_double(r.tau) + "," +
           (r.tie_at_cut ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace rlz
