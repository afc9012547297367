#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rlz/core.hpp"
#include "rlz/estimators.hpp"
#include "rlz/missing_data.hpp"

namespace rlz {

// ---------------------------------------------------------------------------
// Metrics. All depend only on (beta_hat, beta0).

// Fraction of true nonzeros whose sign is recovered. InputError if beta0 = 0.
double s_tpp(const RealVector& beta_hat, const RealVector& beta0);
// Wrong-sign discoveries over max(1, |support(beta_hat)|).
double s_fdp(const RealVector& beta_hat, const RealVector& beta0);
// 1 iff sign(beta_hat) = sign(beta0) componentwise.
int psr_indicator(const RealVector& beta_hat, const RealVector& beta0);

struct OracleThreshold {
  double tau = 0.0;
  Eigen::Index support_size = 0;
  // Several magnitudes equal the s-th largest one; all of them are kept.
  bool tie_at_cut = false;
  // Fewer than s nonzero magnitudes were available.
  bool short_support = false;
};

// tau = (s+1)-th largest |v|, so exactly s entries exceed it when there is no
// tie. With a tie at the cut, tau drops to the next smaller magnitude and the
// support grows beyond s. With s = p, tau sits just below the smallest
// magnitude. Requires 1 <= s <= p.
OracleThreshold oracle_s_threshold(const RealVector& v, Eigen::Index s);

// ---------------------------------------------------------------------------
// Simulation protocol.

enum class Mechanism { mcar, mnar };
enum class Tuning { oracle_s, automatic };
enum class EstimatorTag { rlass0, lass0, tjp };

std::string_view to_string(EstimatorTag e);
std::string_view to_string(Tuning t);

struct SimulationSpec {
  Eigen::Index n = 100;
  Eigen::Index p = 200;
  double rho = 0.0;
  Eigen::Index s = 3;
  double sigma_noise = 0.5;
  // Nonzero coefficients are beta_scale * (+-1), signs uniform.
  double beta_scale = 1.0;
  Mechanism mechanism = Mechanism::mcar;
  // Logistic slope for the MNAR mechanism.
  double mnar_a = 5.0;
  // Target missing proportion; 0 disables missingness.
  double pi = 0.2;
  // Extra gross corruptions added directly to y: k rows, each
  // sqrt(n) * corruption_scale * (+-1).
  Eigen::Index k = 0;
  double corruption_scale = 1.0;
  int replications = 100;
  std::vector<EstimatorTag> estimators = {EstimatorTag::rlass0, EstimatorTag::lass0};
  Tuning tuning = Tuning::oracle_s;
  int M = 20;
  double lambda = 1.0;
  double alpha = 0.05;
  int n_mc = 500;
  Imputation imputation = Imputation::mean;
  bool restrict_corruption_rows = true;
  std::uint64_t master_seed = 0;

  // Throws InputError naming the offending field.
  void validate() const;
};

// Reads the JSON object form; unknown keys are rejected.
SimulationSpec simulation_spec_from_json(const std::string& text);
std::string simulation_spec_to_json(const SimulationSpec& spec);

struct ReplicationRecord {
  int replication = 0;
  EstimatorTag estimator = EstimatorTag::rlass0;
  bool failed = false;
  std::string error;
  int psr = 0;
  double s_tpp = 0.0;
  double s_fdp = 0.0;
  Eigen::Index support_size = 0;
  double tau = 0.0;
  bool tie_at_cut = false;
  bool short_support = false;
};

struct MetricsRecord {
  EstimatorTag estimator = EstimatorTag::rlass0;
  Tuning tuning = Tuning::oracle_s;
  int replications = 0;
  int failures = 0;
  double psr = 0.0;
  double psr_se = 0.0;
  double s_tpr = 0.0;
  double s_tpr_se = 0.0;
  double s_fdr = 0.0;
  double s_fdr_se = 0.0;
  double runtime_seconds = 0.0;
};

struct ExperimentResult {
  std::vector<MetricsRecord> metrics;
  // Ordered by (replication, estimator).
  std::vector<ReplicationRecord> raw;
};

// One replication's data, exposed for tests and tooling.
struct ReplicationData {
  DenseMatrix X;  // standardized complete design
  IncompleteMatrix observed;
  RealVector beta0;
  RealVector omega0;  // direct corruptions, n entries
  RealVector y;
  std::uint64_t fit_seed = 0;
};
ReplicationData draw_replication(const SimulationSpec& spec, int replication);

// Runs one estimator on one replication.
ReplicationRecord run_replication(const SimulationSpec& spec, const ReplicationData& data,
                                  EstimatorTag estimator, int replication);

// Replications run on up to `workers` threads; results do not depend on it.
ExperimentResult run_experiment(const SimulationSpec& spec, unsigned workers = 1);

std::string metrics_csv(const std::vector<MetricsRecord>& metrics);
std::string raw_csv(const std::vector<ReplicationRecord>& raw);

// ---------------------------------------------------------------------------
// Text formats.

// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  DenseMatrix values;  // NA entries as NaN
};

// Comma-separated numbers with a header row; `NA` marks a missing entry.
CsvTable read_csv_table(const std::string& text);
// Single column of numbers, optional header line.
RealVector read_csv_vector(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace rlz
