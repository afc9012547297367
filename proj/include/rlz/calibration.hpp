#pragma once

#include <optional>
#include <vector>

#include "rlz/estimators.hpp"

namespace rlz {

struct QutSpec {
  double alpha = 0.05;
  int n_mc = 500;
  double lambda = 1.0;
  int dictionaries = 20;
  std::uint64_t master_seed = 0;
  // Must match the fit the threshold will be applied to.
  std::optional<IndexSet> corruption_cols;
  bool rescale_dictionary = false;
  PivotScaleRule pivot_rule = PivotScaleRule::pooled_nonzero_median;
  // Calibrate the plain lasso-zero statistic instead (no corruption block).
  bool without_omega = false;
  unsigned workers = 1;
};

struct QutResult {
  // Set once a data fit is available: pivot_quantile * pivot_scale(fit).
  std::optional<double> tau;
  double pivot_quantile = 0.0;
  // Pivotized null statistics, in draw order; dropped draws are omitted.
  std::vector<double> mc_statistics;
  int dropped_draws = 0;
};

// s(y) from the stored noise coefficients of the successful dictionaries.
// Throws SolverError when no dictionary succeeded or the scale is zero.
double pivot_scale(const RlzFit& fit, PivotScaleRule rule = PivotScaleRule::pooled_nonzero_median);

// ||beta_med||_inf / s(y).
double pivot_statistic(const RlzFit& fit, PivotScaleRule rule);

// Linear-interpolation (type 7) quantile at probability 1 - alpha.
double upper_quantile(std::vector<double> values, double alpha);

// Monte Carlo null calibration on the design X: draw j uses noise from stream
// (master_seed, [kQutStream, j]) and dictionaries from (master_seed, [kQutStream, j, k]).
// Throws InputError for invalid specs and SolverError when more than 10% of the
// draws fail.
QutResult qut_threshold(const DenseMatrix& X, const QutSpec& spec, const SolverOptions& opts = {});

inline constexpr std::uint64_t kQutStream = 0x717574;

struct CalibratedFit {
  RlzFit fit;
  QutResult qut;
};

// Runs qut_threshold and then the data fit with tau = pivot_quantile * s(y).
// The QUT spec inherits lambda, M, seed and corruption columns from cfg.
CalibratedFit robust_lasso_zero_qut(const DenseMatrix& X, const RealVector& y, RlzConfig cfg,
                                    QutSpec spec, const SolverOptions& opts = {},
                                    bool without_omega = false);

}  // namespace rlz
