#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rlz/core.hpp"
#include "rlz/lp_solver.hpp"

namespace rlz {

// How the noise-coefficient scale s(y) used to pivotize thresholds is computed.
enum class PivotScaleRule {
  // Median of |gamma_i^(k)| pooled over dictionaries, ignoring exact zeros
  // (non-basic coefficients of the vertex solution).
  pooled_nonzero_median,
  // Median of all pooled |gamma_i^(k)|, zeros included.
  pooled_median,
  // Per-dictionary MAD of gamma^(k), then median over dictionaries.
  dictionary_mad,
};

struct RlzConfig {
  double lambda = 1.0;
  // Fixed threshold; std::nullopt requests a QUT-calibrated threshold.
  std::optional<double> tau;
  // Threshold for omega_med; defaults to the threshold used for beta.
  std::optional<double> tau_omega;
  int dictionaries = 20;
  std::uint64_t master_seed = 0;
  // Rows carrying a corruption variable; all n rows when unset.
  std::optional<IndexSet> corruption_cols;
  // Rescale every noise dictionary column to Euclidean norm sqrt(n).
  bool rescale_dictionary = false;
  PivotScaleRule pivot_rule = PivotScaleRule::pooled_nonzero_median;
  unsigned workers = 1;
};

struct RlzFit {
  RealVector beta_med;
  // n entries in row order, zero outside the corruption columns. Absent for
  // the plain lasso-zero fit.
  std::optional<RealVector> omega_med;
  // One noise-coefficient vector per dictionary; empty for failed solves.
  std::vector<RealVector> gamma_all;
  RealVector beta_hat;
  std::optional<RealVector> omega_hat;
  double tau_used = 0.0;
  double tau_omega_used = 0.0;
  std::vector<LpStatus> per_dictionary_status;
  std::vector<std::string> warnings;

  int failed_dictionaries() const;
};

// eta_tau(x) = x * 1(|x| > tau), componentwise. Throws InputError for tau < 0.
RealVector hard_threshold(const RealVector& v, double tau);

// Componentwise median; midpoint of the central order statistics when the
// count is even.
RealVector median_aggregate(const std::vector<RealVector>& vectors);

// Noise dictionary k: n x n standard normal entries from stream root.child(k).
DenseMatrix noise_dictionary(Eigen::Index n, const RngStream& root, int k, bool rescale);

// Solves the M dictionary problems and forms the medians; no thresholding
// (beta_hat = beta_med, tau_used = 0). Dictionaries come from dictionary_root.
// Throws SolverError when more than half of the dictionaries fail.
RlzFit median_fit(const DenseMatrix& X, const RealVector& y, const RlzConfig& cfg,
                  const SolverOptions& opts, const RngStream& dictionary_root,
                  bool with_omega = true);

// Sets beta_hat/omega_hat from the medians.
void apply_threshold(RlzFit& fit, double tau, std::optional<double> tau_omega = std::nullopt);

// Dictionaries come from streams (master_seed, [k]). A fixed cfg.tau is used
// as is. With cfg.tau unset, pivot_quantile must be given and the threshold is
// pivot_quantile * pivot_scale(fit); otherwise InputError.
RlzFit robust_lasso_zero(const DenseMatrix& X, const RealVector& y, const RlzConfig& cfg,
                         const SolverOptions& opts = {},
                         std::optional<double> pivot_quantile = std::nullopt);

// Same pipeline without the corruption block: basis pursuit on [X | G^(k)].
RlzFit lasso_zero(const DenseMatrix& X, const RealVector& y, const RlzConfig& cfg,
                  const SolverOptions& opts = {},
                  std::optional<double> pivot_quantile = std::nullopt);

struct TjpResult {
  RealVector beta_hat;
  RealVector omega_hat;  // n entries, row order
  JpSolution jp;
};

TjpResult tjp(const DenseMatrix& X, const RealVector& y, double lambda, double tau,
              const std::optional<IndexSet>& corruption_cols = std::nullopt,
              const SolverOptions& opts = {});

// Interval of thresholds tau for which sign(eta_tau(beta)) = theta and
// sign(eta_tau(omega)) = theta_tilde hold simultaneously for every candidate
// solution. Empty when no such tau exists. Pass theta_tilde of size 0 to
// ignore omega.
struct TauWindow {
  double lower;  // tau >= lower
  double upper;  // tau < upper
};
std::optional<TauWindow> sign_recovery_window(
    const std::vector<std::pair<RealVector, RealVector>>& solutions, const SignVector& theta,
    const SignVector& theta_tilde);

}  // namespace rlz
