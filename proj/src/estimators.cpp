#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rlz/calibration.hpp"
#include "rlz/errors.hpp"
#include "rlz/estimators.hpp"

namespace rlz {

int RlzFit::failed_dictionaries() const {
  return static_cast<int>(std::count_if(per_dictionary_status.begin(), per_dictionary_status.end(),
                                        [](LpStatus s) { return s != LpStatus::optimal; }));
}

RealVector hard_threshold(const RealVector& v, double tau) {
  if (!(tau >= 0.0)) throw InputError("hard_threshold: tau must be >= 0");
  RealVector out = v;
  for (Eigen::Index j = 0; j < out.size(); ++j)
    if (!(std::abs(out(j)) > tau)) out(j) = 0.0;
  return out;
}

RealVector median_aggregate(const std::vector<RealVector>& vectors) {
  if (vectors.empty()) throw InputError("median_aggregate: no vectors");
  const Eigen::Index len = vectors.front().size();
  for (const auto& v : vectors)
    if (v.size() != len) throw InputError("median_aggregate: length mismatch");
  const std::size_t m = vectors.size();
  const std::size_t mid = m / 2;
  RealVector out(len);
  std::vector<double> col(m);
  for (Eigen::Index j = 0; j < len; ++j) {
    for (std::size_t k = 0; k < m; ++k) col[k] = vectors[k](j);
    std::nth_element(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(mid), col.end());
    double med = col[mid];
    if (m % 2 == 0) {
      const double below = *std::max_element(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(mid));
      med = 0.5 * (below + med);
    }
    out(j) = med;
  }
  return out;
}

DenseMatrix noise_dictionary(Eigen::Index n, const RngStream& root, int k, bool rescale) {
  DenseMatrix G = standard_normal_matrix(n, n, root.child(static_cast<std::uint64_t>(k)));
  if (rescale) {
    const double target = std::sqrt(static_cast<double>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
      const double nrm = G.col(j).norm();
      if (nrm > 0.0) G.col(j) *= target / nrm;
    }
  }
  return G;
}

namespace {

void check_config(const RlzConfig& cfg) {
  if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda)) throw InputError("lambda must be > 0");
  if (cfg.dictionaries < 1) throw InputError("number of dictionaries must be >= 1");
  if (cfg.tau && !(*cfg.tau >= 0.0)) throw InputError("tau must be >= 0");
  if (cfg.tau_omega && !(*cfg.tau_omega >= 0.0)) throw InputError("tau_omega must be >= 0");
}

RlzFit fit_with_threshold(const DenseMatrix& X, const RealVector& y, const RlzConfig& cfg,
                          const SolverOptions& opts, std::optional<double> pivot_quantile,
                          bool with_omega) {
  check_config(cfg);
  if (!cfg.tau && !pivot_quantile)
    throw InputError("automatic threshold requested but no QUT pivot quantile was supplied");
  RlzFit fit = median_fit(X, y, cfg, opts, RngStream(cfg.master_seed), with_omega);
  const double tau = cfg.tau ? *cfg.tau : *pivot_quantile * pivot_scale(fit, cfg.pivot_rule);
  apply_threshold(fit, tau, cfg.tau_omega);
  return fit;
}

}  // namespace

RlzFit median_fit(const DenseMatrix& X, const RealVector& y, const RlzConfig& cfg,
                  const SolverOptions& opts, const RngStream& dictionary_root, bool with_omega) {
  check_config(cfg);
  const Eigen::Index n = X.rows();
  if (y.size() != n)
    throw InputError("dim(y) = " + std::to_string(y.size()) + " does not match rows(X) = " +
                     std::to_string(n));
  const std::optional<IndexSet> cols = with_omega ? cfg.corruption_cols : std::optional<IndexSet>(IndexSet{});

  const auto M = static_cast<std::size_t>(cfg.dictionaries);
  std::vector<JpSolution> sols(M);
  parallel_for(M, cfg.workers, [&](std::size_t k) {
    const DenseMatrix G = noise_dictionary(n, dictionary_root, static_cast<int>(k), cfg.rescale_dictionary);
    sols[k] = solve_augmented_jp(X, y, cfg.lambda, G, opts, cols);
  });

  RlzFit fit;
  std::vector<RealVector> betas, omegas;
  fit.gamma_all.resize(M);
  for (std::size_t k = 0; k < M; ++k) {
    fit.per_dictionary_status.push_back(sols[k].status);
    if (!sols[k].ok()) {
      fit.warnings.push_back("dictionary " + std::to_string(k) + ": " +
                             std::string(to_string(sols[k].status)));
      continue;
    }
    betas.push_back(sols[k].beta);
    if (with_omega) omegas.push_back(sols[k].omega_full(n));
    fit.gamma_all[k] = *sols[k].gamma;
  }
  if (2 * static_cast<std::size_t>(fit.failed_dictionaries()) > M)
    throw SolverError(std::to_string(fit.failed_dictionaries()) + " of " + std::to_string(M) +
                      " dictionary solves failed");

  fit.beta_med = median_aggregate(betas);
  if (with_omega) fit.omega_med = median_aggregate(omegas);
  fit.beta_hat = fit.beta_med;
  if (fit.omega_med) fit.omega_hat = fit.omega_med;
  return fit;
}

void apply_threshold(RlzFit& fit, double tau, std::optional<double> tau_omega) {
  fit.tau_used = tau;
  fit.tau_omega_used = tau_omega.value_or(tau);
  fit.beta_hat = hard_threshold(fit.beta_med, tau);
  if (fit.omega_med) fit.omega_hat = hard_threshold(*fit.omega_med, fit.tau_omega_used);
}

RlzFit robust_lasso_zero(const DenseMatrix& X, const RealVector& y, const RlzConfig& cfg,
                         const SolverOptions& opts, std::optional<double> pivot_quantile) {
  return fit_with_threshold(X, y, cfg, opts, pivot_quantile, true);
}

RlzFit lasso_zero(const DenseMatrix& X, const RealVector& y, const RlzConfig& cfg,
                  const SolverOptions& opts, std::optional<double> pivot_quantile) {
  return fit_with_threshold(X, y, cfg, opts, pivot_quantile, false);
}

TjpResult tjp(const DenseMatrix& X, const RealVector& y, double lambda, double tau,
              const std::optional<IndexSet>& corruption_cols, const SolverOptions& opts) {
  if (!(tau >= 0.0)) throw InputError("tau must be >= 0");
  TjpResult out;
  out.jp = solve_jp(X, y, lambda, corruption_cols, opts);
  if (!out.jp.ok()) throw SolverError("justice pursuit: " + std::string(to_string(out.jp.status)));
  out.beta_hat = hard_threshold(out.jp.beta, tau);
  out.omega_hat = hard_threshold(out.jp.omega_full(X.rows()), tau);
  return out;
}

std::optional<TauWindow> sign_recovery_window(
    const std::vector<std::pair<RealVector, RealVector>>& solutions, const SignVector& theta,
    const SignVector& theta_tilde) {
  if (solutions.empty()) return std::nullopt;
  TauWindow w{0.0, std::numeric_limits<double>::infinity()};
  auto fold = [&w](const RealVector& v, const SignVector& target) {
    if (v.size() != target.size()) throw InputError("sign_recovery_window: length mismatch");
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      const double a = std::abs(v(j));
      if (target(j) == 0) {
        w.lower = std::max(w.lower, a);
      } else {
        const int s = v(j) > 0 ? 1 : (v(j) < 0 ? -1 : 0);
        if (s != target(j)) return false;
        w.upper = std::min(w.upper, a);
      }
    }
    return true;
  };
  for (const auto& [beta, omega] : solutions) {
    if (!fold(beta, theta)) return std::nullopt;
    if (theta_tilde.size() > 0 && !fold(omega, theta_tilde)) return std::nullopt;
  }
  if (!(w.lower < w.upper)) return std::nullopt;
  return w;
}

}  // namespace rlz
