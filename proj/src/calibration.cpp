#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "rlz/calibration.hpp"
#include "rlz/errors.hpp"

namespace rlz {
namespace {

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double med = v[mid];
  if (v.size() % 2 == 0)
    med = 0.5 * (med + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  return med;
}

}  // namespace

double pivot_scale(const RlzFit& fit, PivotScaleRule rule) {
  std::vector<const RealVector*> gammas;
  for (const auto& g : fit.gamma_all)
    if (g.size() > 0) gammas.push_back(&g);
  if (gammas.empty()) throw SolverError("pivot_scale: no successful dictionary");

  double scale = 0.0;
  if (rule == PivotScaleRule::dictionary_mad) {
    std::vector<double> per_dict;
    for (const RealVector* g : gammas) {
      std::vector<double> vals(g->data(), g->data() + g->size());
      const double med = median_of(vals);
      for (double& v : vals) v = std::abs(v - med);
      per_dict.push_back(median_of(std::move(vals)));
    }
    scale = median_of(std::move(per_dict));
  } else {
    std::vector<double> pooled;
    double largest = 0.0;
    for (const RealVector* g : gammas) largest = std::max(largest, g->cwiseAbs().maxCoeff());
    const double cut = rule == PivotScaleRule::pooled_nonzero_median ? 1e-12 * largest : -1.0;
    for (const RealVector* g : gammas)
      for (Eigen::Index i = 0; i < g->size(); ++i)
        if (std::abs((*g)(i)) > cut) pooled.push_back(std::abs((*g)(i)));
    if (!pooled.empty()) scale = median_of(std::move(pooled));
  }
  if (!(scale > 0.0)) throw SolverError("pivot_scale: noise coefficients have zero scale");
  return scale;
}

double pivot_statistic(const RlzFit& fit, PivotScaleRule rule) {
  const double num = fit.beta_med.size() > 0 ? fit.beta_med.cwiseAbs().maxCoeff() : 0.0;
  return num / pivot_scale(fit, rule);
}

double upper_quantile(std::vector<double> values, double alpha) {
  if (values.empty()) throw InputError("upper_quantile: no values");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  std::sort(values.begin(), values.end());
  const double h = (1.0 - alpha) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

QutResult qut_threshold(const DenseMatrix& X, const QutSpec& spec, const SolverOptions& opts) {
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (spec.n_mc < 50) throw InputError("QUT needs at least 50 Monte Carlo draws");
  if (X.rows() < 1 || X.cols() < 1) throw InputError("X must be non-empty");
  require_finite(X, "X");

  RlzConfig cfg;
  cfg.lambda = spec.lambda;
  cfg.dictionaries = spec.dictionaries;
  cfg.master_seed = spec.master_seed;
  cfg.corruption_cols = spec.corruption_cols;
  cfg.rescale_dictionary = spec.rescale_dictionary;
  cfg.pivot_rule = spec.pivot_rule;
  cfg.workers = 1;

  const auto draws = static_cast<std::size_t>(spec.n_mc);
  std::vector<std::optional<double>> stats(draws);
  parallel_for(draws, spec.workers, [&](std::size_t j) {
    const RngStream draw(spec.master_seed, {kQutStream, j});
    const RealVector eps = standard_normal_vector(X.rows(), draw);
    try {
      const RlzFit fit = median_fit(X, eps, cfg, opts, draw, !spec.without_omega);
      stats[j] = pivot_statistic(fit, spec.pivot_rule);
    } catch (const SolverError&) {
      stats[j] = std::nullopt;
    }
  });

  QutResult out;
  for (const auto& s : stats) {
    if (s) out.mc_statistics.push_back(*s);
    else ++out.dropped_draws;
  }
  if (10 * static_cast<std::size_t>(out.dropped_draws) > draws)
    throw SolverError("QUT: " + std::to_string(out.dropped_draws) + " of " +
                      std::to_string(draws) + " Monte Carlo draws failed");
  out.pivot_quantile = upper_quantile(out.mc_statistics, spec.alpha);
  return out;
}

CalibratedFit robust_lasso_zero_qut(const DenseMatrix& X, const RealVector& y, RlzConfig cfg,
                                    QutSpec spec, const SolverOptions& opts, bool without_omega) {
  spec.lambda = cfg.lambda;
  spec.dictionaries = cfg.dictionaries;
  spec.master_seed = cfg.master_seed;
  spec.corruption_cols = cfg.corruption_cols;
  spec.rescale_dictionary = cfg.rescale_dictionary;
  spec.pivot_rule = cfg.pivot_rule;
  spec.without_omega = without_omega;

  CalibratedFit out;
  out.qut = qut_threshold(X, spec, opts);
  out.fit = median_fit(X, y, cfg, opts, RngStream(cfg.master_seed), !without_omega);
  const double tau = out.qut.pivot_quantile * pivot_scale(out.fit, cfg.pivot_rule);
  apply_threshold(out.fit, tau, cfg.tau_omega);
  out.qut.tau = tau;
  return out;
}

}  // namespace rlz
