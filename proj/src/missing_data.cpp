#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "rlz/errors.hpp"
#include "rlz/missing_data.hpp"

namespace rlz {

IncompleteMatrix IncompleteMatrix::from_values(DenseMatrix values) {
  IncompleteMatrix inc;
  inc.mask = MissingMask::Zero(values.rows(), values.cols());
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      if (std::isnan(values(i, j))) inc.mask(i, j) = 1;
      else if (!std::isfinite(values(i, j)))
        throw InputError("X has a non-finite entry at (" + std::to_string(i) + ", " +
                         std::to_string(j) + ")");
    }
  }
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    if (inc.mask.row(i).any()) inc.incomplete_rows.push_back(i);
  inc.values = std::move(values);
  return inc;
}

IncompleteMatrix IncompleteMatrix::complete(const DenseMatrix& X) {
  require_finite(X, "X");
  return from_values(X);
}

std::size_t IncompleteMatrix::missing_count() const {
  return static_cast<std::size_t>(mask.cast<int>().sum());
}

double logistic_missing_prob(double x, double a, double b) {
  return 1.0 / (1.0 + std::exp(-a * std::abs(x) - b));
}

double expected_missing_rate(double a, double b) {
  // 2 * int_0^inf phi(x) f(x) dx on panels; the density is below 1e-31 past 12.
  static constexpr double kPanels[] = {0.0, 1.0, 2.0, 4.0, 7.0, 12.0};
  const double inv_sqrt_2pi = 0.3989422804014327;
  auto integrand = [&](double x) {
    return inv_sqrt_2pi * std::exp(-0.5 * x * x) * logistic_missing_prob(x, a, b);
  };
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < std::size(kPanels); ++k)
    total += boost::math::quadrature::gauss<double, 64>::integrate(integrand, kPanels[k], kPanels[k + 1]);
  return 2.0 * total;
}

double solve_b_for_pi(double a, double pi) {
  if (!(pi > 0.0 && pi < 1.0)) throw InputError("pi must lie in (0, 1)");
  if (!(a >= 0.0) || !std::isfinite(a)) throw InputError("a must be >= 0");
  double lo = -50.0, hi = 50.0;
  if (expected_missing_rate(a, lo) > pi || expected_missing_rate(a, hi) < pi)
    throw InputError("missing proportion " + std::to_string(pi) + " is not reachable with a = " +
                     std::to_string(a));
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (expected_missing_rate(a, mid) < pi) lo = mid;
    else hi = mid;
  }
  const double b = 0.5 * (lo + hi);
  if (std::abs(expected_missing_rate(a, b) - pi) > 1e-8)
    throw SolverError("solve_b_for_pi: bisection did not reach 1e-8");
  return b;
}

MissingnessSpec MissingnessSpec::calibrated(double a, double pi) {
  return MissingnessSpec{a, pi, solve_b_for_pi(a, pi)};
}

IncompleteMatrix generate_missingness(const DenseMatrix& X, const MissingnessSpec& spec,
                                      const RngStream& stream) {
  require_finite(X, "X");
  if (!(spec.a >= 0.0)) throw InputError("a must be >= 0");
  auto eng = stream.engine();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  DenseMatrix values = X;
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      if (unif(eng) < logistic_missing_prob(X(i, j), spec.a, spec.b))
        values(i, j) = std::numeric_limits<double>::quiet_NaN();
  return IncompleteMatrix::from_values(std::move(values));
}

DenseMatrix impute_with(const IncompleteMatrix& inc, const RealVector& fill) {
  if (fill.size() != inc.cols()) throw InputError("impute_with: one fill value per column");
  DenseMatrix out = inc.values;
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      if (inc.mask(i, j)) out(i, j) = fill(j);
  return out;
}

DenseMatrix mean_impute(const IncompleteMatrix& inc) {
  RealVector fill(inc.cols());
  for (Eigen::Index j = 0; j < inc.cols(); ++j) {
    double sum = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < inc.rows(); ++i) {
      if (inc.mask(i, j)) continue;
      sum += inc.values(i, j);
      ++count;
    }
    if (count == 0) throw InputError("column " + std::to_string(j) + " has no observed entry");
    fill(j) = sum / static_cast<double>(count);
  }
  return impute_with(inc, fill);
}

DenseMatrix zero_impute(const IncompleteMatrix& inc) {
  return impute_with(inc, RealVector::Zero(inc.cols()));
}

RealVector implied_corruption(const DenseMatrix& X, const DenseMatrix& X_tilde,
                              const RealVector& beta) {
  if (X.rows() != X_tilde.rows() || X.cols() != X_tilde.cols() || beta.size() != X.cols())
    throw InputError("implied_corruption: dimension mismatch");
  return (X - X_tilde) * beta / std::sqrt(static_cast<double>(X.rows()));
}

MissingDataFit rlz_with_missing(const RealVector& y, const IncompleteMatrix& inc,
                                const RlzConfig& cfg, const std::optional<QutSpec>& qut,
                                const SolverOptions& opts, const MissingDataOptions& mopts) {
  if (y.size() != inc.rows())
    throw InputError("dim(y) = " + std::to_string(y.size()) + " does not match rows(X) = " +
                     std::to_string(inc.rows()));
  const DenseMatrix imputed = mopts.imputation == Imputation::mean ? mean_impute(inc) : zero_impute(inc);
  Standardization st = standardize(imputed);

  RlzConfig run = cfg;
  if (!run.corruption_cols && mopts.restrict_corruption_rows) run.corruption_cols = inc.incomplete_rows;

  MissingDataFit out;
  if (run.tau) {
    out.fit = mopts.without_omega ? lasso_zero(st.matrix, y, run, opts)
                                  : robust_lasso_zero(st.matrix, y, run, opts);
  } else {
    CalibratedFit cf = robust_lasso_zero_qut(st.matrix, y, run, qut.value_or(QutSpec{}), opts,
                                             mopts.without_omega);
    out.fit = std::move(cf.fit);
    out.qut = std::move(cf.qut);
  }
  out.center = std::move(st.center);
  out.scale = std::move(st.scale);
  out.incomplete_rows = inc.incomplete_rows;
  out.beta_original_scale = out.fit.beta_hat.cwiseQuotient(out.scale);
  return out;
}

}  // namespace rlz
