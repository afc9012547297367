#pragma once

#include <cstdint>
#include <optional>

#include "rlz/calibration.hpp"
#include "rlz/core.hpp"
#include "rlz/estimators.hpp"

namespace rlz {

using MissingMask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Design with missing entries. Missing positions of `values` hold NaN.
struct IncompleteMatrix {
  DenseMatrix values;
  MissingMask mask;  // 1 where missing
  IndexSet incomplete_rows;

  // NaN entries of `values` are treated as missing.
  static IncompleteMatrix from_values(DenseMatrix values);
  static IncompleteMatrix complete(const DenseMatrix& X);

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  std::size_t missing_count() const;
};

// P(missing | x) = 1 / (1 + exp(-a|x| - b)).
double logistic_missing_prob(double x, double a, double b);

// E[logistic_missing_prob(x, a, b)] for x ~ N(0, 1).
double expected_missing_rate(double a, double b);

// b with expected_missing_rate(a, b) = pi, by bisection on (-50, 50).
// Throws InputError if pi is outside (0, 1), a < 0, or pi is unreachable.
double solve_b_for_pi(double a, double pi);

struct MissingnessSpec {
  double a = 0.0;
  double pi = 0.2;
  double b = 0.0;

  // Fills b from (a, pi).
  static MissingnessSpec calibrated(double a, double pi);
};

// Entry (i, j) is masked independently with probability
// logistic_missing_prob(X(i, j), a, b); uniforms are drawn column-major.
IncompleteMatrix generate_missingness(const DenseMatrix& X, const MissingnessSpec& spec,
                                      const RngStream& stream);

// Observed entries are copied bit-exactly. mean_impute throws InputError for a
// column with no observed entry.
DenseMatrix mean_impute(const IncompleteMatrix& inc);
DenseMatrix zero_impute(const IncompleteMatrix& inc);
// Missing entries of column j become fill(j).
DenseMatrix impute_with(const IncompleteMatrix& inc, const RealVector& fill);

// (X - X_tilde) beta / sqrt(n): the corruption induced by imputation.
RealVector implied_corruption(const DenseMatrix& X, const DenseMatrix& X_tilde,
                              const RealVector& beta);

enum class Imputation { mean, zero };

struct MissingDataOptions {
  Imputation imputation = Imputation::mean;
  // Corruption variables only for rows with a missing entry. Ignored when
  // cfg.corruption_cols is set explicitly.
  bool restrict_corruption_rows = true;
  // Fit the plain lasso-zero instead.
  bool without_omega = false;
};

struct MissingDataFit {
  RlzFit fit;
  std::optional<QutResult> qut;
  RealVector center;
  RealVector scale;
  IndexSet incomplete_rows;
  // beta_hat divided by the column scales: coefficients on the imputed,
  // uncentered covariates.
  RealVector beta_original_scale;
};

// Impute, center and rescale columns to norm sqrt(n), then fit. With cfg.tau
// unset the threshold is calibrated by QUT on the same matrix (qut, or a
// default QutSpec when not given).
MissingDataFit rlz_with_missing(const RealVector& y, const IncompleteMatrix& inc,
                                const RlzConfig& cfg, const std::optional<QutSpec>& qut = std::nullopt,
                                const SolverOptions& opts = {}, const MissingDataOptions& mopts = {});

}  // namespace rlz
