#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "rlz/calibration.hpp"
#include "rlz/errors.hpp"

using namespace rlz;

namespace {

RealVector vec(std::initializer_list<double> v) {
  RealVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

RlzFit with_gammas(std::vector<RealVector> g) {
  RlzFit fit;
  fit.gamma_all = std::move(g);
  fit.beta_med = vec({1.0, -6.0});
  return fit;
}

}  // namespace

TEST_CASE("pivot_scale rules") {
  const RlzFit fit = with_gammas({vec({1, -1}), vec({3, 3})});
  CHECK(pivot_scale(fit, PivotScaleRule::pooled_median) == 2.0);
  CHECK(pivot_scale(fit, PivotScaleRule::pooled_nonzero_median) == 2.0);
  CHECK(pivot_statistic(fit, PivotScaleRule::pooled_median) == 3.0);

  const RlzFit flat = with_gammas({vec({0.7, 0.7, 0.7}), vec({0.7, -0.7, 0.7})});
  for (auto rule : {PivotScaleRule::pooled_median, PivotScaleRule::pooled_nonzero_median})
    CHECK(pivot_scale(flat, rule) == doctest::Approx(0.7));

  // Zeros are skipped by the default rule only.
  const RlzFit sparse = with_gammas({vec({0, 0, 0, 2}), vec({0, 4, 0, 0})});
  CHECK(pivot_scale(sparse, PivotScaleRule::pooled_nonzero_median) == 3.0);
  CHECK_THROWS_AS(pivot_scale(sparse, PivotScaleRule::pooled_median), SolverError);

  // MAD per dictionary: (1,2,3) -> 1, (0,0,4,8) -> median 2, deviations (2,2,2,6) -> 2.
  const RlzFit mad = with_gammas({vec({1, 2, 3}), vec({0, 0, 4, 8})});
  CHECK(pivot_scale(mad, PivotScaleRule::dictionary_mad) == 1.5);

  // Failed dictionaries (empty slots) are skipped.
  const RlzFit partial = with_gammas({RealVector(), vec({5, -5})});
  CHECK(pivot_scale(partial) == 5.0);
  CHECK_THROWS_AS(pivot_scale(with_gammas({RealVector()})), SolverError);
  CHECK_THROWS_AS(pivot_scale(with_gammas({vec({0, 0})})), SolverError);
}

TEST_CASE("upper_quantile") {
  CHECK(upper_quantile({5, 1, 3}, 0.5) == 3.0);
  CHECK(upper_quantile({4, 1, 3, 2}, 0.5) == 2.5);
  // h = 0.95 * 4 = 3.8 on sorted (1..5).
  CHECK(upper_quantile({1, 2, 3, 4, 5}, 0.05) == doctest::Approx(4.8));
  CHECK(upper_quantile({7}, 0.3) == 7.0);
  CHECK_THROWS_AS(upper_quantile({}, 0.1), InputError);
  CHECK_THROWS_AS(upper_quantile({1, 2}, 1.0), InputError);
}

TEST_CASE("qut_threshold") {
  const DenseMatrix X = standardize_columns(standard_normal_matrix(12, 20, RngStream(6)));
  QutSpec spec;
  spec.n_mc = 60;
  spec.dictionaries = 4;
  spec.master_seed = 31;

  const QutResult base = qut_threshold(X, spec);
  CHECK(base.mc_statistics.size() == 60);
  CHECK(base.dropped_draws == 0);
  CHECK(base.pivot_quantile > 0.0);
  CHECK(base.pivot_quantile == upper_quantile(base.mc_statistics, 0.05));
  CHECK(std::all_of(base.mc_statistics.begin(), base.mc_statistics.end(), [](double t) { return t >= 0.0; }));

  SUBCASE("deterministic and thread independent") {
    QutSpec threaded = spec;
    threaded.workers = 3;
    const QutResult again = qut_threshold(X, threaded);
    CHECK(again.mc_statistics == base.mc_statistics);
    CHECK(again.pivot_quantile == base.pivot_quantile);
  }

  SUBCASE("alpha = 0.5 gives the median") {
    QutSpec half = spec;
    half.alpha = 0.5;
    const QutResult r = qut_threshold(X, half);
    std::vector<double> s = r.mc_statistics;
    std::sort(s.begin(), s.end());
    CHECK(r.pivot_quantile == doctest::Approx(0.5 * (s[29] + s[30])));
  }

  SUBCASE("nonincreasing in alpha") {
    double prev = std::numeric_limits<double>::infinity();
    for (double a : {0.01, 0.05, 0.2, 0.5, 0.9}) {
      QutSpec s = spec;
      s.alpha = a;
      const double q = qut_threshold(X, s).pivot_quantile;
      CHECK(q <= prev);
      prev = q;
    }
  }

  SUBCASE("first draw matches a direct pivotized fit") {
    RlzConfig cfg;
    cfg.dictionaries = 4;
    const RngStream draw(31, {kQutStream, 0});
    const RlzFit fit = median_fit(X, standard_normal_vector(12, draw), cfg, {}, draw);
    CHECK(base.mc_statistics[0] == pivot_statistic(fit, PivotScaleRule::pooled_nonzero_median));
  }

  SUBCASE("spec validation") {
    QutSpec bad = spec;
    bad.n_mc = 49;
    CHECK_THROWS_AS(qut_threshold(X, bad), InputError);
    bad = spec;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(qut_threshold(X, bad), InputError);
  }
}

TEST_CASE("pivotized statistic is scale free") {
  const DenseMatrix X = standardize_columns(standard_normal_matrix(10, 16, RngStream(8)));
  RlzConfig cfg;
  cfg.dictionaries = 5;
  cfg.master_seed = 4;
  cfg.tau = 0.0;
  for (std::uint64_t t = 0; t < 5; ++t) {
    const RealVector eps = standard_normal_vector(10, RngStream(90, {t}));
    const RlzFit a = robust_lasso_zero(X, eps, cfg);
    const RlzFit b = robust_lasso_zero(X, 3.7 * eps, cfg);
    CHECK(pivot_scale(b) == doctest::Approx(3.7 * pivot_scale(a)).epsilon(1e-9));
    CHECK(pivot_statistic(b, cfg.pivot_rule) ==
          doctest::Approx(pivot_statistic(a, cfg.pivot_rule)).epsilon(1e-9));
  }
}

TEST_CASE("robust_lasso_zero_qut") {
  const DenseMatrix X = standardize_columns(standard_normal_matrix(12, 20, RngStream(6)));
  RealVector beta0 = RealVector::Zero(20);
  beta0(3) = 8.0;
  const RealVector y = X * beta0 + 0.3 * standard_normal_vector(12, RngStream(7));
  RlzConfig cfg;
  cfg.dictionaries = 4;
  cfg.master_seed = 5;
  QutSpec spec;
  spec.n_mc = 50;
  const CalibratedFit cf = robust_lasso_zero_qut(X, y, cfg, spec);
  REQUIRE(cf.qut.tau);
  CHECK(*cf.qut.tau == cf.fit.tau_used);
  CHECK(cf.fit.tau_used == doctest::Approx(cf.qut.pivot_quantile * pivot_scale(cf.fit)));
  CHECK(cf.fit.tau_used > 0.0);
  CHECK(cf.fit.beta_hat(3) > 0.0);

  // Same result through robust_lasso_zero with the calibrated quantile.
  const RlzFit direct = robust_lasso_zero(X, y, cfg, {}, cf.qut.pivot_quantile);
  CHECK(direct.beta_hat == cf.fit.beta_hat);
}
