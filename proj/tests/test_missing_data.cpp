#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "rlz/errors.hpp"
#include "rlz/missing_data.hpp"

using namespace rlz;

namespace {

const double kNa = std::numeric_limits<double>::quiet_NaN();

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

}  // namespace

TEST_CASE("logistic_missing_prob") {
  for (double x : {-3.0, 0.0, 0.4, 10.0}) CHECK(logistic_missing_prob(x, 0.0, 0.0) == 0.5);
  CHECK(logistic_missing_prob(1.0, 0.0, -700.0) < 1e-300);
  CHECK(logistic_missing_prob(1.0, 5.0, 0.0) == doctest::Approx(1.0 / (1.0 + std::exp(-5.0))).epsilon(1e-15));
  CHECK(logistic_missing_prob(1.0, 5.0, 0.0) == doctest::Approx(0.99331).epsilon(1e-5));
  CHECK(logistic_missing_prob(-2.0, 1.5, -1.0) == logistic_missing_prob(2.0, 1.5, -1.0));
  CHECK(logistic_missing_prob(0.5, 1.5, -1.0) < logistic_missing_prob(0.7, 1.5, -1.0));
}

TEST_CASE("solve_b_for_pi") {
  CHECK(std::abs(solve_b_for_pi(0.0, 0.5)) < 1e-10);
  CHECK(solve_b_for_pi(0.0, 0.2) == doctest::Approx(std::log(0.25)).epsilon(1e-10));
  CHECK(solve_b_for_pi(0.0, 0.05) == doctest::Approx(std::log(0.05 / 0.95)).epsilon(1e-10));

  for (double a : {0.0, 1.0, 5.0}) {
    for (double pi : {0.05, 0.2}) {
      const double b = solve_b_for_pi(a, pi);
      CHECK(std::abs(expected_missing_rate(a, b) - pi) <= 1e-8);
    }
  }

  SUBCASE("quadrature agrees with a Monte Carlo oracle") {
    const double b = solve_b_for_pi(5.0, 0.2);
    std::mt19937_64 eng(20240611);
    std::normal_distribution<double> normal;
    const int draws = 10'000'000;
    double sum = 0.0;
    for (int i = 0; i < draws; ++i) sum += logistic_missing_prob(normal(eng), 5.0, b);
    const double mean = sum / draws;
    // The per-draw variance is below 0.25.
    CHECK(std::abs(mean - 0.2) <= 3.0 * 0.5 / std::sqrt(static_cast<double>(draws)));
  }

  CHECK_THROWS_AS(solve_b_for_pi(1.0, 0.0), InputError);
  CHECK_THROWS_AS(solve_b_for_pi(1.0, 1.0), InputError);
  CHECK_THROWS_AS(solve_b_for_pi(-1.0, 0.2), InputError);
  // With a huge slope nearly every entry goes missing whatever b is.
  CHECK_THROWS_AS(solve_b_for_pi(5000.0, 0.2), InputError);
}

TEST_CASE("generate_missingness") {
  const DenseMatrix X = standard_normal_matrix(1000, 100, RngStream(3));

  SUBCASE("target rate") {
    for (double a : {0.0, 5.0}) {
      const IncompleteMatrix inc = generate_missingness(X, MissingnessSpec::calibrated(a, 0.2), RngStream(4));
      const double rate = static_cast<double>(inc.missing_count()) / 1e5;
      CHECK(std::abs(rate - 0.2) <= 0.01);
    }
  }

  SUBCASE("bookkeeping") {
    const IncompleteMatrix inc = generate_missingness(X, MissingnessSpec::calibrated(0.0, 0.05), RngStream(4));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      bool any = false;
      for (Eigen::Index j = 0; j < X.cols(); ++j) {
        CHECK((inc.mask(i, j) == 1) == std::isnan(inc.values(i, j)));
        if (!inc.mask(i, j)) CHECK(same_bits(inc.values(i, j), X(i, j)));
        any = any || inc.mask(i, j);
      }
      CHECK(any == std::binary_search(inc.incomplete_rows.begin(), inc.incomplete_rows.end(), i));
    }
  }

  SUBCASE("MNAR hides large values more often") {
    const IncompleteMatrix inc = generate_missingness(X, MissingnessSpec::calibrated(5.0, 0.2), RngStream(5));
    double big = 0, big_na = 0, small = 0, small_na = 0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        if (std::abs(X(i, j)) > 1) {
          ++big;
          big_na += inc.mask(i, j);
        } else {
          ++small;
          small_na += inc.mask(i, j);
        }
      }
    }
    CHECK(big_na / big > small_na / small);
  }

  SUBCASE("MCAR is independent of |x|") {
    const IncompleteMatrix inc = generate_missingness(X, MissingnessSpec::calibrated(0.0, 0.2), RngStream(6));
    // Bins of |x| at the N(0,1) quartiles of |x|: 0.3186, 0.6745, 1.1503.
    const double edges[] = {0.3186, 0.6745, 1.1503};
    double count[4][2] = {};
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double ax = std::abs(X(i, j));
        int bin = 0;
        while (bin < 3 && ax > edges[bin]) ++bin;
        count[bin][inc.mask(i, j)] += 1;
      }
    }
    double total = 0, col[2] = {0, 0}, row[4] = {0, 0, 0, 0};
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 2; ++c) {
        total += count[r][c];
        row[r] += count[r][c];
        col[c] += count[r][c];
      }
    double chi2 = 0;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 2; ++c) {
        const double e = row[r] * col[c] / total;
        chi2 += (count[r][c] - e) * (count[r][c] - e) / e;
      }
    CHECK(chi2 < 11.345);  // chi-square(3) upper 1% point
  }

  SUBCASE("deterministic") {
    const auto spec = MissingnessSpec::calibrated(5.0, 0.2);
    CHECK(generate_missingness(X, spec, RngStream(9)).mask == generate_missingness(X, spec, RngStream(9)).mask);
  }
}

TEST_CASE("imputation") {
  DenseMatrix v(3, 2);
  v << 1, kNa, kNa, 5, 3, 7;
  const IncompleteMatrix inc = IncompleteMatrix::from_values(v);
  CHECK(inc.incomplete_rows == IndexSet{0, 1});
  CHECK(inc.missing_count() == 2);

  const DenseMatrix m = mean_impute(inc);
  CHECK(m(1, 0) == 2.0);
  CHECK(m(0, 1) == 6.0);
  CHECK(same_bits(m(2, 0), 3.0));
  const DenseMatrix z = zero_impute(inc);
  CHECK(z(1, 0) == 0.0);
  CHECK(z(0, 1) == 0.0);
  CHECK(z(1, 1) == 5.0);

  const DenseMatrix full = standard_normal_matrix(4, 3, RngStream(1));
  const IncompleteMatrix none = IncompleteMatrix::complete(full);
  CHECK(none.incomplete_rows.empty());
  CHECK(mean_impute(none) == full);
  CHECK(zero_impute(none) == full);

  DenseMatrix constant(3, 1);
  constant << 4.25, kNa, 4.25;
  CHECK(mean_impute(IncompleteMatrix::from_values(constant))(1, 0) == 4.25);

  DenseMatrix empty_col(2, 2);
  empty_col << 1, kNa, 2, kNa;
  CHECK_THROWS_AS(mean_impute(IncompleteMatrix::from_values(empty_col)), InputError);

  DenseMatrix inf(1, 1);
  inf << std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(IncompleteMatrix::from_values(inf), InputError);
}

TEST_CASE("imputation error is a sparse corruption") {
  const Eigen::Index n = 40, p = 30;
  const DenseMatrix X = standard_normal_matrix(n, p, RngStream(12));
  const IncompleteMatrix inc = generate_missingness(X, MissingnessSpec::calibrated(0.0, 0.05), RngStream(13));
  const DenseMatrix Xt = mean_impute(inc);
  RealVector beta = RealVector::Zero(p);
  beta(2) = 1.5;
  beta(17) = -2.0;
  const RealVector omega = implied_corruption(X, Xt, beta);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!inc.mask(i, 2) && !inc.mask(i, 17)) CHECK(omega(i) == 0.0);
  }
  const RealVector y = X * beta;
  CHECK((Xt * beta + std::sqrt(static_cast<double>(n)) * omega - y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("restricted and full corruption models") {
  int unique_cases = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const RngStream s(500 + seed);
    const Eigen::Index n = 5, p = 4;
    const DenseMatrix X = standard_normal_matrix(n, p, s.child(0));
    IncompleteMatrix inc = generate_missingness(X, MissingnessSpec::calibrated(0.0, 0.1), s.child(1));
    if (inc.incomplete_rows.empty() || inc.incomplete_rows.size() == static_cast<std::size_t>(n)) continue;
    const DenseMatrix Xt = mean_impute(inc);
    RealVector beta0 = RealVector::Zero(p);
    beta0(seed % p) = 2.0;
    const RealVector y = X * beta0;

    const LpProblem restricted = formulate_jp(Xt, y, 1.0, inc.incomplete_rows);
    const VertexOptima r = enumerate_vertex_optima(restricted);
    if (!r.unique()) continue;
    const LpProblem full = formulate_jp(Xt, y, 1.0);
    const VertexOptima f = enumerate_vertex_optima(full);
    const RealVector rz = restricted.recompose(r.points.front());
    const RealVector fz = full.recompose(f.points.front());
    // Whenever the full optimum keeps omega inside the incomplete rows, both
    // programs share that optimum.
    bool inside = f.unique();
    for (Eigen::Index i = 0; i < n && inside; ++i)
      if (std::abs(fz(p + i)) > 1e-9 &&
          !std::binary_search(inc.incomplete_rows.begin(), inc.incomplete_rows.end(), i))
        inside = false;
    if (inside) {
      ++unique_cases;
      CHECK((rz.head(p) - fz.head(p)).cwiseAbs().maxCoeff() < 1e-8);
      CHECK(r.objective == doctest::Approx(f.objective).epsilon(1e-10));
    }
    // The restricted program can never beat the full one.
    CHECK(r.objective >= f.objective - 1e-9 * (1.0 + f.objective));
  }
  CHECK(unique_cases > 5);
}

TEST_CASE("rlz_with_missing") {
  const Eigen::Index n = 30, p = 40;
  const DenseMatrix X = standard_normal_matrix(n, p, RngStream(21));
  RealVector beta0 = RealVector::Zero(p);
  beta0(5) = 4.0;
  beta0(9) = -4.0;
  const RealVector y = X * beta0 + 0.2 * standard_normal_vector(n, RngStream(22));

  RlzConfig cfg;
  cfg.dictionaries = 5;
  cfg.master_seed = 8;
  cfg.tau = 0.3;

  SUBCASE("complete data matches the direct fit on the standardized matrix") {
    const MissingDataFit mf = rlz_with_missing(y, IncompleteMatrix::complete(X), cfg);
    RlzConfig direct = cfg;
    direct.corruption_cols = IndexSet{};
    const RlzFit ref = robust_lasso_zero(standardize_columns(X), y, direct);
    CHECK(mf.fit.beta_med == ref.beta_med);
    CHECK(mf.fit.beta_hat == ref.beta_hat);
    CHECK(mf.incomplete_rows.empty());
  }

  SUBCASE("restricted corruption columns") {
    const IncompleteMatrix inc = generate_missingness(X, MissingnessSpec::calibrated(5.0, 0.05), RngStream(23));
    REQUIRE_FALSE(inc.incomplete_rows.empty());
    const MissingDataFit mf = rlz_with_missing(y, inc, cfg);
    for (Eigen::Index i = 0; i < n; ++i)
      if (!std::binary_search(inc.incomplete_rows.begin(), inc.incomplete_rows.end(), i))
        CHECK((*mf.fit.omega_med)(i) == 0.0);
    CHECK(mf.beta_original_scale.size() == p);
    for (Eigen::Index j = 0; j < p; ++j)
      CHECK(mf.beta_original_scale(j) == doctest::Approx(mf.fit.beta_hat(j) / mf.scale(j)));

    MissingDataOptions full;
    full.restrict_corruption_rows = false;
    const MissingDataFit mf_full = rlz_with_missing(y, inc, cfg, std::nullopt, {}, full);
    CHECK(mf_full.fit.omega_med->size() == n);
  }

  SUBCASE("automatic threshold") {
    RlzConfig automatic = cfg;
    automatic.tau.reset();
    QutSpec q;
    q.n_mc = 50;
    const MissingDataFit mf = rlz_with_missing(y, IncompleteMatrix::complete(X), automatic, q);
    REQUIRE(mf.qut);
    CHECK(mf.fit.tau_used == *mf.qut->tau);
    CHECK(mf.fit.beta_hat(5) > 0.0);
    CHECK(mf.fit.beta_hat(9) < 0.0);
  }

  CHECK_THROWS_AS(rlz_with_missing(RealVector::Zero(3), IncompleteMatrix::complete(X), cfg), InputError);
}
