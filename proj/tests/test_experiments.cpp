#include "doctest.h"

#include <cmath>

#include "rlz/errors.hpp"
#include "rlz/experiments.hpp"

using namespace rlz;

namespace {

RealVector vec(std::initializer_list<double> v) {
  RealVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

SimulationSpec small_spec() {
  SimulationSpec spec;
  spec.n = 30;
  spec.p = 40;
  spec.s = 2;
  spec.beta_scale = 3.0;
  spec.replications = 4;
  spec.M = 4;
  spec.estimators = {EstimatorTag::rlass0, EstimatorTag::lass0, EstimatorTag::tjp};
  spec.master_seed = 2024;
  return spec;
}

}  // namespace

TEST_CASE("sign metrics") {
  CHECK(s_tpp(vec({0.5, -2, 0}), vec({1, -1, 0})) == 1.0);
  CHECK(s_tpp(vec({1, 1, 0}), vec({1, -1, 0})) == 0.5);
  CHECK(s_tpp(vec({0, 0, 0}), vec({1, -1, 0})) == 0.0);
  CHECK_THROWS_AS(s_tpp(vec({1, 0}), vec({0, 0})), InputError);
  CHECK_THROWS_AS(s_tpp(vec({1, 0, 0}), vec({0, 1})), InputError);

  CHECK(s_fdp(vec({2, 3}), vec({1, 0})) == 0.5);
  CHECK(s_fdp(vec({-2, 0}), vec({1, 0})) == 1.0);
  CHECK(s_fdp(vec({0, 0}), vec({1, 0})) == 0.0);

  CHECK(psr_indicator(vec({2, 0, -1}), vec({1, 0, -5})) == 1);
  CHECK(psr_indicator(vec({2, 0.1, -1}), vec({1, 0, -5})) == 0);
  CHECK(psr_indicator(vec({0, 0}), vec({0, 0})) == 1);
}

TEST_CASE("oracle-s threshold") {
  const OracleThreshold a = oracle_s_threshold(vec({5, -3, 1}), 2);
  CHECK(a.tau == 1.0);
  CHECK(a.support_size == 2);
  CHECK_FALSE(a.tie_at_cut);

  const OracleThreshold tie = oracle_s_threshold(vec({3, -3, 1}), 1);
  CHECK(tie.tie_at_cut);
  CHECK(tie.tau == 1.0);
  CHECK(tie.support_size == 2);

  const OracleThreshold all = oracle_s_threshold(vec({2, -4}), 2);
  CHECK(all.support_size == 2);
  CHECK(all.tau < 2.0);

  const OracleThreshold sparse = oracle_s_threshold(vec({0, 4, 0}), 2);
  CHECK(sparse.short_support);
  CHECK(sparse.support_size == 1);
  CHECK(sparse.tau == 0.0);

  CHECK_THROWS_AS(oracle_s_threshold(vec({1, 2}), 0), InputError);
  CHECK_THROWS_AS(oracle_s_threshold(vec({1, 2}), 3), InputError);
}

TEST_CASE("oracle-s tuning gives s-FDP = 1 - s-TPP without ties") {
  for (std::uint64_t t = 0; t < 50; ++t) {
    const RealVector v = standard_normal_vector(12, RngStream(40, {t}));
    RealVector beta0 = RealVector::Zero(12);
    beta0(t % 12) = 1.0;
    beta0((t + 5) % 12) = -1.0;
    beta0((t + 7) % 12) = 1.0;
    const OracleThreshold o = oracle_s_threshold(v, 3);
    REQUIRE_FALSE(o.tie_at_cut);
    const RealVector b = hard_threshold(v, o.tau);
    CHECK((b.array() != 0.0).count() == 3);
    CHECK(s_fdp(b, beta0) == doctest::Approx(1.0 - s_tpp(b, beta0)));
  }
}

TEST_CASE("spec JSON") {
  const SimulationSpec spec = simulation_spec_from_json(
      R"({"n": 50, "p": 80, "mechanism": "mnar", "estimators": ["tjp", "rlass0"], "master_seed": 7})");
  CHECK(spec.n == 50);
  CHECK(spec.p == 80);
  CHECK(spec.mechanism == Mechanism::mnar);
  CHECK(spec.estimators.size() == 2);
  CHECK(spec.master_seed == 7);
  CHECK(spec.rho == 0.0);

  const SimulationSpec round = simulation_spec_from_json(simulation_spec_to_json(spec));
  CHECK(simulation_spec_to_json(round) == simulation_spec_to_json(spec));

  CHECK_THROWS_AS(simulation_spec_from_json(R"({"n": 50, "nn": 3})"), InputError);
  CHECK_THROWS_AS(simulation_spec_from_json(R"({"tuning": "best"})"), InputError);
  CHECK_THROWS_AS(simulation_spec_from_json(R"({"s": 0})"), InputError);
  CHECK_THROWS_AS(simulation_spec_from_json(R"({"n": 1.5})"), InputError);
  CHECK_THROWS_AS(simulation_spec_from_json(R"({"k": 3})"), InputError);
  CHECK_THROWS_AS(simulation_spec_from_json(R"({"tuning": "automatic", "estimators": ["tjp"]})"), InputError);
  CHECK_THROWS_AS(simulation_spec_from_json("{"), InputError);
}

TEST_CASE("replication draws") {
  SimulationSpec spec = small_spec();
  const ReplicationData a = draw_replication(spec, 1);
  const ReplicationData b = draw_replication(spec, 1);
  CHECK(a.y == b.y);
  CHECK(a.observed.mask == b.observed.mask);
  CHECK((a.beta0.array() != 0.0).count() == 2);
  CHECK(a.beta0.cwiseAbs().maxCoeff() == 3.0);
  CHECK(a.omega0.isZero());
  CHECK(draw_replication(spec, 2).y != a.y);
  for (Eigen::Index j = 0; j < spec.p; ++j)
    CHECK(a.X.col(j).squaredNorm() == doctest::Approx(static_cast<double>(spec.n)));
  CHECK(a.observed.missing_count() > 0);

  spec.pi = 0.0;
  spec.k = 4;
  spec.restrict_corruption_rows = false;
  spec.corruption_scale = 10.0;
  const ReplicationData c = draw_replication(spec, 0);
  CHECK(c.observed.missing_count() == 0);
  CHECK((c.omega0.array() != 0.0).count() == 4);
  CHECK(c.omega0.cwiseAbs().maxCoeff() == 10.0);
}

TEST_CASE("noiseless tjp recovers the signs") {
  SimulationSpec spec;
  spec.n = 50;
  spec.p = 60;
  spec.s = 3;
  spec.sigma_noise = 0.0;
  spec.pi = 0.0;
  spec.replications = 5;
  spec.estimators = {EstimatorTag::tjp};
  const ExperimentResult res = run_experiment(spec);
  REQUIRE(res.metrics.size() == 1);
  CHECK(res.metrics[0].psr == 1.0);
  CHECK(res.metrics[0].s_tpr == 1.0);
  CHECK(res.metrics[0].s_fdr == 0.0);
  CHECK(res.metrics[0].failures == 0);
}

TEST_CASE("experiment output does not depend on worker count") {
  const SimulationSpec spec = small_spec();
  const ExperimentResult one = run_experiment(spec, 1);
  const ExperimentResult three = run_experiment(spec, 3);
  CHECK(metrics_csv(one.metrics) == metrics_csv(three.metrics));
  CHECK(raw_csv(one.raw) == raw_csv(three.raw));
  CHECK(one.raw.size() == 12);
  for (const auto& m : one.metrics) {
    CHECK(m.replications + m.failures == 4);
    CHECK(m.psr_se == doctest::Approx(std::sqrt(m.psr * (1.0 - m.psr) / m.replications)));
  }
}

TEST_CASE("CSV reading and number formatting") {
  const CsvTable t = read_csv_table("a,b\n1, 2.5\nNA,-3e2\r\n\n");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.values.rows() == 2);
  CHECK(t.values(0, 1) == 2.5);
  CHECK(std::isnan(t.values(1, 0)));
  CHECK(t.values(1, 1) == -300.0);
  CHECK_THROWS_AS(read_csv_table("a,b\n1\n"), InputError);
  CHECK_THROWS_AS(read_csv_table("a\nx\n"), InputError);
  CHECK_THROWS_AS(read_csv_table(""), InputError);

  CHECK(read_csv_vector("y\n1\n2\n") == vec({1, 2}));
  CHECK(read_csv_vector("1\n2\n") == vec({1, 2}));
  CHECK_THROWS_AS(read_csv_vector("1\nfoo\n"), InputError);

  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345678.9, 0.0})
    CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.5) == "0.5");
}
