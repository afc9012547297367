#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "rlz/errors.hpp"
#include "rlz/lp_solver.hpp"

namespace rlz {

std::size_t binomial_capped(std::size_t n, std::size_t k, std::size_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  // C(n, i) = C(n, i-1) * (n - i + 1) / i stays integral at every step.
  unsigned __int128 acc = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    acc = acc * (n - i + 1) / i;
    if (acc > cap) return cap + 1;
  }
  return static_cast<std::size_t>(acc);
}

namespace {

// A candidate basic column: either a signed variable (both split columns) or a
// plain nonnegative column.
struct Atom {
  Eigen::Index positive;
  Eigen::Index negative;  // -1 for plain columns
};

}  // namespace

VertexOptima enumerate_vertex_optima(const LpProblem& prob, double tol, std::size_t budget) {
  const Eigen::Index m = prob.rows();
  const Eigen::Index ncols = prob.cols();
  if (prob.b.size() != m || prob.c.size() != ncols)
    throw InputError("enumerate_vertex_optima: dimension mismatch");

  std::vector<Atom> atoms;
  std::vector<bool> in_pair(static_cast<std::size_t>(ncols), false);
  for (const auto& sp : prob.var_map) {
    atoms.push_back({sp.positive, sp.negative});
    in_pair[sp.positive] = in_pair[sp.negative] = true;
  }
  for (Eigen::Index j = 0; j < ncols; ++j)
    if (!in_pair[j]) atoms.push_back({j, -1});

  Eigen::FullPivLU<DenseMatrix> rank_check(prob.A);
  rank_check.setThreshold(1e-10);
  if (m > 0 && rank_check.rank() < m)
    throw InputError("enumerate_vertex_optima: A must have full row rank");

  const std::size_t count = binomial_capped(atoms.size(), static_cast<std::size_t>(m), budget);
  if (count > budget)
    throw BudgetExceeded("enumerate_vertex_optima: more than " + std::to_string(budget) +
                         " candidate bases");

  const double scale = 1.0 + (m > 0 ? prob.b.cwiseAbs().maxCoeff() : 0.0);
  VertexOptima out;
  out.objective = std::numeric_limits<double>::infinity();

  auto consider = [&](const RealVector& x, double objective) {
    const double slack = tol * (1.0 + std::abs(objective));
    if (objective < out.objective - slack) {
      out.points.clear();
      out.objective = objective;
    } else if (objective > out.objective + slack) {
      return;
    }
    out.objective = std::min(out.objective, objective);
    const double merge = 1e-7 * (1.0 + x.cwiseAbs().maxCoeff());
    for (const auto& seen : out.points)
      if ((seen - x).cwiseAbs().maxCoeff() <= merge) return;
    out.points.push_back(x);
  };

  if (m == 0) {
    out.bases_examined = 1;
    consider(RealVector::Zero(ncols), 0.0);
    return out;
  }

  std::vector<std::size_t> pick(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
  DenseMatrix B(m, m);
  const std::size_t natoms = atoms.size();
  while (true) {
    ++out.bases_examined;
    for (Eigen::Index r = 0; r < m; ++r) B.col(r) = prob.A.col(atoms[pick[r]].positive);
    Eigen::PartialPivLU<DenseMatrix> lu(B);
    if (lu.rcond() > 1e-12) {
      const RealVector z = lu.solve(prob.b);
      if ((B * z - prob.b).cwiseAbs().maxCoeff() <= 1e-8 * scale) {
        bool feasible = true;
        RealVector x = RealVector::Zero(ncols);
        for (Eigen::Index r = 0; r < m && feasible; ++r) {
          const Atom& a = atoms[pick[r]];
          double v = z(r);
          if (std::abs(v) <= tol * scale) v = 0.0;
          if (v >= 0) {
            x(a.positive) = v;
          } else if (a.negative >= 0) {
            x(a.negative) = -v;
          } else {
            feasible = false;
          }
        }
        if (feasible) consider(x, prob.c.dot(x));
      }
    }
    // Next combination in lexicographic order.
    std::size_t i = pick.size();
    while (i > 0 && pick[i - 1] == natoms - pick.size() + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < pick.size(); ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

UniquenessProbe probe_uniqueness(const LpProblem& prob, const SolverOptions& opts,
                                 const RngStream& stream, int trials,
                                 double relative_perturbation) {
  UniquenessProbe probe;
  probe.reference = solve_lp(prob, opts);
  if (probe.reference.status != LpStatus::optimal) return probe;
  const RealVector& ref = probe.reference.x;
  const double merge = 1e-6 * (1.0 + ref.cwiseAbs().maxCoeff());
  probe.unique = true;
  for (int t = 0; t < trials; ++t) {
    auto eng = stream.child(static_cast<std::uint64_t>(t)).engine();
    std::bernoulli_distribution coin(0.5);
    LpProblem perturbed = prob;
    for (Eigen::Index j = 0; j < perturbed.c.size(); ++j)
      perturbed.c(j) *= 1.0 + (coin(eng) ? relative_perturbation : -relative_perturbation);
    const LpResult res = solve_lp(perturbed, opts);
    if (res.status != LpStatus::optimal) {
      probe.unique = false;
      continue;
    }
    const double dev = (res.x - ref).cwiseAbs().maxCoeff();
    probe.max_deviation = std::max(probe.max_deviation, dev);
    if (dev > merge) probe.unique = false;
  }
  return probe;
}

}  // namespace rlz
