#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "rlz/core.hpp"

namespace rlz {

// Links a free (signed) variable to the nonnegative split pair that represents it:
// value = x[positive] - x[negative].
struct SplitPair {
  Eigen::Index positive;
  Eigen::Index negative;
};

// Standard form: minimize c^T x subject to A x = b, x >= 0.
struct LpProblem {
  DenseMatrix A;
  RealVector b;
  RealVector c;
  // One entry per original signed variable, in original order. Columns not
  // referenced here are plain nonnegative variables.
  std::vector<SplitPair> var_map;

  Eigen::Index rows() const { return A.rows(); }
  Eigen::Index cols() const { return A.cols(); }

  // Signed original variables recomposed from a split-space point.
  RealVector recompose(const RealVector& x) const;
};

enum class LpStatus { optimal, infeasible, unbounded, tolerance_failure };
std::string_view to_string(LpStatus s);

enum class PivotRule { bland, dantzig_with_bland_fallback };

struct SolverOptions {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  // Defaults to 50 * (m + N) when unset.
  std::optional<std::size_t> max_pivots;
  PivotRule pivot_rule = PivotRule::dantzig_with_bland_fallback;
  // Explicit basis inverse is rebuilt from scratch every this many pivots.
  int refactor_interval = 64;
};

struct LpResult {
  RealVector x;
  double objective = 0.0;
  LpStatus status = LpStatus::tolerance_failure;
  std::vector<Eigen::Index> basis;
  std::size_t pivots = 0;
};

// Dense two-phase revised simplex. Unit columns already present in A seed the
// starting basis; only the remaining rows get artificial variables.
LpResult solve_lp(const LpProblem& prob, const SolverOptions& opts = {});

// ---------------------------------------------------------------------------
// l1 programs built on the LP reduction.

// Signed variable layout: [beta (p) | omega (|corruption_cols|) | gamma (cols(G))].
// Constraint: X beta + sqrt(n) I_cols omega + G gamma = y.
// Cost: ||beta||_1 + lambda ||omega||_1 + ||gamma||_1.
LpProblem formulate_jp(const DenseMatrix& X, const RealVector& y, double lambda,
                       const std::optional<IndexSet>& corruption_cols = std::nullopt);
LpProblem formulate_augmented_jp(const DenseMatrix& X, const RealVector& y, double lambda,
                                 const DenseMatrix& G,
                                 const std::optional<IndexSet>& corruption_cols = std::nullopt);

struct JpSolution {
  RealVector beta;
  RealVector omega;  // one entry per corruption column (all n rows when unrestricted)
  std::optional<RealVector> gamma;
  double objective = 0.0;
  double residual_norm = 0.0;
  LpStatus status = LpStatus::tolerance_failure;
  IndexSet corruption_cols;

  bool ok() const { return status == LpStatus::optimal; }
  // omega scattered back to all n rows, zero outside corruption_cols.
  RealVector omega_full(Eigen::Index n) const;
};

JpSolution solve_jp(const DenseMatrix& X, const RealVector& y, double lambda,
                    const std::optional<IndexSet>& corruption_cols = std::nullopt,
                    const SolverOptions& opts = {});

JpSolution solve_augmented_jp(const DenseMatrix& X, const RealVector& y, double lambda,
                              const DenseMatrix& G, const SolverOptions& opts = {},
                              const std::optional<IndexSet>& corruption_cols = std::nullopt);

// Minimum-l1 z with X_aug z = y. Throws SolverError unless the LP is solved.
RealVector solve_bp(const DenseMatrix& X_aug, const RealVector& y, const SolverOptions& opts = {});

// ---------------------------------------------------------------------------
// Exact oracle and uniqueness checks.

struct VertexOptima {
  double objective = 0.0;
  // Distinct optimal basic feasible solutions, in split-variable space.
  std::vector<RealVector> points;
  std::size_t bases_examined = 0;

  bool unique() const { return points.size() == 1; }
};

// Exhaustive enumeration of basic feasible solutions. Each signed variable of
// var_map counts as one candidate column (its two split columns are linearly
// dependent and never share a basis); the sign of the basic solution picks the
// split. Throws BudgetExceeded when the number of candidate bases exceeds
// `budget`, InputError when A does not have full row rank.
VertexOptima enumerate_vertex_optima(const LpProblem& prob, double tol = 1e-9,
                                     std::size_t budget = 1'000'000);

// Production-scale uniqueness heuristic: re-solve with the cost vector perturbed
// by random relative signs of size `relative_perturbation`; the optimum is
// flagged non-unique if any perturbed solve moves the solution.
struct UniquenessProbe {
  bool unique = false;
  double max_deviation = 0.0;
  LpResult reference;
};
UniquenessProbe probe_uniqueness(const LpProblem& prob, const SolverOptions& opts,
                                 const RngStream& stream, int trials = 2,
                                 double relative_perturbation = 1e-7);

// Number of ways to pick k of n, saturating at `cap` + 1.
std::size_t binomial_capped(std::size_t n, std::size_t k, std::size_t cap);

}  // namespace rlz
