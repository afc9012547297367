#include <cmath>
#include <numeric>
#include <string>

#include "rlz/errors.hpp"
#include "rlz/lp_solver.hpp"

namespace rlz {
namespace {

IndexSet resolve_corruption_cols(const std::optional<IndexSet>& cols, Eigen::Index n) {
  if (!cols) {
    IndexSet all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    return all;
  }
  require_index_set(*cols, n, "corruption_cols");
  return *cols;
}

// Signed design [X | sqrt(n) I_cols | G] split into [+ | -] columns.
LpProblem build(const DenseMatrix& X, const RealVector& y, double lambda, const DenseMatrix* G,
                const IndexSet& cols) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const auto k = static_cast<Eigen::Index>(cols.size());
  const Eigen::Index g = G ? G->cols() : 0;
  const Eigen::Index total = p + k + g;

  DenseMatrix signed_design = DenseMatrix::Zero(n, total);
  RealVector weight(total);
  signed_design.leftCols(p) = X;
  weight.head(p).setOnes();
  const double root_n = std::sqrt(static_cast<double>(n));
  for (Eigen::Index c = 0; c < k; ++c) signed_design(cols[c], p + c) = root_n;
  weight.segment(p, k).setConstant(lambda);
  if (G) {
    signed_design.rightCols(g) = *G;
    weight.tail(g).setOnes();
  }

  LpProblem prob;
  prob.A.resize(n, 2 * total);
  prob.A << signed_design, -signed_design;
  prob.b = y;
  prob.c.resize(2 * total);
  prob.c << weight, weight;
  prob.var_map.reserve(static_cast<std::size_t>(total));
  for (Eigen::Index j = 0; j < total; ++j) prob.var_map.push_back({j, total + j});
  return prob;
}

void check_inputs(const DenseMatrix& X, const RealVector& y, double lambda) {
  if (X.rows() < 1 || X.cols() < 1) throw InputError("X must be non-empty");
  if (y.size() != X.rows())
    throw InputError("dim(y) = " + std::to_string(y.size()) + " does not match rows(X) = " +
                     std::to_string(X.rows()));
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("lambda must be > 0");
  require_finite(X, "X");
  require_finite(y, "y");
}

JpSolution to_solution(const LpProblem& prob, const LpResult& res, const DenseMatrix& X,
                       const RealVector& y, double lambda, const DenseMatrix* G, IndexSet cols) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const auto k = static_cast<Eigen::Index>(cols.size());
  JpSolution sol;
  sol.status = res.status;
  const RealVector z = prob.recompose(res.x);
  sol.beta = z.head(p);
  sol.omega = z.segment(p, k);
  RealVector fitted = X * sol.beta;
  const double root_n = std::sqrt(static_cast<double>(n));
  for (Eigen::Index c = 0; c < k; ++c) fitted(cols[c]) += root_n * sol.omega(c);
  sol.objective = sol.beta.lpNorm<1>() + lambda * sol.omega.lpNorm<1>();
  if (G) {
    sol.gamma = z.tail(G->cols());
    fitted += *G * *sol.gamma;
    sol.objective += sol.gamma->lpNorm<1>();
  }
  sol.residual_norm = (y - fitted).norm();
  sol.corruption_cols = std::move(cols);
  return sol;
}

}  // namespace

RealVector JpSolution::omega_full(Eigen::Index n) const {
  RealVector full = RealVector::Zero(n);
  for (std::size_t c = 0; c < corruption_cols.size(); ++c)
    full(corruption_cols[c]) = omega(static_cast<Eigen::Index>(c));
  return full;
}

LpProblem formulate_jp(const DenseMatrix& X, const RealVector& y, double lambda,
                       const std::optional<IndexSet>& corruption_cols) {
  check_inputs(X, y, lambda);
  return build(X, y, lambda, nullptr, resolve_corruption_cols(corruption_cols, X.rows()));
}

LpProblem formulate_augmented_jp(const DenseMatrix& X, const RealVector& y, double lambda,
                                 const DenseMatrix& G,
                                 const std::optional<IndexSet>& corruption_cols) {
  check_inputs(X, y, lambda);
  if (G.rows() != X.rows()) throw InputError("noise dictionary must have rows(X) rows");
  require_finite(G, "G");
  return build(X, y, lambda, &G, resolve_corruption_cols(corruption_cols, X.rows()));
}

JpSolution solve_jp(const DenseMatrix& X, const RealVector& y, double lambda,
                    const std::optional<IndexSet>& corruption_cols, const SolverOptions& opts) {
  check_inputs(X, y, lambda);
  IndexSet cols = resolve_corruption_cols(corruption_cols, X.rows());
  const LpProblem prob = build(X, y, lambda, nullptr, cols);
  return to_solution(prob, solve_lp(prob, opts), X, y, lambda, nullptr, std::move(cols));
}

JpSolution solve_augmented_jp(const DenseMatrix& X, const RealVector& y, double lambda,
                              const DenseMatrix& G, const SolverOptions& opts,
                              const std::optional<IndexSet>& corruption_cols) {
  check_inputs(X, y, lambda);
  if (G.rows() != X.rows()) throw InputError("noise dictionary must have rows(X) rows");
  require_finite(G, "G");
  IndexSet cols = resolve_corruption_cols(corruption_cols, X.rows());
  const LpProblem prob = build(X, y, lambda, &G, cols);
  return to_solution(prob, solve_lp(prob, opts), X, y, lambda, &G, std::move(cols));
}

RealVector solve_bp(const DenseMatrix& X_aug, const RealVector& y, const SolverOptions& opts) {
  if (y.size() != X_aug.rows()) throw InputError("solve_bp: dim(y) does not match rows(X_aug)");
  require_finite(X_aug, "X_aug");
  require_finite(y, "y");
  const Eigen::Index cols = X_aug.cols();
  LpProblem prob;
  prob.A.resize(X_aug.rows(), 2 * cols);
  prob.A << X_aug, -X_aug;
  prob.b = y;
  prob.c = RealVector::Ones(2 * cols);
  for (Eigen::Index j = 0; j < cols; ++j) prob.var_map.push_back({j, cols + j});
  const LpResult res = solve_lp(prob, opts);
  if (res.status != LpStatus::optimal)
    throw SolverError("solve_bp: " + std::string(to_string(res.status)));
  return prob.recompose(res.x);
}

}  // namespace rlz
