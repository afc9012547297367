#include <cmath>
#include <limits>
#include <string>

#include "rlz/analysis.hpp"
#include "rlz/errors.hpp"

namespace rlz {

std::string_view to_string(VerdictMethod m) {
  switch (m) {
    case VerdictMethod::vertex_oracle: return "vertex_oracle";
    case VerdictMethod::sign_pattern_lp: return "sign_pattern_lp";
    case VerdictMethod::perturbation_probe: return "perturbation_probe";
  }
  return "unknown";
}

namespace {

struct SliceOptimum {
  double value = -std::numeric_limits<double>::infinity();
  RealVector b;
};

// max g'b - sum_q w_q |(W b)_q| over the simplex {b >= 0, sum b = 1}.
// Variables [b | u | s+ | s-], rows: sum b = 1 and u - Wb - s+ = 0, u + Wb - s- = 0.
SliceOptimum solve_slice(const RealVector& g, const DenseMatrix& W, const RealVector& w,
                         const SolverOptions& opts) {
  const Eigen::Index p = g.size();
  const Eigen::Index q = W.rows();
  LpProblem prob;
  prob.A = DenseMatrix::Zero(1 + 2 * q, p + 3 * q);
  prob.b = RealVector::Zero(1 + 2 * q);
  prob.c = RealVector::Zero(p + 3 * q);
  prob.A.row(0).head(p).setOnes();
  prob.b(0) = 1.0;
  prob.c.head(p) = -g;
  for (Eigen::Index i = 0; i < q; ++i) {
    prob.c(p + i) = w(i);
    prob.A.block(1 + 2 * i, 0, 1, p) = -W.row(i);
    prob.A(1 + 2 * i, p + i) = 1.0;
    prob.A(1 + 2 * i, p + q + i) = -1.0;
    prob.A.block(2 + 2 * i, 0, 1, p) = W.row(i);
    prob.A(2 + 2 * i, p + i) = 1.0;
    prob.A(2 + 2 * i, p + 2 * q + i) = -1.0;
  }
  const LpResult res = solve_lp(prob, opts);
  if (res.status != LpStatus::optimal)
    throw SolverError("orthant LP: " + std::string(to_string(res.status)));
  SliceOptimum out;
  out.b = res.x.head(p);
  // Evaluate the objective exactly at b rather than trusting the u slacks.
  out.value = g.dot(out.b) - w.dot((W * out.b).cwiseAbs());
  return out;
}

RealVector orthant_signs(std::uint64_t mask, Eigen::Index p) {
  RealVector s(p);
  for (Eigen::Index j = 0; j < p; ++j) s(j) = (mask >> j) & 1U ? -1.0 : 1.0;
  return s;
}

std::vector<bool> membership(const IndexSet& set, Eigen::Index bound) {
  std::vector<bool> in(static_cast<std::size_t>(bound), false);
  for (auto i : set) in[static_cast<std::size_t>(i)] = true;
  return in;
}

void check_signs(const DenseMatrix& X, const SignVector& theta, const SignVector& theta_tilde,
                 double lambda) {
  if (X.rows() < 1 || X.cols() < 1) throw InputError("X must be non-empty");
  require_finite(X, "X");
  if (theta.size() != X.cols()) throw InputError("theta must have cols(X) entries");
  if (theta_tilde.size() != X.rows()) throw InputError("theta_tilde must have rows(X) entries");
  require_sign_vector(theta, "theta");
  require_sign_vector(theta_tilde, "theta_tilde");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("lambda must be > 0");
}

// Runs slice(k) for k in [0, count) and keeps the first maximum in index order.
template <typename Slice>
std::pair<std::size_t, SliceOptimum> best_slice(std::size_t count, unsigned workers, Slice slice) {
  std::vector<SliceOptimum> results(count);
  parallel_for(count, workers, [&](std::size_t k) { results[k] = slice(k); });
  std::size_t arg = 0;
  for (std::size_t k = 1; k < count; ++k)
    if (results[k].value > results[arg].value) arg = k;
  return {arg, std::move(results[arg])};
}

IdentifiabilityVerdict perturbation_verdict(const DenseMatrix& X, const SignVector& theta,
                                            const SignVector& theta_tilde, double lambda,
                                            const SolverOptions& opts) {
  const double root_n = std::sqrt(static_cast<double>(X.rows()));
  const RealVector beta0 = theta.cast<double>();
  const RealVector omega0 = theta_tilde.cast<double>();
  const LpProblem prob = formulate_jp(X, X * beta0 + root_n * omega0, lambda);
  const UniquenessProbe probe = probe_uniqueness(prob, opts, RngStream(0x1d), 3);
  IdentifiabilityVerdict v;
  v.method = VerdictMethod::perturbation_probe;
  v.certified = false;
  if (probe.reference.status != LpStatus::optimal) return v;
  const RealVector z = prob.recompose(probe.reference.x);
  RealVector target(z.size());
  target << beta0, omega0;
  v.identifiable = probe.unique && (z - target).cwiseAbs().maxCoeff() <= 1e-6;
  return v;
}

}  // namespace

IdentifiabilityVerdict check_identifiability(const DenseMatrix& X, const SignVector& theta,
                                             const SignVector& theta_tilde, double lambda,
                                             const AnalysisOptions& opts) {
  check_signs(X, theta, theta_tilde, lambda);
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (p > opts.max_p) return perturbation_verdict(X, theta, theta_tilde, lambda, opts.solver);

  const double root_n = std::sqrt(static_cast<double>(n));
  // On the null set omega = -lambda X beta / sqrt(n), so
  // theta' beta + theta_tilde' omega = v' beta.
  const RealVector v = theta.cast<double>() - (lambda / root_n) * X.transpose() * theta_tilde.cast<double>();
  const DenseMatrix omega_map = -(lambda / root_n) * X;
  const IndexSet t_off = complement(support_of(theta_tilde), n);
  DenseMatrix W_off(static_cast<Eigen::Index>(t_off.size()), p);
  for (std::size_t r = 0; r < t_off.size(); ++r) W_off.row(static_cast<Eigen::Index>(r)) = omega_map.row(t_off[r]);
  const RealVector w = RealVector::Ones(W_off.rows());

  const std::size_t orthants = std::size_t{1} << p;
  auto [arg, best] = best_slice(orthants, opts.workers, [&](std::size_t mask) {
    const RealVector sigma = orthant_signs(mask, p);
    RealVector g = sigma.cwiseProduct(v);
    for (Eigen::Index j = 0; j < p; ++j)
      if (theta(j) == 0) g(j) -= 1.0;
    return solve_slice(g, W_off * sigma.asDiagonal(), w, opts.solver);
  });

  IdentifiabilityVerdict out;
  out.method = VerdictMethod::sign_pattern_lp;
  out.max_value = best.value;
  out.identifiable = best.value <= -opts.margin;
  out.inconclusive = std::abs(best.value) < opts.margin;
  if (!out.identifiable) {
    const RealVector beta = orthant_signs(arg, p).cwiseProduct(best.b);
    out.witness = IdentifiabilityWitness{beta, omega_map * beta};
  }
  return out;
}

IdentifiabilityVerdict identifiability_by_vertex_oracle(const DenseMatrix& X, const SignVector& theta,
                                                        const SignVector& theta_tilde, double lambda,
                                                        std::size_t budget) {
  check_signs(X, theta, theta_tilde, lambda);
  const double root_n = std::sqrt(static_cast<double>(X.rows()));
  const RealVector beta0 = theta.cast<double>();
  const RealVector omega0 = theta_tilde.cast<double>();
  const LpProblem prob = formulate_jp(X, X * beta0 + root_n * omega0, lambda);
  const VertexOptima optima = enumerate_vertex_optima(prob, 1e-9, budget);

  IdentifiabilityVerdict out;
  out.method = VerdictMethod::vertex_oracle;
  RealVector target(beta0.size() + omega0.size());
  target << beta0, omega0;
  const RealVector first = prob.recompose(optima.points.front());
  out.identifiable = optima.unique() && (first - target).cwiseAbs().maxCoeff() <= 1e-7;
  out.max_value = optima.objective;
  if (!out.identifiable) {
    // Another optimal point minus the target lies in the null space.
    RealVector other = first;
    for (const auto& pt : optima.points) {
      const RealVector z = prob.recompose(pt);
      if ((z - target).cwiseAbs().maxCoeff() > 1e-7) {
        other = z;
        break;
      }
    }
    const RealVector d = other - target;
    const Eigen::Index p = X.cols();
    out.witness = IdentifiabilityWitness{d.head(p), lambda * d.tail(X.rows())};
  }
  return out;
}

double stable_nsp_margin(const DenseMatrix& X, const IndexSet& S0, const IndexSet& T0, double lambda,
                         double rho, std::size_t budget, const AnalysisOptions& opts) {
  if (X.rows() < 1 || X.cols() < 1) throw InputError("X must be non-empty");
  require_finite(X, "X");
  if (!(lambda > 0.0)) throw InputError("lambda must be > 0");
  if (!(rho >= 0.0)) throw InputError("rho must be >= 0");
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  require_index_set(S0, p, "S0");
  require_index_set(T0, n, "T0");

  const auto t_size = static_cast<Eigen::Index>(T0.size());
  if (p - 1 + t_size >= 63 || (std::size_t{1} << (p - 1 + t_size)) > budget)
    throw BudgetExceeded("stable NSP check needs 2^" + std::to_string(p - 1 + t_size) + " LPs");

  const DenseMatrix omega_map = -X / std::sqrt(static_cast<double>(n));
  const IndexSet t_off = complement(T0, n);
  DenseMatrix W_on(t_size, p), W_off(static_cast<Eigen::Index>(t_off.size()), p);
  for (Eigen::Index r = 0; r < t_size; ++r) W_on.row(r) = omega_map.row(T0[static_cast<std::size_t>(r)]);
  for (std::size_t r = 0; r < t_off.size(); ++r) W_off.row(static_cast<Eigen::Index>(r)) = omega_map.row(t_off[r]);
  const RealVector w = RealVector::Constant(W_off.rows(), rho * lambda);
  const std::vector<bool> in_s = membership(S0, p);

  // (beta, zeta) and (-beta, -zeta) give the same value: fix sign(beta_0) = +1.
  const std::size_t count = std::size_t{1} << (p - 1 + t_size);
  const SliceOptimum best = best_slice(count, opts.workers, [&](std::size_t k) {
    const RealVector sigma = orthant_signs(k << 1, p);
    const RealVector zeta = orthant_signs(k >> (p - 1), t_size);
    RealVector g = sigma.cwiseProduct(lambda * W_on.transpose() * zeta);
    for (Eigen::Index j = 0; j < p; ++j) g(j) += in_s[static_cast<std::size_t>(j)] ? 1.0 : -rho;
    return solve_slice(g, W_off * sigma.asDiagonal(), w, opts.solver);
  }).second;
  return best.value;
}

bool check_stable_nsp(const DenseMatrix& X, const IndexSet& S0, const IndexSet& T0, double lambda,
                      double rho, std::size_t budget, const AnalysisOptions& opts) {
  return stable_nsp_margin(X, S0, T0, lambda, rho, budget, opts) <= 1e-12;
}

CovarianceReport covariance_diagnostics(const DenseMatrix& sigma, Eigen::Index n, Eigen::Index s,
                                        Eigen::Index k, double beta_min, double sigma_noise,
                                        double lambda, const ProportionalConstants& constants) {
  if (sigma.rows() != sigma.cols() || sigma.rows() < 1) throw InputError("sigma must be square");
  require_finite(sigma, "sigma");
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + sigma.cwiseAbs().maxCoeff()))
    throw InputError("sigma must be symmetric");
  if (n < 1 || s < 0 || k < 0) throw InputError("n must be >= 1, s and k >= 0");
  if (!(lambda > 0.0)) throw InputError("lambda must be > 0");
  const Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(sigma, Eigen::EigenvaluesOnly);
  CovarianceReport r;
  r.lambda_min = eig.eigenvalues().minCoeff();
  r.lambda_max = eig.eigenvalues().maxCoeff();
  if (!(r.lambda_min > 0.0)) throw InputError("sigma must be positive definite");
  r.kappa = r.lambda_max / r.lambda_min;

  const auto p = static_cast<double>(sigma.rows());
  const auto nd = static_cast<double>(n);
  r.sample_size.lhs = nd;
  r.sample_size.rhs = constants.C * r.kappa / r.lambda_min * static_cast<double>(s) * std::log(p);
  r.sample_size.holds = r.sample_size.lhs >= r.sample_size.rhs;

  r.corruption_ratio.lhs = k == 0 ? std::numeric_limits<double>::infinity() : nd / static_cast<double>(k);
  r.corruption_ratio.rhs = std::max(1.0 / constants.C_prime, r.kappa / constants.C_double_prime);
  r.corruption_ratio.holds = r.corruption_ratio.lhs >= r.corruption_ratio.rhs;

  const double gap = std::sqrt(p / nd) - 1.0;
  r.beta_min.lhs = beta_min;
  r.beta_min.rhs = 10.0 * std::sqrt(2.0) * std::max(1.0, lambda) * sigma_noise * std::sqrt(p + nd) /
                   std::sqrt(r.lambda_min / 4.0 * gap * gap + 1.0);
  r.beta_min.holds = r.beta_min.lhs > r.beta_min.rhs;
  return r;
}

}  // namespace rlz
