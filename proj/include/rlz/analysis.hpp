#pragma once

#include <optional>
#include <string_view>

#include "rlz/core.hpp"
#include "rlz/lp_solver.hpp"

namespace rlz {

enum class VerdictMethod { vertex_oracle, sign_pattern_lp, perturbation_probe };
std::string_view to_string(VerdictMethod m);

struct IdentifiabilityWitness {
  RealVector beta;
  RealVector omega;  // X beta + sqrt(n) omega / lambda = 0
};

struct IdentifiabilityVerdict {
  bool identifiable = false;
  std::optional<IdentifiabilityWitness> witness;
  VerdictMethod method = VerdictMethod::sign_pattern_lp;
  // sign_pattern_lp: max over the l1 sphere of
  // |theta' beta + theta_tilde' omega| - ||beta_off||_1 - ||omega_off||_1.
  double max_value = 0.0;
  // False for the perturbation probe, which is a heuristic.
  bool certified = true;
  // |max_value| below the strictness margin; reported as not identifiable.
  bool inconclusive = false;
};

struct AnalysisOptions {
  // Largest p for the exact orthant enumeration; beyond it the check falls
  // back to the perturbation probe.
  Eigen::Index max_p = 14;
  double margin = 1e-9;
  unsigned workers = 1;
  SolverOptions solver;
};

// Identifiability condition by one LP per sign orthant of beta (2^p LPs).
IdentifiabilityVerdict check_identifiability(const DenseMatrix& X, const SignVector& theta,
                                             const SignVector& theta_tilde, double lambda,
                                             const AnalysisOptions& opts = {});

// Independent check: JP at y = X theta + sqrt(n) theta_tilde must have the
// unique vertex optimum (theta, theta_tilde). Throws BudgetExceeded when the
// enumeration is too large.
IdentifiabilityVerdict identifiability_by_vertex_oracle(const DenseMatrix& X, const SignVector& theta,
                                                        const SignVector& theta_tilde, double lambda,
                                                        std::size_t budget = 1'000'000);

// Maximum over the l1 sphere in beta of
// ||beta_S||_1 + lambda ||omega_T||_1 - rho (||beta_Sc||_1 + lambda ||omega_Tc||_1)
// with omega = -X beta / sqrt(n). Needs 2^(p - 1 + |T|) LPs; throws
// BudgetExceeded beyond `budget`.
double stable_nsp_margin(const DenseMatrix& X, const IndexSet& S0, const IndexSet& T0, double lambda,
                         double rho = 1.0 / 3.0, std::size_t budget = std::size_t{1} << 20,
                         const AnalysisOptions& opts = {});

// True iff stable_nsp_margin <= 1e-12.
bool check_stable_nsp(const DenseMatrix& X, const IndexSet& S0, const IndexSet& T0, double lambda,
                      double rho = 1.0 / 3.0, std::size_t budget = std::size_t{1} << 20,
                      const AnalysisOptions& opts = {});

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

struct ProportionalConstants {
  double C = 144.0 * 144.0;
  double C_prime = 1.0;
  double C_double_prime = 1.0;
};

struct CovarianceReport {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double kappa = 0.0;
  // n >= C kappa / lambda_min * s log p
  BoundCheck sample_size;
  // n / k >= max(1 / C', kappa / C'')
  BoundCheck corruption_ratio;
  // beta_min > 10 sqrt(2) max(1, lambda) sigma sqrt(p + n) / sqrt(lambda_min/4 (sqrt(p/n) - 1)^2 + 1)
  BoundCheck beta_min;
};

// Throws InputError when sigma is not symmetric positive definite.
CovarianceReport covariance_diagnostics(const DenseMatrix& sigma, Eigen::Index n, Eigen::Index s,
                                        Eigen::Index k, double beta_min, double sigma_noise,
                                        double lambda, const ProportionalConstants& constants = {});

}  // namespace rlz
