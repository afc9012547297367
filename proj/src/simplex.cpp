#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rlz/errors.hpp"
#include "rlz/lp_solver.hpp"

namespace rlz {

std::string_view to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::tolerance_failure: return "tolerance_failure";
  }
  return "unknown";
}

RealVector LpProblem::recompose(const RealVector& x) const {
  RealVector z(static_cast<Eigen::Index>(var_map.size()));
  for (std::size_t k = 0; k < var_map.size(); ++k)
    z(static_cast<Eigen::Index>(k)) = x(var_map[k].positive) - x(var_map[k].negative);
  return z;
}

namespace {

constexpr double kPivotTol = 1e-9;

// Column j < N is A.col(j); column N + r is the artificial unit vector e_r.
class RevisedSimplex {
 public:
  RevisedSimplex(const LpProblem& prob, const SolverOptions& opts)
      : opts_(opts), m_(prob.rows()), n_(prob.cols()), A_(prob.A), b_(prob.b), c_(prob.c) {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (b_(i) < 0) {
        A_.row(i) *= -1.0;
        b_(i) = -b_(i);
      }
    }
    b_scale_ = 1.0 + (m_ > 0 ? b_.cwiseAbs().maxCoeff() : 0.0);
    max_pivots_ = opts.max_pivots.value_or(50 * static_cast<std::size_t>(m_ + n_));
    bland_after_ = opts.pivot_rule == PivotRule::bland ? 0 : 10 * static_cast<std::size_t>(m_ + n_);
    is_basic_.assign(static_cast<std::size_t>(n_ + m_), false);
    barred_.assign(static_cast<std::size_t>(n_ + m_), false);
  }

  LpResult run() {
    LpResult out;
    if (m_ == 0) {
      out.x = RealVector::Zero(n_);
      out.status = (c_.array() >= 0).all() ? LpStatus::optimal : LpStatus::unbounded;
      return out;
    }
    const bool needs_phase_one = crash();
    LpStatus status = LpStatus::optimal;
    if (needs_phase_one) {
      RealVector cost = RealVector::Zero(n_ + m_);
      cost.tail(m_).setOnes();
      status = iterate(cost);
      if (status == LpStatus::optimal) {
        double infeasibility = 0.0;
        for (Eigen::Index r = 0; r < m_; ++r)
          if (basis_[r] >= n_) infeasibility += std::max(0.0, x_b_(r));
        if (infeasibility > 1e3 * opts_.feas_tol * b_scale_) status = LpStatus::infeasible;
        else drive_out_artificials();
      }
    }
    // Artificials never (re-)enter in phase two.
    for (Eigen::Index j = n_; j < n_ + m_; ++j) barred_[j] = true;
    if (status == LpStatus::optimal) {
      RealVector cost = RealVector::Zero(n_ + m_);
      cost.head(n_) = c_;
      status = iterate(cost);
    }
    out.status = status;
    out.pivots = pivots_;
    out.x = RealVector::Zero(n_);
    for (Eigen::Index r = 0; r < m_; ++r) {
      out.basis.push_back(basis_[r]);
      if (basis_[r] < n_) out.x(basis_[r]) = std::max(0.0, x_b_(r));
    }
    out.objective = c_.dot(out.x);
    return out;
  }

 private:
  Eigen::VectorXd column(Eigen::Index j) const {
    if (j < n_) return A_.col(j);
    return RealVector::Unit(m_, j - n_);
  }

  // Picks, per row, the cheapest positive unit column of A. Returns true when
  // some row still needs an artificial variable.
  bool crash() {
    basis_.assign(static_cast<std::size_t>(m_), -1);
    std::vector<double> best_ratio(static_cast<std::size_t>(m_), std::numeric_limits<double>::infinity());
    for (Eigen::Index j = 0; j < n_; ++j) {
      Eigen::Index row = -1;
      int nonzeros = 0;
      for (Eigen::Index i = 0; i < m_ && nonzeros < 2; ++i) {
        if (A_(i, j) != 0.0) {
          ++nonzeros;
          row = i;
        }
      }
      if (nonzeros != 1 || A_(row, j) <= 0.0) continue;
      const double ratio = c_(j) / A_(row, j);
      if (ratio < best_ratio[row]) {
        best_ratio[row] = ratio;
        basis_[row] = j;
      }
    }
    bool artificial = false;
    for (Eigen::Index r = 0; r < m_; ++r) {
      if (basis_[r] < 0) {
        basis_[r] = n_ + r;
        artificial = true;
      }
      is_basic_[basis_[r]] = true;
    }
    if (!artificial) {
      // No artificial columns exist at all; keep them out of pricing.
      for (Eigen::Index j = n_; j < n_ + m_; ++j) barred_[j] = true;
    }
    refactor();
    return artificial;
  }

  bool refactor() {
    DenseMatrix B(m_, m_);
    for (Eigen::Index r = 0; r < m_; ++r) B.col(r) = column(basis_[r]);
    Eigen::PartialPivLU<DenseMatrix> lu(B);
    if (!(lu.rcond() > 1e-14)) return false;
    b_inv_ = lu.inverse();
    x_b_ = b_inv_ * b_;
    since_refactor_ = 0;
    return true;
  }

  void pivot(Eigen::Index r, Eigen::Index q, const RealVector& u) {
    apply_pivot(r, q, u, std::max(0.0, x_b_(r)) / u(r));
    if (++since_refactor_ >= opts_.refactor_interval) refactor();
  }

  void apply_pivot(Eigen::Index r, Eigen::Index q, const RealVector& u, double theta) {
    x_b_ -= theta * u;
    x_b_(r) = theta;
    RealVector pivot_row = b_inv_.row(r).transpose() / u(r);
    b_inv_.noalias() -= u * pivot_row.transpose();
    b_inv_.row(r) = pivot_row.transpose();
    is_basic_[basis_[r]] = false;
    if (basis_[r] >= n_) barred_[basis_[r]] = true;
    is_basic_[q] = true;
    basis_[r] = q;
    ++pivots_;
  }

  LpStatus iterate(const RealVector& cost) {
    int verify_rounds = 0;
    while (true) {
      if (pivots_ >= max_pivots_) return LpStatus::tolerance_failure;
      const bool bland = pivots_ >= bland_after_;

      RealVector c_b(m_);
      for (Eigen::Index r = 0; r < m_; ++r) c_b(r) = cost(basis_[r]);
      const RealVector y = b_inv_.transpose() * c_b;
      RealVector reduced = cost.head(n_) - A_.transpose() * y;

      Eigen::Index entering = -1;
      double best = -opts_.opt_tol;
      for (Eigen::Index j = 0; j < n_ + m_; ++j) {
        if (is_basic_[j] || barred_[j]) continue;
        const double d = j < n_ ? reduced(j) : cost(j) - y(j - n_);
        if (d < best) {
          best = d;
          entering = j;
          if (bland) break;
        }
      }

      if (entering < 0) {
        // Candidate optimum: confirm against a fresh factorization.
        if (!refactor()) return LpStatus::tolerance_failure;
        if (x_b_.minCoeff() < -1e3 * opts_.feas_tol * b_scale_) return LpStatus::tolerance_failure;
        if (since_verified_ == pivots_ || ++verify_rounds > 3) return LpStatus::optimal;
        since_verified_ = pivots_;
        continue;
      }

      const RealVector u = b_inv_ * column(entering);
      Eigen::Index leaving = -1;
      double theta = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < m_; ++r) {
        if (u(r) > kPivotTol) theta = std::min(theta, std::max(0.0, x_b_(r)) / u(r));
      }
      if (!std::isfinite(theta)) return LpStatus::unbounded;
      const double tie = 1e-12 * (1.0 + theta);
      for (Eigen::Index r = 0; r < m_; ++r) {
        if (u(r) <= kPivotTol) continue;
        if (std::max(0.0, x_b_(r)) / u(r) > theta + tie) continue;
        if (leaving < 0) {
          leaving = r;
        } else if (bland ? basis_[r] < basis_[leaving] : u(r) > u(leaving)) {
          leaving = r;
        }
      }
      pivot(leaving, entering, u);
    }
  }

  // Replaces zero-level basic artificials by original columns where possible.
  // Artificials that remain sit on redundant rows and stay at zero.
  void drive_out_artificials() {
    for (Eigen::Index r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      const RealVector row_r = (b_inv_.row(r) * A_).transpose();
      Eigen::Index best = -1;
      double best_abs = 1e-7;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (is_basic_[j] || std::abs(row_r(j)) <= best_abs) continue;
        best = j;
        best_abs = std::abs(row_r(j));
      }
      if (best < 0) continue;
      const RealVector u = b_inv_ * A_.col(best);
      x_b_(r) = 0.0;
      apply_pivot(r, best, u, 0.0);
    }
    refactor();
  }

  SolverOptions opts_;
  Eigen::Index m_;
  Eigen::Index n_;
  DenseMatrix A_;
  RealVector b_;
  RealVector c_;
  double b_scale_ = 1.0;
  std::size_t max_pivots_ = 0;
  std::size_t bland_after_ = 0;
  std::size_t pivots_ = 0;
  std::size_t since_verified_ = std::numeric_limits<std::size_t>::max();
  int since_refactor_ = 0;
  std::vector<Eigen::Index> basis_;
  std::vector<bool> is_basic_;
  std::vector<bool> barred_;
  DenseMatrix b_inv_;
  RealVector x_b_;
};

}  // namespace

LpResult solve_lp(const LpProblem& prob, const SolverOptions& opts) {
  if (prob.b.size() != prob.rows() || prob.c.size() != prob.cols())
    throw InputError("solve_lp: dimension mismatch between A, b and c");
  if (!(opts.feas_tol > 0) || !(opts.opt_tol > 0))
    throw InputError("solve_lp: tolerances must be positive");
  if (opts.max_pivots && *opts.max_pivots < 1) throw InputError("solve_lp: max_pivots must be >= 1");
  require_finite(prob.A, "solve_lp: A");
  require_finite(prob.b, "solve_lp: b");
  require_finite(prob.c, "solve_lp: c");
  return RevisedSimplex(prob, opts).run();
}

}  // namespace rlz
