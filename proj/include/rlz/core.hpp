#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace rlz {

using DenseMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
// Entries restricted to {-1, 0, +1}.
using SignVector = Eigen::VectorXi;
// Sorted, duplicate-free list of 0-based indices.
using IndexSet = std::vector<Eigen::Index>;

// Deterministic random stream identified by a master seed and a path of indices.
//
// The engine seed is a SplitMix64 hash of (master_seed, path, path length), so
// every (seed, path) pair owns an independent sequence and replications can run
// in any order or on any thread without changing results.
class RngStream {
 public:
  explicit RngStream(std::uint64_t master_seed, std::vector<std::uint64_t> path = {});

  std::uint64_t master_seed() const { return master_seed_; }
  const std::vector<std::uint64_t>& path() const { return path_; }

  // Stream whose path is this path with `index` appended.
  RngStream child(std::uint64_t index) const;
  RngStream child(std::initializer_list<std::uint64_t> indices) const;

  // 64-bit digest of (master_seed, path); also usable as a master seed downstream.
  std::uint64_t derived_seed() const;

  std::mt19937_64 engine() const { return std::mt19937_64(derived_seed()); }

 private:
  std::uint64_t master_seed_;
  std::vector<std::uint64_t> path_;
};

// i.i.d. N(0,1) entries, filled in column-major order from `stream`.
DenseMatrix standard_normal_matrix(Eigen::Index rows, Eigen::Index cols, const RngStream& stream);
RealVector standard_normal_vector(Eigen::Index len, const RngStream& stream);

// Sigma_ij = rho^|i-j|. Requires p >= 1 and 0 <= rho < 1.
DenseMatrix toeplitz_sigma(Eigen::Index p, double rho);

// n rows drawn i.i.d. from N(0, sigma) as Z * L^T with L the lower Cholesky factor.
// Throws InputError when sigma is not symmetric positive definite.
DenseMatrix sample_design(Eigen::Index n, Eigen::Index p, const DenseMatrix& sigma,
                          const RngStream& stream);

struct Standardization {
  DenseMatrix matrix;
  RealVector center;  // column means of the input
  RealVector scale;   // matrix.col(j) = (input.col(j) - center(j)) / scale(j)
};

// Centers every column and scales it to Euclidean norm sqrt(n) (population
// variance convention). Throws InputError naming the first constant column.
Standardization standardize(const DenseMatrix& X);
DenseMatrix standardize_columns(const DenseMatrix& X);

// Validation helpers shared by all modules; they throw InputError.
void require_finite(const DenseMatrix& m, std::string_view what);
void require_finite(const RealVector& v, std::string_view what);
void require_sign_vector(const SignVector& v, std::string_view what);
void require_index_set(const IndexSet& s, Eigen::Index bound, std::string_view what);

IndexSet support_of(const SignVector& v);
IndexSet complement(const IndexSet& s, Eigen::Index bound);
SignVector sign_of(const RealVector& v);

// Runs fn(i) for i in [0, count) on up to `workers` threads. Results must be
// written to per-index slots; fn must not touch shared mutable state.
// The first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace rlz
