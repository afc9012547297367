#include "rlz/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "rlz/errors.hpp"

namespace rlz {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::vector<std::uint64_t> path)
    : master_seed_(master_seed), path_(std::move(path)) {}

RngStream RngStream::child(std::uint64_t index) const {
  auto p = path_;
  p.push_back(index);
  return RngStream(master_seed_, std::move(p));
}

RngStream RngStream::child(std::initializer_list<std::uint64_t> indices) const {
  auto p = path_;
  p.insert(p.end(), indices.begin(), indices.end());
  return RngStream(master_seed_, std::move(p));
}

std::uint64_t RngStream::derived_seed() const {
  std::uint64_t h = splitmix64(master_seed_ ^ 0x5DEECE66DULL);
  for (std::uint64_t idx : path_) h = splitmix64(h ^ splitmix64(idx + 0x2545F4914F6CDD1DULL));
  return splitmix64(h + path_.size());
}

DenseMatrix standard_normal_matrix(Eigen::Index rows, Eigen::Index cols, const RngStream& stream) {
  auto eng = stream.engine();
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix out(rows, cols);
  for (Eigen::Index k = 0; k < out.size(); ++k) out.data()[k] = normal(eng);
  return out;
}

RealVector standard_normal_vector(Eigen::Index len, const RngStream& stream) {
  return standard_normal_matrix(len, 1, stream).col(0);
}

DenseMatrix toeplitz_sigma(Eigen::Index p, double rho) {
  if (p < 1) throw InputError("toeplitz_sigma: p must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) throw InputError("toeplitz_sigma: rho must lie in [0, 1)");
  DenseMatrix sigma(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      sigma(i, j) = i == j ? 1.0 : std::pow(rho, static_cast<double>(std::abs(i - j)));
  return sigma;
}

DenseMatrix sample_design(Eigen::Index n, Eigen::Index p, const DenseMatrix& sigma,
                          const RngStream& stream) {
  if (n < 1 || p < 1) throw InputError("sample_design: n and p must be >= 1");
  if (sigma.rows() != p || sigma.cols() != p)
    throw InputError("sample_design: sigma must be p x p");
  require_finite(sigma, "sample_design: sigma");
  if (!sigma.isApprox(sigma.transpose(), 1e-12))
    throw InputError("sample_design: sigma is not symmetric");
  Eigen::LLT<DenseMatrix> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw InputError("sample_design: Cholesky factorization failed (sigma not positive definite)");
  DenseMatrix z = standard_normal_matrix(n, p, stream);
  return z * llt.matrixL().transpose();
}

Standardization standardize(const DenseMatrix& X) {
  require_finite(X, "standardize");
  const Eigen::Index n = X.rows();
  Standardization out{DenseMatrix(X.rows(), X.cols()), RealVector(X.cols()), RealVector(X.cols())};
  const double target = std::sqrt(static_cast<double>(n));
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double mean = X.col(j).mean();
    RealVector centered = X.col(j).array() - mean;
    const double norm = centered.norm();
    if (!(norm > 1e-12 * std::max(1.0, X.col(j).cwiseAbs().maxCoeff())))
      throw InputError("standardize: column " + std::to_string(j) + " is constant");
    out.center(j) = mean;
    out.scale(j) = norm / target;
    out.matrix.col(j) = centered / out.scale(j);
  }
  return out;
}

DenseMatrix standardize_columns(const DenseMatrix& X) { return standardize(X).matrix; }

void require_finite(const DenseMatrix& m, std::string_view what) {
  if (!m.allFinite()) throw InputError(std::string(what) + ": non-finite entry");
}

void require_finite(const RealVector& v, std::string_view what) {
  if (!v.allFinite()) throw InputError(std::string(what) + ": non-finite entry");
}

void require_sign_vector(const SignVector& v, std::string_view what) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v(i) < -1 || v(i) > 1)
      throw InputError(std::string(what) + ": entries must be in {-1, 0, 1}");
}

void require_index_set(const IndexSet& s, Eigen::Index bound, std::string_view what) {
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] < 0 || s[k] >= bound)
      throw InputError(std::string(what) + ": index out of range");
    if (k > 0 && s[k] <= s[k - 1])
      throw InputError(std::string(what) + ": indices must be sorted and distinct");
  }
}

IndexSet support_of(const SignVector& v) {
  IndexSet s;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v(i) != 0) s.push_back(i);
  return s;
}

IndexSet complement(const IndexSet& s, Eigen::Index bound) {
  IndexSet out;
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < bound; ++i) {
    while (k < s.size() && s[k] < i) ++k;
    if (k < s.size() && s[k] == i) continue;
    out.push_back(i);
  }
  return out;
}

SignVector sign_of(const RealVector& v) {
  SignVector s(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) s(i) = (v(i) > 0) - (v(i) < 0);
  return s;
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace rlz
