#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "divlab/errors.hpp"

namespace divlab {

// Symmetric positive definite band matrix, lower storage:
// band(i, k) = A(i, i-k) for k = 0..bandwidth, row-major in i.
class BandMatrix {
 public:
  BandMatrix(int dim, int bandwidth);

  int dim() const { return dim_; }
  int bandwidth() const { return bw_; }

  double& at(int i, int j);        // requires i >= j, i-j <= bandwidth
  double at(int i, int j) const;   // zero outside the band

  // In-place Cholesky A = L L^T; throws SolverDivergence if a pivot fails.
  void factorize();
  // Solve A x = b using the factorization.
  std::vector<double> solve(std::span<const double> b) const;

  std::vector<double> multiply(std::span<const double> x) const;

 private:
  int dim_;
  int bw_;
  bool factored_ = false;
  std::vector<double> a_;
};

// Dense SPD Cholesky, lower triangular storage (row-major full matrix in/out).
// Used for covariance factors; throws SolverDivergence on pivot failure.
class DenseCholesky {
 public:
  explicit DenseCholesky(std::vector<double> matrix, int dim);

  int dim() const { return dim_; }
  // y = L x
  std::vector<double> apply_factor(std::span<const double> x) const;
  // Reconstruct (L L^T)(i,j) for testing.
  double reconstruct(int i, int j) const;
  double factor_at(int i, int j) const { return l_[static_cast<std::size_t>(i) * dim_ + j]; }

 private:
  int dim_;
  std::vector<double> l_;
};

struct CgResult {
  std::vector<double> x;
  int iterations = 0;
  double residual = 0.0;
};

// Preconditioned conjugate gradient with diagonal (Jacobi) preconditioner.
// apply: y = A x. Throws SolverDivergence when max_iter is exceeded.
CgResult cg_solve(const std::function<void(std::span<const double>, std::span<double>)>& apply,
                  std::span<const double> b, std::span<const double> inv_diag, double tol,
                  int max_iter);

// Least squares fit y ~ a + b x; returns {intercept, slope, slope_stderr}.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace divlab
