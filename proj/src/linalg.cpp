#include "divlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace divlab {

BandMatrix::BandMatrix(int dim, int bandwidth)
    : dim_(dim), bw_(bandwidth), a_(static_cast<std::size_t>(dim) * (bandwidth + 1), 0.0) {
  if (dim <= 0 || bandwidth < 0 || bandwidth >= dim)
    throw DomainViolation("BandMatrix: bad shape");
}

double& BandMatrix::at(int i, int j) {
  int k = i - j;
  if (k < 0 || k > bw_) throw DomainViolation("BandMatrix::at outside band");
  return a_[static_cast<std::size_t>(i) * (bw_ + 1) + k];
}

double BandMatrix::at(int i, int j) const {
  if (j > i) std::swap(i, j);
  int k = i - j;
  if (k > bw_) return 0.0;
  return a_[static_cast<std::size_t>(i) * (bw_ + 1) + k];
}

void BandMatrix::factorize() {
  const int w = bw_ + 1;
  for (int j = 0; j < dim_; ++j) {
    double d = a_[static_cast<std::size_t>(j) * w];
    int k0 = std::max(0, j - bw_);
    for (int k = k0; k < j; ++k) {
      double l = a_[static_cast<std::size_t>(j) * w + (j - k)];
      d -= l * l;
    }
    if (!(d > 0.0)) throw SolverDivergence("BandMatrix: non-positive pivot at " + std::to_string(j));
    double dj = std::sqrt(d);
    a_[static_cast<std::size_t>(j) * w] = dj;
    int iend = std::min(dim_, j + bw_ + 1);
    for (int i = j + 1; i < iend; ++i) {
      double s = a_[static_cast<std::size_t>(i) * w + (i - j)];
      int kk0 = std::max({0, i - bw_, j - bw_});
      for (int k = kk0; k < j; ++k)
        s -= a_[static_cast<std::size_t>(i) * w + (i - k)] *
             a_[static_cast<std::size_t>(j) * w + (j - k)];
      a_[static_cast<std::size_t>(i) * w + (i - j)] = s / dj;
    }
  }
  factored_ = true;
}

std::vector<double> BandMatrix::solve(std::span<const double> b) const {
  if (!factored_) throw DomainViolation("BandMatrix::solve before factorize");
  if (static_cast<int>(b.size()) != dim_) throw DomainViolation("BandMatrix::solve size mismatch");
  const int w = bw_ + 1;
  std::vector<double> y(b.begin(), b.end());
  for (int i = 0; i < dim_; ++i) {
    double s = y[i];
    int k0 = std::max(0, i - bw_);
    for (int k = k0; k < i; ++k) s -= a_[static_cast<std::size_t>(i) * w + (i - k)] * y[k];
    y[i] = s / a_[static_cast<std::size_t>(i) * w];
  }
  for (int i = dim_ - 1; i >= 0; --i) {
    double s = y[i];
    int iend = std::min(dim_, i + bw_ + 1);
    for (int k = i + 1; k < iend; ++k) s -= a_[static_cast<std::size_t>(k) * w + (k - i)] * y[k];
    y[i] = s / a_[static_cast<std::size_t>(i) * w];
  }
  return y;
}

std::vector<double> BandMatrix::multiply(std::span<const double> x) const {
  if (factored_) throw DomainViolation("BandMatrix::multiply after factorize");
  std::vector<double> y(static_cast<std::size_t>(dim_), 0.0);
  for (int i = 0; i < dim_; ++i) {
    int j0 = std::max(0, i - bw_);
    for (int j = j0; j <= i; ++j) {
      double v = at(i, j);
      y[i] += v * x[j];
      if (j != i) y[j] += v * x[i];
    }
  }
  return y;
}

DenseCholesky::DenseCholesky(std::vector<double> matrix, int dim) : dim_(dim), l_(std::move(matrix)) {
  if (l_.size() != static_cast<std::size_t>(dim) * dim)
    throw DomainViolation("DenseCholesky: size mismatch");
  for (int j = 0; j < dim_; ++j) {
    double d = l_[static_cast<std::size_t>(j) * dim_ + j];
    for (int k = 0; k < j; ++k) {
      double l = l_[static_cast<std::size_t>(j) * dim_ + k];
      d -= l * l;
    }
    if (!(d > 0.0))
      throw SolverDivergence("DenseCholesky: non-positive pivot at " + std::to_string(j));
    double dj = std::sqrt(d);
    l_[static_cast<std::size_t>(j) * dim_ + j] = dj;
    for (int i = j + 1; i < dim_; ++i) {
      double s = l_[static_cast<std::size_t>(i) * dim_ + j];
      for (int k = 0; k < j; ++k)
        s -= l_[static_cast<std::size_t>(i) * dim_ + k] * l_[static_cast<std::size_t>(j) * dim_ + k];
      l_[static_cast<std::size_t>(i) * dim_ + j] = s / dj;
    }
  }
  // Zero the strict upper triangle so the factor is clean.
  for (int i = 0; i < dim_; ++i)
    for (int j = i + 1; j < dim_; ++j) l_[static_cast<std::size_t>(i) * dim_ + j] = 0.0;
}

std::vector<double> DenseCholesky::apply_factor(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) throw DomainViolation("apply_factor size mismatch");
  std::vector<double> y(static_cast<std::size_t>(dim_), 0.0);
  for (int i = 0; i < dim_; ++i) {
    const double* row = l_.data() + static_cast<std::size_t>(i) * dim_;
    double s = 0.0;
    for (int j = 0; j <= i; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

double DenseCholesky::reconstruct(int i, int j) const {
  double s = 0.0;
  int kmax = std::min(i, j);
  for (int k = 0; k <= kmax; ++k)
    s += l_[static_cast<std::size_t>(i) * dim_ + k] * l_[static_cast<std::size_t>(j) * dim_ + k];
  return s;
}

CgResult cg_solve(const std::function<void(std::span<const double>, std::span<double>)>& apply,
                  std::span<const double> b, std::span<const double> inv_diag, double tol,
                  int max_iter) {
  const std::size_t n = b.size();
  std::vector<double> x(n, 0.0), r(b.begin(), b.end()), z(n), p(n), ap(n);
  double bnorm = 0.0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0.0) return {std::move(x), 0, 0.0};
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = 0.0;
  for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];
  for (int it = 1; it <= max_iter; ++it) {
    apply(p, ap);
    double pap = 0.0;
    for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
    if (!(pap > 0.0)) throw SolverDivergence("cg_solve: matrix not positive definite");
    double alpha = rz / pap;
    double rnorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
      rnorm += r[i] * r[i];
    }
    rnorm = std::sqrt(rnorm);
    if (rnorm <= tol * bnorm) return {std::move(x), it, rnorm / bnorm};
    double rz_new = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = inv_diag[i] * r[i];
      rz_new += r[i] * z[i];
    }
    double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverDivergence("cg_solve: exceeded " + std::to_string(max_iter) + " iterations");
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw InsufficientPoints("fit_line: need >= 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw InsufficientPoints("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.slope_stderr = n > 2 ? std::sqrt(ss / static_cast<double>(n - 2) / sxx) : 0.0;
  return f;
}

}  // namespace divlab
