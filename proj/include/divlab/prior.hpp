#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "divlab/grid.hpp"
#include "divlab/linalg.hpp"
#include "divlab/rng.hpp"
#include "divlab/wavelet.hpp"

namespace divlab {

// Smooth cutoff chi: 1 on the plateau, 0 outside the support box, glued by
// the integrated mollifier bump; tensorized in 2D. The plateau strictly
// contains the index/truth region K so that fine-scale basis functions
// meeting K are eventually untouched by the cutoff.
struct CutoffSpec {
  double plateau_lo = 0.2;
  double plateau_hi = 0.8;
  double support_lo = 0.1;
  double support_hi = 0.9;
  bool identity = false;  // chi == 1 everywhere (diagnostic)
};

double cutoff_value(const CutoffSpec& c, double x);
GridField cutoff_field(const CutoffSpec& c, const DomainSpec& spec);

enum class PriorVariant { rescaled_matern, sieve_wavelet, hierarchical };

struct PriorSpec {
  PriorVariant variant = PriorVariant::rescaled_matern;
  double alpha = 3.0;
  CutoffSpec cutoff;
  double k_lo = 0.25, k_hi = 0.75;  // the region K the series indices must meet
  BasisKind basis = BasisKind::daubechies;
  int wavelet_moments = 6;
  long sample_size = 10000;  // N, rescaled Matern only
  int truncation = 2;        // J, sieve only
  double scale_constant = 1.0;
};

// Whittle-Matern covariance with spectral density (1 + |xi|^2)^(-alpha):
// K(x, y) = int exp(-i <x-y, xi>) (1 + |xi|^2)^(-alpha) dxi, evaluated by
// quadrature of the exact heat-kernel (radial) reduction of the Fourier
// integral. Requires alpha > d/2; throws QuadratureNonConvergence if the
// refinement loop stalls.
double matern_covariance(const Point& x, const Point& y, double alpha, int dim);
double matern_covariance_lag(double r, double alpha, int dim);

// Basis coefficients of a series draw: entry (level, pos) multiplies the
// basis function Psi_{level,pos}, so a prior draw stores 2^(-level alpha) z.
struct SeriesCoefficients {
  int truncation = 0;
  std::vector<std::vector<double>> levels;

  int total_count() const;
};

double rkhs_norm(const SeriesCoefficients& coeffs, double alpha);

// Random truncation level: J = floor(log2(phiinv(T)^(1/d))) + 1, T ~ Exp(1),
// phi(x) = x log x inverted by Newton; clamped to J >= 1.
int sample_truncation_level(int dim, Rng& rng);

// Exact tail law Pr(J > j) and pmf of the truncation level.
double truncation_tail(int dim, int j);
double truncation_pmf(int dim, int j);

// Holds the expensive sampling machinery: Cholesky factor of the grid
// covariance for the Matern variant, or the series basis. In either case the
// latent coordinates are iid standard normal a priori, which is what the pCN
// sampler mixes in.
class GaussianSampler {
 public:
  GaussianSampler(const PriorSpec& spec, const DomainSpec& domain);

  // Test-support constructor: explicit basis fields with unit prior weights.
  GaussianSampler(std::vector<GridField> basis_fields, const DomainSpec& domain);

  const PriorSpec& spec() const { return spec_; }
  const DomainSpec& domain() const { return domain_; }
  const GridField& cutoff() const { return chi_; }
  double rescale_factor() const { return scale_; }
  bool is_series() const { return series_ != nullptr || !explicit_basis_.empty(); }
  const SeriesBasis* series() const { return series_.get(); }
  int max_series_level() const;

  // Latent dimension; for the hierarchical variant pass the current J.
  int latent_dim(int truncation_level) const;

  // Field synthesis from latent coordinates (scaling and cutoff applied).
  GridField synthesize(std::span<const double> latent, int truncation_level) const;

  // chi * (L z): base Matern draw before rescaling.
  GridField base_field(std::span<const double> white) const;

  SeriesCoefficients to_coefficients(std::span<const double> latent, int truncation_level) const;

  double level_weight(int level) const;  // 2^(-level alpha); 1 for explicit basis

  // Covariance reconstruction (Matern variant) for factor tests.
  double covariance_entry(int i, int j) const;
  double assembled_covariance(int i, int j) const;

 private:
  PriorSpec spec_;
  DomainSpec domain_;
  GridField chi_;
  double scale_ = 1.0;
  double jitter_ = 1e-10;
  std::unique_ptr<DenseCholesky> factor_;
  std::vector<double> cov_;  // assembled covariance incl. jitter (kept for tests)
  std::unique_ptr<SeriesBasis> series_;
  std::vector<GridField> explicit_basis_;
};

struct PriorDraw {
  GridField field;
  std::optional<SeriesCoefficients> coefficients;
  int truncation_level = 0;  // J used (series variants)
};

GridField draw_base_matern(const GaussianSampler& sampler, Rng& rng);
PriorDraw draw_prior(const PriorSpec& spec, const GaussianSampler& sampler, Rng& rng);

// Coefficient CSV dump `level,index,value`.
void write_coefficients_csv(const SeriesCoefficients& coeffs, std::ostream& os);

}  // namespace divlab
