#pragma once

#include <optional>
#include <vector>

#include "divlab/grid.hpp"

namespace divlab {

// Daubechies lowpass filter with the given number of vanishing moments
// (extremal phase, 2k taps, sum = sqrt(2)). Computed by spectral
// factorization of the half-band polynomial, so any modest order works.
std::vector<double> daubechies_filter(int vanishing_moments);

// Pointwise values of the scaling function and mother wavelet on the dyadic
// grid of step 2^-q over the support [0, 2k-1], by the cascade algorithm:
// integer values from the refinement eigenproblem, then dyadic subdivision.
struct CascadeTable {
  int vanishing_moments = 0;
  int refine_levels = 0;  // q
  std::vector<double> phi;  // phi(m * 2^-q), m = 0 .. (2k-1) << q
  std::vector<double> psi;  // psi(m * 2^-q), same indexing

  int support_width() const { return 2 * vanishing_moments - 1; }
};

CascadeTable build_cascade(int vanishing_moments, int refine_levels);

enum class BasisKind { daubechies, sine };

// A basis function sampled over its support on the grid: a contiguous node
// window (1D: ny = 1). Values are in raster order within the window.
struct LocalField {
  int ix0 = 0, iy0 = 0;
  int nx = 0, ny = 1;
  std::vector<double> values;
};

// Orthonormal series basis on the grid, restricted to indices whose support
// meets the square K = [k_lo, k_hi]^d. For the Daubechies provider the series
// level ell maps to dyadic scale level_offset() + ell, the offset chosen so
// every retained basis function is supported inside the open domain. Grid
// values are the cascade recursion applied to the discrete coefficient
// impulse (the iterated synthesis filter bank) refined to the grid's dyadic
// resolution; those atoms are exactly orthonormal in the trapezoid inner
// product and converge to wavelet point samples under refinement. The sine
// provider (diagnostic mode) has global support and offset 0.
class SeriesBasis {
 public:
  SeriesBasis(BasisKind kind, int vanishing_moments, const DomainSpec& spec, double k_lo,
              double k_hi);

  BasisKind kind() const { return kind_; }
  const DomainSpec& domain() const { return spec_; }
  int vanishing_moments() const { return vanishing_moments_; }
  int level_offset() const { return level_offset_; }
  // Highest series level representable on this grid; UnsupportedLevel beyond.
  int max_level() const { return max_level_; }
  // Number of basis functions at a series level (throws UnsupportedLevel).
  int level_size(int level) const;
  // Total count over levels 1..J.
  int cumulative_size(int levels) const;

  const LocalField& local(int level, int pos) const;
  GridField synthesize(int level, int pos) const;

  // Accumulate coeff * basis into a raw node array.
  void accumulate(int level, int pos, double coeff, std::vector<double>& nodes) const;

  // Smallest series level at which every retained basis function is supported
  // inside [plateau_lo, plateau_hi]^d (where a cutoff equal to one leaves it
  // untouched); empty for the sine provider.
  std::optional<int> containment_level(double plateau_lo, double plateau_hi) const;


 private:
  void build_daub_level(int level);
  void build_sine_level(int level);
  void ensure_level(int level) const;

  BasisKind kind_;
  int vanishing_moments_;
  DomainSpec spec_;
  double k_lo_, k_hi_;
  int level_offset_ = 0;
  int max_level_ = 0;
  std::vector<double> filter_;
  mutable std::vector<std::vector<LocalField>> levels_;   // built lazily
};

}  // namespace divlab
