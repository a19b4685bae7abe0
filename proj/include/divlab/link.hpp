#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "divlab/grid.hpp"

namespace divlab {

// Tabulated regular link function Phi: R -> (k_min, inf), strictly increasing
// with Phi(0) = 1. Built from the mollified piecewise-rational/affine profile,
// so the right tail is exactly affine and the left tail decays to k_min like
// 1/(1-t) (tail exponent a = 2 for the derivative).
struct LinkTable {
  double k_min = 0.1;
  double t_lo = -10.0;
  double t_hi = 10.0;
  double step = 1e-3;
  std::vector<double> phi;   // Phi(t_k)
  std::vector<double> dphi;  // Phi'(t_k)
  double conv_at_zero = 0.0;  // (psi * phi_profile)(0), the normalizer
  double psi_m2 = 0.0;        // second moment of the mollifier
  double psi_m4 = 0.0;        // fourth moment of the mollifier
  double slope_right = 0.0;   // (1 - k_min) / conv_at_zero

  int size() const { return static_cast<int>(phi.size()); }
  double t_at(int k) const { return t_lo + step * k; }
};

// Builds the table by Gauss-Legendre quadrature of the convolution with the
// standard bump mollifier on (-1,1). Throws NormalizationFailure if the
// mollifier mass deviates from 1 by more than 1e-8, DomainViolation on bad
// arguments (k_min outside (0,1), range < 10, step > 1e-3).
LinkTable build_link(double k_min, double table_range = 10.0, double table_step = 1e-3);

// Monotone cubic interpolation inside the table, analytic tails outside.
double link_value(const LinkTable& link, double t);
double link_derivative(const LinkTable& link, double t);

// Conductivity f = Phi o F, applied node by node.
GridField apply_link(const LinkTable& link, const GridField& field);

// Solves Phi(t) = value to |Phi(t) - value| <= 1e-9 by bisection plus Newton
// polish; throws ValueBelowKmin when value <= k_min.
double invert_link(const LinkTable& link, double value);

// CSV dump `t,phi,dphi` for inspection.
void write_link_csv(const LinkTable& link, std::ostream& os);
void write_link_csv(const LinkTable& link, const std::string& path);

}  // namespace divlab
