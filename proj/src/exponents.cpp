#include "divlab/exponents.hpp"

#include <cmath>
#include <vector>

#include "divlab/errors.hpp"
#include "divlab/linalg.hpp"

namespace divlab {

RateExponents theoretical_exponents(double alpha, double beta_reg, double alpha0, double tail_a,
                                    int dim) {
  if (dim != 1 && dim != 2) throw DomainViolation("theoretical_exponents: dim must be 1 or 2");
  const double d = static_cast<double>(dim);
  if (!(alpha > 1.0 + d / 2.0))
    throw DomainViolation("theoretical_exponents: alpha must exceed 1 + d/2");
  if (!(beta_reg >= 1.0)) throw DomainViolation("theoretical_exponents: beta_reg must be >= 1");
  if (!(alpha0 >= alpha)) throw DomainViolation("theoretical_exponents: alpha0 must be >= alpha");
  if (!(tail_a > 0.0)) throw DomainViolation("theoretical_exponents: tail exponent must be > 0");

  RateExponents e;
  e.delta_exp = (alpha + 1.0) / (2.0 * alpha + 2.0 + d);
  e.lambda = (alpha + 1.0) * (beta_reg - 1.0) / ((2.0 * alpha + 2.0 + d) * (beta_reg + 1.0));
  e.xi_exp = (alpha0 + 1.0) / (2.0 * alpha0 + 2.0 + d);
  e.rho = (alpha0 + 1.0) * (alpha - 1.0) / ((2.0 * alpha0 + 2.0 + d) * (alpha + 1.0));
  e.alpha_star = (2.0 * alpha * alpha * alpha + (2.0 + d) * alpha * alpha +
                  (1.0 + tail_a + d) * alpha + tail_a * d / 2.0) *
                 (alpha + 1.0) / (alpha - 1.0);
  return e;
}

SlopeFit fit_loglog_slope(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 3) throw InsufficientPoints("fit_loglog_slope: need at least 3 pairs");
  std::vector<double> x, y;
  x.reserve(pairs.size());
  y.reserve(pairs.size());
  for (const auto& [n, err] : pairs) {
    if (!(n > 0.0) || !(err > 0.0))
      throw NonPositiveError("fit_loglog_slope: N and error must be positive");
    x.push_back(std::log(n));
    y.push_back(std::log(err));
  }
  LineFit f = fit_line(x, y);
  return {f.slope, f.slope_stderr};
}

}  // namespace divlab
