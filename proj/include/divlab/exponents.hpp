#pragma once

#include <span>
#include <utility>

namespace divlab {

// The theoretical rate exponents, evaluated exactly from their closed forms:
//   delta_exp  : prediction-risk rate exponent (alpha+1)/(2 alpha+2+d)
//   lambda     : conductivity L2 rate (alpha+1)(beta-1)/((2 alpha+2+d)(beta+1))
//   xi_exp     : hierarchical prediction exponent (alpha0+1)/(2 alpha0+2+d)
//                (the rate carries an extra log N factor)
//   rho        : hierarchical conductivity rate
//                (alpha0+1)(alpha-1)/((2 alpha0+2+d)(alpha+1))
//   alpha_star : smoothness threshold
//                [2a^3+(2+d)a^2+(1+a_tail+d)a+a_tail d/2](a+1)/(a-1), a = alpha
struct RateExponents {
  double delta_exp = 0.0;
  double lambda = 0.0;
  double xi_exp = 0.0;
  double rho = 0.0;
  double alpha_star = 0.0;
};

RateExponents theoretical_exponents(double alpha, double beta_reg, double alpha0, double tail_a,
                                    int dim);

// Least squares on (log N, log error); throws InsufficientPoints for fewer
// than 3 pairs and NonPositiveError for non-positive entries.
struct SlopeFit {
  double slope = 0.0;
  double stderr_ = 0.0;
};
SlopeFit fit_loglog_slope(std::span<const std::pair<double, double>> pairs);

}  // namespace divlab
