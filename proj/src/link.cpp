#include "divlab/link.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "divlab/errors.hpp"

namespace divlab {

namespace {

// Gauss-Legendre nodes/weights on [-1,1], computed once by Newton iteration
// on the Legendre recurrence.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int order) {
    nodes.resize(order);
    weights.resize(order);
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= order; ++k) {
          double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = order * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      nodes[i] = -x;
      nodes[order - 1 - i] = x;
      double w = 2.0 / ((1.0 - x * x) * dp * dp);
      weights[i] = w;
      weights[order - 1 - i] = w;
    }
  }

  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(mid + half * nodes[i]);
    return s * half;
  }

  // Panelled composite rule.
  template <class F>
  double integrate(F&& f, double a, double b, int panels) const {
    double s = 0.0;
    const double w = (b - a) / panels;
    for (int p = 0; p < panels; ++p) s += integrate(f, a + p * w, a + (p + 1) * w);
    return s;
  }
};

const GaussLegendre& gl24() {
  static const GaussLegendre g(24);
  return g;
}

// Unnormalized bump on (-1,1).
double bump(double s) {
  double q = 1.0 - s * s;
  if (q <= 0.0) return 0.0;
  return std::exp(-1.0 / q);
}

// d/ds bump(s).
double bump_deriv(double s) {
  double q = 1.0 - s * s;
  if (q <= 0.0) return 0.0;
  return std::exp(-1.0 / q) * (-2.0 * s / (q * q));
}

// The piecewise profile from the link construction: 1/(1-t) left, 1+t right.
double profile(double t) { return t < 0.0 ? 1.0 / (1.0 - t) : 1.0 + t; }

struct Mollifier {
  double mass_scale = 0.0;  // 1 / integral of the raw bump
  double m2 = 0.0;
  double m4 = 0.0;
};

Mollifier build_mollifier() {
  const auto& g = gl24();
  double raw = g.integrate(bump, -1.0, 1.0, 16);
  Mollifier m;
  m.mass_scale = 1.0 / raw;
  // Independent check at doubled panel count; the mollifier must integrate to 1.
  double raw2 = g.integrate(bump, -1.0, 1.0, 32);
  if (std::abs(raw2 * m.mass_scale - 1.0) > 1e-8)
    throw NormalizationFailure("mollifier quadrature did not converge to unit mass");
  m.m2 = g.integrate([&](double s) { return s * s * bump(s) * m.mass_scale; }, -1.0, 1.0, 16);
  m.m4 =
      g.integrate([&](double s) { return s * s * s * s * bump(s) * m.mass_scale; }, -1.0, 1.0, 16);
  return m;
}

// (psi * profile)(t) with the kink at s = t split out of the panels.
double conv_profile(const Mollifier& m, double t) {
  const auto& g = gl24();
  if (t >= 1.0) return 1.0 + t;  // affine branch, psi has zero odd moments
  auto f = [&](double s) { return m.mass_scale * bump(s) * profile(t - s); };
  if (t <= -1.0) return g.integrate(f, -1.0, 1.0, 16);
  double left = g.integrate(f, -1.0, t, 16);
  double right = g.integrate(f, t, 1.0, 16);
  return left + right;
}

// (psi' * profile)(t) = d/dt (psi * profile)(t).
double conv_profile_deriv(const Mollifier& m, double t) {
  const auto& g = gl24();
  if (t >= 1.0) return 1.0;
  auto f = [&](double s) { return m.mass_scale * bump_deriv(s) * profile(t - s); };
  if (t <= -1.0) return g.integrate(f, -1.0, 1.0, 16);
  double left = g.integrate(f, -1.0, t, 16);
  double right = g.integrate(f, t, 1.0, 16);
  return left + right;
}

// Asymptotic left tail of the convolution in A = 1 - t >= 2.
double left_tail_value(const LinkTable& lk, double t) {
  double a = 1.0 - t;
  double conv = (1.0 + lk.psi_m2 / (a * a) + lk.psi_m4 / (a * a * a * a)) / a;
  return lk.k_min + lk.slope_right * conv;
}

double left_tail_derivative(const LinkTable& lk, double t) {
  double a = 1.0 - t;
  double a2 = a * a;
  double conv = 1.0 / a2 + 3.0 * lk.psi_m2 / (a2 * a2) + 5.0 * lk.psi_m4 / (a2 * a2 * a2);
  return lk.slope_right * conv;
}

struct HermiteCell {
  int k;
  double u;  // local coordinate in [0,1]
};

HermiteCell locate(const LinkTable& lk, double t) {
  double s = (t - lk.t_lo) / lk.step;
  int k = std::clamp(static_cast<int>(s), 0, lk.size() - 2);
  return {k, s - k};
}

}  // namespace

LinkTable build_link(double k_min, double table_range, double table_step) {
  if (!(k_min > 0.0 && k_min < 1.0))
    throw DomainViolation("build_link: k_min must lie in (0,1)");
  if (!(table_range >= 10.0)) throw DomainViolation("build_link: table_range must be >= 10");
  if (!(table_step > 0.0 && table_step <= 1e-3))
    throw DomainViolation("build_link: table_step must be in (0, 1e-3]");

  Mollifier m = build_mollifier();
  LinkTable lk;
  lk.k_min = k_min;
  lk.t_lo = -table_range;
  lk.t_hi = table_range;
  // Align the step so t = 0 lands exactly on a node.
  int half_steps = static_cast<int>(std::ceil(table_range / table_step));
  lk.step = table_range / half_steps;
  int count = 2 * half_steps + 1;
  lk.psi_m2 = m.m2;
  lk.psi_m4 = m.m4;
  lk.conv_at_zero = conv_profile(m, 0.0);
  lk.slope_right = (1.0 - k_min) / lk.conv_at_zero;
  lk.phi.resize(count);
  lk.dphi.resize(count);
  for (int k = 0; k < count; ++k) {
    double t = lk.t_lo + lk.step * k;
    lk.phi[k] = k_min + lk.slope_right * conv_profile(m, t);
    lk.dphi[k] = lk.slope_right * conv_profile_deriv(m, t);
  }
  // Build-time contract checks (Conditions on the link function). The
  // derivative table is flattened to exactly nondecreasing once the raw
  // quadrature is within tolerance; Phi' is constant for t >= 1 and the raw
  // values there can undershoot a late-table maximum by ~1e-12.
  if (std::abs(lk.phi[half_steps] - 1.0) > 1e-10)
    throw NormalizationFailure("build_link: Phi(0) != 1");
  for (int k = 0; k + 1 < count; ++k) {
    if (!(lk.phi[k + 1] > lk.phi[k]))
      throw NormalizationFailure("build_link: Phi not strictly increasing");
    if (lk.dphi[k + 1] < lk.dphi[k] - 1e-9)
      throw NormalizationFailure("build_link: Phi' not nondecreasing");
    lk.dphi[k + 1] = std::max(lk.dphi[k + 1], lk.dphi[k]);
  }
  for (int k = 0; k < count; ++k) {
    if (!(lk.dphi[k] > 0.0)) throw NormalizationFailure("build_link: Phi' not positive");
    if (!(lk.phi[k] > k_min)) throw NormalizationFailure("build_link: Phi <= k_min");
  }
  return lk;
}

double link_value(const LinkTable& lk, double t) {
  if (t < lk.t_lo) return left_tail_value(lk, t);
  if (t > lk.t_hi) return lk.k_min + lk.slope_right * (1.0 + t);
  auto [k, u] = locate(lk, t);
  double h = lk.step;
  double y0 = lk.phi[k], y1 = lk.phi[k + 1];
  double d0 = lk.dphi[k] * h, d1 = lk.dphi[k + 1] * h;
  double u2 = u * u, u3 = u2 * u;
  return (2.0 * u3 - 3.0 * u2 + 1.0) * y0 + (u3 - 2.0 * u2 + u) * d0 +
         (-2.0 * u3 + 3.0 * u2) * y1 + (u3 - u2) * d1;
}

double link_derivative(const LinkTable& lk, double t) {
  if (t < lk.t_lo) return left_tail_derivative(lk, t);
  if (t > lk.t_hi) return lk.slope_right;
  auto [k, u] = locate(lk, t);
  return (1.0 - u) * lk.dphi[k] + u * lk.dphi[k + 1];
}

GridField apply_link(const LinkTable& lk, const GridField& field) {
  std::vector<double> v(field.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = link_value(lk, field.values[i]);
  return GridField(field.spec, std::move(v));
}

double invert_link(const LinkTable& lk, double value) {
  if (!(value > lk.k_min))
    throw ValueBelowKmin("invert_link: value <= k_min");
  // Exact affine inverse beyond the right end of the table.
  if (value >= lk.phi.back()) return (value - lk.k_min) / lk.slope_right - 1.0;
  double lo, hi;
  if (value <= lk.phi.front()) {
    // Left tail: A = 1 - t solves slope*(1 + m2/A^2 + m4/A^4)/A = value - k_min.
    double w = (value - lk.k_min) / lk.slope_right;
    double a = 1.0 / w;
    for (int it = 0; it < 60; ++it) {
      double a2 = a * a;
      double g = (1.0 + lk.psi_m2 / a2 + lk.psi_m4 / (a2 * a2)) / a - w;
      double dg = -(1.0 / a2 + 3.0 * lk.psi_m2 / (a2 * a2) + 5.0 * lk.psi_m4 / (a2 * a2 * a2));
      double step = g / dg;
      a -= step;
      if (std::abs(step) < 1e-14 * a) break;
    }
    return 1.0 - a;
  }
  // Bracket inside the table by binary search on the monotone array.
  auto it = std::lower_bound(lk.phi.begin(), lk.phi.end(), value);
  int k = std::max<int>(0, static_cast<int>(it - lk.phi.begin()) - 1);
  lo = lk.t_at(k);
  hi = lk.t_at(std::min(k + 1, lk.size() - 1));
  double t = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    double f = link_value(lk, t) - value;
    if (std::abs(f) <= 1e-10) return t;
    double d = link_derivative(lk, t);
    double tn = t - f / d;
    if (tn <= lo || tn >= hi) {
      // Newton left the bracket: bisect instead.
      (f > 0.0 ? hi : lo) = t;
      tn = 0.5 * (lo + hi);
    } else {
      (f > 0.0 ? hi : lo) = t;
    }
    t = tn;
  }
  return t;
}

void write_link_csv(const LinkTable& lk, std::ostream& os) {
  os.precision(17);
  os << "t,phi,dphi\n";
  for (int k = 0; k < lk.size(); ++k)
    os << lk.t_at(k) << ',' << lk.phi[k] << ',' << lk.dphi[k] << '\n';
}

void write_link_csv(const LinkTable& lk, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_link_csv(lk, os);
}

}  // namespace divlab
