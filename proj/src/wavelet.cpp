#include "divlab/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace divlab {

namespace {

// Binomial coefficient as double; arguments stay small here.
double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r *= static_cast<double>(n - k + i) / i;
  return r;
}

// Roots of a monic complex polynomial by Durand-Kerner iteration.
std::vector<std::complex<double>> polynomial_roots(std::vector<std::complex<double>> monic) {
  using C = std::complex<double>;
  const int deg = static_cast<int>(monic.size()) - 1;
  std::vector<C> roots(deg);
  C seed(0.4, 0.9);
  C acc(1.0, 0.0);
  for (int i = 0; i < deg; ++i) {
    acc *= seed;
    roots[i] = acc;
  }
  auto eval = [&](C z) {
    C v = monic[0];
    for (std::size_t i = 1; i < monic.size(); ++i) v = v * z + monic[i];
    return v;
  };
  for (int it = 0; it < 500; ++it) {
    double moved = 0.0;
    for (int i = 0; i < deg; ++i) {
      C denom(1.0, 0.0);
      for (int j = 0; j < deg; ++j)
        if (j != i) denom *= roots[i] - roots[j];
      C delta = eval(roots[i]) / denom;
      roots[i] -= delta;
      moved = std::max(moved, std::abs(delta));
    }
    if (moved < 1e-15) break;
  }
  return roots;
}

// Gaussian elimination with partial pivoting for the small cascade system.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, int n) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-14)
      throw SolverDivergence("cascade eigen-system is singular");
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
      std::swap(b[piv], b[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      double f = a[r * n + col] / a[col * n + col];
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * x[c];
    x[r] = s / a[r * n + r];
  }
  return x;
}

int ilog2(int n) {
  int p = 0;
  while ((1 << p) < n) ++p;
  return p;
}

}  // namespace

std::vector<double> daubechies_filter(int k) {
  using C = std::complex<double>;
  if (k < 1 || k > 16) throw DomainViolation("daubechies_filter: order out of range");
  if (k == 1) {
    double v = 1.0 / std::sqrt(2.0);
    return {v, v};  // Haar
  }
  // Half-band polynomial P(y) = sum_m binom(k-1+m, m) y^m, highest degree first.
  std::vector<C> p(static_cast<std::size_t>(k));
  for (int m = 0; m < k; ++m) p[k - 1 - m] = C(binom(k - 1 + m, m), 0.0);
  C lead = p[0];
  for (auto& c : p) c /= lead;
  auto yroots = polynomial_roots(p);

  // Map each root y to the z-root of z^2 - (2 - 4y) z + 1 inside the unit disk.
  std::vector<C> zroots;
  zroots.reserve(yroots.size());
  for (C y : yroots) {
    C b = 2.0 - 4.0 * y;
    C disc = std::sqrt(b * b - 4.0);
    C z1 = 0.5 * (b + disc), z2 = 0.5 * (b - disc);
    zroots.push_back(std::abs(z1) < std::abs(z2) ? z1 : z2);
  }

  // m0(z) = ((1+z)/2)^k * c * prod (z - z_i), normalized so m0(1) = 1.
  std::vector<C> poly{C(1.0, 0.0)};
  auto mul_linear = [&](C a0, C a1) {
    // poly *= (a1 z + a0)
    std::vector<C> out(poly.size() + 1, C(0.0, 0.0));
    for (std::size_t i = 0; i < poly.size(); ++i) {
      out[i] += poly[i] * a0;
      out[i + 1] += poly[i] * a1;
    }
    poly = std::move(out);
  };
  for (int i = 0; i < k; ++i) mul_linear(C(0.5, 0.0), C(0.5, 0.0));
  for (C z : zroots) mul_linear(-z, C(1.0, 0.0));
  C at_one(0.0, 0.0);
  for (std::size_t i = poly.size(); i-- > 0;) at_one += poly[i];
  for (auto& c : poly) c /= at_one;

  std::vector<double> h(poly.size());
  const double rt2 = std::sqrt(2.0);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (std::abs(poly[i].imag()) > 1e-10)
      throw SolverDivergence("daubechies_filter: complex residue in filter");
    // Reversed to the classical extremal-phase (minimum-phase) ordering.
    h[poly.size() - 1 - i] = rt2 * poly[i].real();
  }
  // Orthonormality sanity: sum h_j h_{j+2m} = delta_m.
  for (int m = 0; m < k; ++m) {
    double s = 0.0;
    for (std::size_t j = 0; j + 2 * m < h.size(); ++j) s += h[j] * h[j + 2 * m];
    if (std::abs(s - (m == 0 ? 1.0 : 0.0)) > 1e-10)
      throw SolverDivergence("daubechies_filter: orthonormality check failed");
  }
  return h;
}

CascadeTable build_cascade(int k, int refine_levels) {
  if (refine_levels < 0) throw DomainViolation("build_cascade: negative refinement");
  auto h = daubechies_filter(k);
  const int taps = static_cast<int>(h.size());
  const int width = taps - 1;  // support [0, width]
  const double rt2 = std::sqrt(2.0);

  // Integer values: phi(i) = sqrt(2) sum_j h_j phi(2i - j), i = 1..width-1,
  // with the normalization sum_i phi(i) = 1 replacing the last row.
  const int m = width - 1;
  std::vector<double> a(static_cast<std::size_t>(m) * m, 0.0);
  std::vector<double> b(static_cast<std::size_t>(m), 0.0);
  for (int i = 1; i <= m; ++i) {
    for (int ip = 1; ip <= m; ++ip) {
      int j = 2 * i - ip;
      double v = (j >= 0 && j < taps) ? rt2 * h[j] : 0.0;
      if (i == ip) v -= 1.0;
      a[(i - 1) * m + (ip - 1)] = v;
    }
  }
  for (int ip = 0; ip < m; ++ip) a[(m - 1) * m + ip] = 1.0;
  b[m - 1] = 1.0;
  auto ints = solve_dense(std::move(a), std::move(b), m);

  std::vector<double> phi(static_cast<std::size_t>(width) + 1, 0.0);
  for (int i = 1; i <= m; ++i) phi[i] = ints[i - 1];

  // Dyadic refinement: new odd points from the two-scale relation, even
  // points carried over.
  for (int q = 0; q < refine_levels; ++q) {
    const int step = 1 << q;  // old index units per integer
    std::vector<double> fine(static_cast<std::size_t>(width) * (step * 2) + 1, 0.0);
    auto old_at = [&](long idx) -> double {
      if (idx < 0 || idx >= static_cast<long>(phi.size())) return 0.0;
      return phi[static_cast<std::size_t>(idx)];
    };
    for (std::size_t mm = 0; mm < fine.size(); ++mm) {
      if (mm % 2 == 0) {
        fine[mm] = phi[mm / 2];
      } else {
        double s = 0.0;
        for (int j = 0; j < taps; ++j) s += h[j] * old_at(static_cast<long>(mm) - static_cast<long>(j) * step);
        fine[mm] = rt2 * s;
      }
    }
    phi = std::move(fine);
  }

  // psi(m 2^-q) = sqrt(2) sum_j g_j phi(2 m 2^-q - j), g_j = (-1)^j h_{taps-1-j}.
  const int q = refine_levels;
  const int step = 1 << q;
  std::vector<double> psi(phi.size(), 0.0);
  auto phi_at = [&](long idx) -> double {
    if (idx < 0 || idx >= static_cast<long>(phi.size())) return 0.0;
    return phi[static_cast<std::size_t>(idx)];
  };
  for (std::size_t mm = 0; mm < psi.size(); ++mm) {
    double s = 0.0;
    for (int j = 0; j < taps; ++j) {
      double g = ((j % 2) ? -1.0 : 1.0) * h[taps - 1 - j];
      s += g * phi_at(2 * static_cast<long>(mm) - static_cast<long>(j) * step);
    }
    psi[mm] = rt2 * s;
  }

  CascadeTable t;
  t.vanishing_moments = k;
  t.refine_levels = refine_levels;
  t.phi = std::move(phi);
  t.psi = std::move(psi);
  return t;
}

SeriesBasis::SeriesBasis(BasisKind kind, int vanishing_moments, const DomainSpec& spec,
                         double k_lo, double k_hi)
    : kind_(kind), vanishing_moments_(vanishing_moments), spec_(spec), k_lo_(k_lo), k_hi_(k_hi) {
  validate(spec);
  if (!(k_lo > 0.0 && k_lo < k_hi && k_hi < 1.0))
    throw DomainViolation("SeriesBasis: K must satisfy 0 < k_lo < k_hi < 1");
  const int p = ilog2(spec.n);
  if (kind_ == BasisKind::sine) {
    level_offset_ = 0;
    // Level ell holds wavenumbers k in [2^(ell-1), 2^ell); cap at Nyquist n/2.
    int lmax = 0;
    while ((1 << (lmax + 1)) - 1 <= spec.n / 2) ++lmax;
    max_level_ = lmax;
    return;
  }
  if (vanishing_moments_ < 2) throw DomainViolation("SeriesBasis: need >= 2 vanishing moments");
  const int width = 2 * vanishing_moments_ - 1;
  // Smallest dyadic scale at which every K-meeting function is supported
  // strictly inside the domain.
  double margin = std::min(k_lo_, 1.0 - k_hi_);
  int j0 = 1;
  while (static_cast<double>(width) / (1 << j0) >= margin) ++j0;
  level_offset_ = j0 - 1;
  // A scale-j wavelet atom needs one highpass plus p-j-1 lowpass synthesis
  // steps, so the finest representable scale is p-1.
  max_level_ = p - 1 - level_offset_;
  if (max_level_ < 1)
    throw UnsupportedLevel("SeriesBasis: grid too coarse for the wavelet support");
  filter_ = daubechies_filter(vanishing_moments_);
}

void SeriesBasis::ensure_level(int level) const {
  if (level < 1 || level > max_level_)
    throw UnsupportedLevel("SeriesBasis: level " + std::to_string(level) +
                           " not representable on n=" + std::to_string(spec_.n));
  if (static_cast<int>(levels_.size()) < level) levels_.resize(level);
  if (!levels_[level - 1].empty()) return;
  auto* self = const_cast<SeriesBasis*>(this);
  if (kind_ == BasisKind::daubechies)
    self->build_daub_level(level);
  else
    self->build_sine_level(level);
}

void SeriesBasis::build_daub_level(int level) {
  const int n = spec_.n;
  const int p = ilog2(n);
  const int j = level_offset_ + level;
  const int q = p - j;  // synthesis steps from the coefficient slot to nodes
  const int width = 2 * vanishing_moments_ - 1;
  const int r_lo = static_cast<int>(std::ceil(k_lo_ * (1 << j))) - width;
  const int r_hi = static_cast<int>(std::floor(k_hi_ * (1 << j)));
  auto& out = levels_[level - 1];
  const int taps = static_cast<int>(filter_.size());
  std::vector<double> g(static_cast<std::size_t>(taps));
  for (int i = 0; i < taps; ++i) g[i] = ((i % 2) ? -1.0 : 1.0) * filter_[taps - 1 - i];

  // Upsample by two and convolve. The filters sum-square to one and are
  // orthogonal to their even translates, so each step is an l2 isometry.
  auto synth_step = [&](const std::vector<double>& c, const std::vector<double>& f) {
    std::vector<double> outv(2 * c.size() - 1 + f.size() - 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i)
      for (int t = 0; t < taps; ++t) outv[2 * i + t] += c[i] * f[t];
    return outv;
  };

  // Atom for a unit coefficient at (level j, translation r): one highpass
  // step then q-1 lowpass steps; node values are scaled by sqrt(n) so the
  // trapezoid inner product reproduces the exact discrete orthonormality.
  auto atom_axis = [&](int r, bool wavelet) {
    std::vector<double> c{1.0};
    if (wavelet) {
      c = synth_step(c, g);
      for (int s = 1; s < q; ++s) c = synth_step(c, filter_);
    } else {
      for (int s = 0; s < q; ++s) c = synth_step(c, filter_);
    }
    int i0 = r << q;
    // Clip to the node range (retained atoms are interior by construction).
    int lead = std::max(0, -i0);
    int len = std::min<int>(static_cast<int>(c.size()) - lead, n + 1 - std::max(i0, 0));
    std::vector<double> v(c.begin() + lead, c.begin() + lead + std::max(len, 0));
    return std::pair{std::max(i0, 0), std::move(v)};
  };

  if (spec_.dim == 1) {
    const double scale = std::sqrt(static_cast<double>(n));
    for (int r = r_lo; r <= r_hi; ++r) {
      auto [i0, vals] = atom_axis(r, true);
      for (auto& v : vals) v *= scale;
      out.push_back(LocalField{i0, 0, static_cast<int>(vals.size()), 1, std::move(vals)});
    }
    return;
  }
  // 2D tensor wavelets: three orientations (phi x psi, psi x phi, psi x psi).
  const double scale2 = static_cast<double>(n);
  for (int orient = 0; orient < 3; ++orient) {
    for (int ry = r_lo; ry <= r_hi; ++ry) {
      for (int rx = r_lo; rx <= r_hi; ++rx) {
        auto [x0, vx] = atom_axis(rx, orient != 0);
        auto [y0, vy] = atom_axis(ry, orient != 1);
        LocalField f;
        f.ix0 = x0;
        f.iy0 = y0;
        f.nx = static_cast<int>(vx.size());
        f.ny = static_cast<int>(vy.size());
        f.values.resize(static_cast<std::size_t>(f.nx) * f.ny);
        for (int iy = 0; iy < f.ny; ++iy)
          for (int ix = 0; ix < f.nx; ++ix)
            f.values[static_cast<std::size_t>(iy) * f.nx + ix] = scale2 * vx[ix] * vy[iy];
        out.push_back(std::move(f));
      }
    }
  }
}

void SeriesBasis::build_sine_level(int level) {
  const int n = spec_.n;
  const int k_first = 1 << (level - 1);
  const int k_last = (1 << level) - 1;
  auto& out = levels_[level - 1];
  auto axis = [&](int k) {
    std::vector<double> v(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i)
      v[i] = std::sqrt(2.0) * std::sin(k * std::numbers::pi * i / n);
    return v;
  };
  if (spec_.dim == 1) {
    for (int k = k_first; k <= k_last; ++k) {
      out.push_back(LocalField{0, 0, n + 1, 1, axis(k)});
    }
    return;
  }
  // 2D: pairs with max dyadic block equal to this level.
  auto lev_of = [](int k) {
    int l = 1;
    while ((1 << l) <= k) ++l;
    return l;
  };
  for (int ky = 1; ky <= k_last; ++ky) {
    for (int kx = 1; kx <= k_last; ++kx) {
      if (std::max(lev_of(kx), lev_of(ky)) != level) continue;
      auto vx = axis(kx), vy = axis(ky);
      LocalField f;
      f.ix0 = 0;
      f.iy0 = 0;
      f.nx = n + 1;
      f.ny = n + 1;
      f.values.resize(static_cast<std::size_t>(f.nx) * f.ny);
      for (int iy = 0; iy <= n; ++iy)
        for (int ix = 0; ix <= n; ++ix)
          f.values[static_cast<std::size_t>(iy) * f.nx + ix] = vx[ix] * vy[iy];
      out.push_back(std::move(f));
    }
  }
}

int SeriesBasis::level_size(int level) const {
  ensure_level(level);
  return static_cast<int>(levels_[level - 1].size());
}

int SeriesBasis::cumulative_size(int levels) const {
  int s = 0;
  for (int l = 1; l <= levels; ++l) s += level_size(l);
  return s;
}

const LocalField& SeriesBasis::local(int level, int pos) const {
  ensure_level(level);
  const auto& lv = levels_[level - 1];
  if (pos < 0 || pos >= static_cast<int>(lv.size()))
    throw DomainViolation("SeriesBasis: index out of range");
  return lv[static_cast<std::size_t>(pos)];
}

GridField SeriesBasis::synthesize(int level, int pos) const {
  Grid g = build_grid(spec_);
  std::vector<double> nodes(static_cast<std::size_t>(g.node_count), 0.0);
  accumulate(level, pos, 1.0, nodes);
  return GridField(spec_, std::move(nodes));
}

void SeriesBasis::accumulate(int level, int pos, double coeff, std::vector<double>& nodes) const {
  const LocalField& f = local(level, pos);
  const std::size_t stride = spec_.dim == 1 ? 0 : static_cast<std::size_t>(spec_.n + 1);
  for (int iy = 0; iy < f.ny; ++iy) {
    double* row = nodes.data() + static_cast<std::size_t>(f.iy0 + iy) * stride;
    const double* src = f.values.data() + static_cast<std::size_t>(iy) * f.nx;
    for (int ix = 0; ix < f.nx; ++ix) row[f.ix0 + ix] += coeff * src[ix];
  }
}

std::optional<int> SeriesBasis::containment_level(double plateau_lo, double plateau_hi) const {
  if (kind_ == BasisKind::sine) return std::nullopt;
  double margin = std::min(k_lo_ - plateau_lo, plateau_hi - k_hi_);
  if (margin <= 0.0) return std::nullopt;
  const int width = 2 * vanishing_moments_ - 1;
  for (int level = 1; level <= max_level_; ++level) {
    int j = level_offset_ + level;
    if (static_cast<double>(width) / (1 << j) <= margin) return level;
  }
  return std::nullopt;
}

}  // namespace divlab
