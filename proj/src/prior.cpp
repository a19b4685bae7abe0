#include "divlab/prior.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

namespace divlab {

namespace {

// Integrated, normalized mollifier bump: S(0) = 0, S(1) = 1, smooth.
double smoothstep(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  static const std::vector<double> table = [] {
    const int m = 4096;
    std::vector<double> t(m + 1, 0.0);
    auto bump = [](double v) {
      double q = v * (1.0 - v);
      return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
    };
    double acc = 0.0;
    for (int i = 1; i <= m; ++i) {
      double a = static_cast<double>(i - 1) / m, b = static_cast<double>(i) / m;
      acc += (bump(a) + 4.0 * bump(0.5 * (a + b)) + bump(b)) / (6.0 * m);
      t[i] = acc;
    }
    for (auto& v : t) v /= acc;
    return t;
  }();
  double s = u * 4096.0;
  int i = std::min(static_cast<int>(s), 4095);
  double w = s - i;
  return (1.0 - w) * table[i] + w * table[i + 1];
}

// Non-oscillatory reduction of the spectral integral:
//   K(r) = pi^(d/2)/Gamma(alpha) * int_0^inf t^(alpha-d/2-1) e^(-t-r^2/(4t)) dt,
// trapezoid in u = log t, refined until two successive grids agree.
double matern_heat_integral(double r, double alpha, int dim) {
  const double nu = alpha - 0.5 * dim;
  if (!(nu > 0.0)) throw DomainViolation("matern_covariance: requires alpha > d/2");
  const double r2 = 0.25 * r * r;
  const double u_lo = -std::max(40.0, 46.0 / nu);
  const double u_hi = 8.0;
  auto integrand = [&](double u) {
    double t = std::exp(u);
    return std::exp(nu * u - t - (r2 > 0.0 ? r2 / t : 0.0));
  };
  double prev = 0.0;
  int steps = 2048;
  for (int refine = 0; refine < 7; ++refine) {
    double h = (u_hi - u_lo) / steps;
    double s = 0.5 * (integrand(u_lo) + integrand(u_hi));
    for (int i = 1; i < steps; ++i) s += integrand(u_lo + h * i);
    s *= h;
    if (refine > 0 && std::abs(s - prev) <= 1e-11 * std::max(std::abs(s), 1e-30)) {
      return std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(alpha) * s;
    }
    prev = s;
    steps *= 2;
  }
  throw QuadratureNonConvergence("matern_covariance: quadrature failed to converge");
}

}  // namespace

double cutoff_value(const CutoffSpec& c, double x) {
  if (c.identity) return 1.0;
  if (x <= c.support_lo || x >= c.support_hi) return 0.0;
  if (x < c.plateau_lo) return smoothstep((x - c.support_lo) / (c.plateau_lo - c.support_lo));
  if (x > c.plateau_hi) return smoothstep((c.support_hi - x) / (c.support_hi - c.plateau_hi));
  return 1.0;
}

GridField cutoff_field(const CutoffSpec& c, const DomainSpec& spec) {
  if (!c.identity &&
      !(0.0 <= c.support_lo && c.support_lo < c.plateau_lo && c.plateau_lo < c.plateau_hi &&
        c.plateau_hi < c.support_hi && c.support_hi <= 1.0))
    throw DomainViolation("CutoffSpec: need support_lo < plateau_lo < plateau_hi < support_hi");
  if (spec.dim == 1) return sample_field_1d(spec, [&](double x) { return cutoff_value(c, x); });
  return sample_field_2d(
      spec, [&](double x, double y) { return cutoff_value(c, x) * cutoff_value(c, y); });
}

double matern_covariance_lag(double r, double alpha, int dim) {
  if (dim != 1 && dim != 2) throw DomainViolation("matern_covariance: dim must be 1 or 2");
  return matern_heat_integral(std::abs(r), alpha, dim);
}

double matern_covariance(const Point& x, const Point& y, double alpha, int dim) {
  double dx = x[0] - y[0];
  double dy = dim == 2 ? x[1] - y[1] : 0.0;
  return matern_covariance_lag(std::sqrt(dx * dx + dy * dy), alpha, dim);
}

int SeriesCoefficients::total_count() const {
  int s = 0;
  for (const auto& l : levels) s += static_cast<int>(l.size());
  return s;
}

double rkhs_norm(const SeriesCoefficients& coeffs, double alpha) {
  double s = 0.0;
  for (std::size_t l = 0; l < coeffs.levels.size(); ++l) {
    double w = std::pow(2.0, 2.0 * alpha * static_cast<double>(l + 1));
    for (double c : coeffs.levels[l]) s += w * c * c;
  }
  return std::sqrt(s);
}

int sample_truncation_level(int dim, Rng& rng) {
  if (dim != 1 && dim != 2) throw DomainViolation("sample_truncation_level: dim must be 1 or 2");
  double t = rng.exponential();
  // phi(x) = x ln x on [1, inf); phi(1) = 0, so T below that maps to 1.
  double x = 1.0;
  if (t > 0.0) {
    x = t + 2.0;  // phi(t + 2) > t for all t >= 0, so Newton descends safely
    for (int it = 0; it < 50; ++it) {
      double lx = std::log(x);
      double f = x * lx - t;
      double step = f / (lx + 1.0);
      x -= step;
      if (x < 1.0) {
        x = 1.0;
        break;
      }
      if (std::abs(step) < 1e-12 * std::max(1.0, x)) break;
    }
  }
  double j = std::floor(std::log2(std::pow(x, 1.0 / dim))) + 1.0;
  return std::max(1, static_cast<int>(j));
}

double truncation_tail(int dim, int j) {
  if (j < 1) return 1.0;
  double m = std::pow(2.0, static_cast<double>(j) * dim);
  return std::exp(-m * std::log(m));
}

double truncation_pmf(int dim, int j) {
  if (j < 1) return 0.0;
  return truncation_tail(dim, j - 1) - truncation_tail(dim, j);
}

GaussianSampler::GaussianSampler(const PriorSpec& spec, const DomainSpec& domain)
    : spec_(spec), domain_(domain), chi_(cutoff_field(spec.cutoff, domain)) {
  validate(domain);
  if (!(spec.alpha > 1.0 + 0.5 * domain.dim))
    throw DomainViolation("PriorSpec: alpha must exceed 1 + d/2");
  if (!spec.cutoff.identity &&
      !(spec.cutoff.plateau_lo < spec.k_lo && spec.k_hi < spec.cutoff.plateau_hi))
    throw DomainViolation("PriorSpec: cutoff plateau must strictly contain K");
  if (spec_.variant == PriorVariant::rescaled_matern) {
    if (spec_.sample_size < 1) throw DomainViolation("PriorSpec: sample_size must be >= 1");
    const int d = domain.dim;
    scale_ = spec_.scale_constant *
             std::pow(static_cast<double>(spec_.sample_size),
                      -static_cast<double>(d) / (4.0 * spec_.alpha + 4.0 + 2.0 * d));
    Grid g = build_grid(domain);
    const int m = g.node_count;
    // Dense covariance factorization is the desk-scale design: <= 513 nodes
    // in 1D, <= 65^2 in 2D.
    if (m > 4225)
      throw DomainViolation("PriorSpec: Matern grid too large for dense factorization (n <= 512 "
                            "in 1D, n <= 64 in 2D)");
    // Distinct squared integer lags share one kernel evaluation.
    std::map<long, double> memo;
    auto kernel = [&](long sq) {
      auto it = memo.find(sq);
      if (it != memo.end()) return it->second;
      double v = matern_covariance_lag(std::sqrt(static_cast<double>(sq)) * g.h, spec_.alpha, d);
      memo.emplace(sq, v);
      return v;
    };
    cov_.assign(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) {
      Point xi = g.node(i);
      long ix = std::lround(xi[0] / g.h), iy = std::lround(xi[1] / g.h);
      for (int j = 0; j <= i; ++j) {
        Point xj = g.node(j);
        long jx = std::lround(xj[0] / g.h), jy = std::lround(xj[1] / g.h);
        long sq = (ix - jx) * (ix - jx) + (d == 2 ? (iy - jy) * (iy - jy) : 0);
        double v = kernel(sq);
        if (i == j) v += jitter_;
        cov_[static_cast<std::size_t>(i) * m + j] = v;
        cov_[static_cast<std::size_t>(j) * m + i] = v;
      }
    }
    factor_ = std::make_unique<DenseCholesky>(cov_, m);
    return;
  }
  if (spec_.variant == PriorVariant::sieve_wavelet && spec_.truncation < 1)
    throw DomainViolation("PriorSpec: sieve truncation must be >= 1");
  series_ = std::make_unique<SeriesBasis>(spec_.basis, spec_.wavelet_moments, domain, spec_.k_lo,
                                          spec_.k_hi);
  if (spec_.variant == PriorVariant::sieve_wavelet && spec_.truncation > series_->max_level())
    throw UnsupportedLevel("PriorSpec: sieve truncation exceeds the grid's finest level");
  // Materialize every level now so a built sampler is immutable and can be
  // shared across chains.
  series_->cumulative_size(series_->max_level());
}

GaussianSampler::GaussianSampler(std::vector<GridField> basis_fields, const DomainSpec& domain)
    : spec_{}, domain_(domain), chi_(GridField(domain, 1.0)), explicit_basis_(std::move(basis_fields)) {
  if (explicit_basis_.empty()) throw DomainViolation("GaussianSampler: empty explicit basis");
  spec_.variant = PriorVariant::sieve_wavelet;
  spec_.cutoff.identity = true;
  spec_.truncation = 1;
}

int GaussianSampler::max_series_level() const {
  if (series_) return series_->max_level();
  if (!explicit_basis_.empty()) return 1;
  return 0;
}

int GaussianSampler::latent_dim(int truncation_level) const {
  if (factor_) return factor_->dim();
  if (!explicit_basis_.empty()) return static_cast<int>(explicit_basis_.size());
  int levels = spec_.variant == PriorVariant::sieve_wavelet ? spec_.truncation : truncation_level;
  return series_->cumulative_size(levels);
}

double GaussianSampler::level_weight(int level) const {
  if (!explicit_basis_.empty()) return 1.0;
  return std::pow(2.0, -spec_.alpha * static_cast<double>(level));
}

GridField GaussianSampler::base_field(std::span<const double> white) const {
  if (!factor_) throw VariantMismatch("base_field: not a Matern sampler");
  auto v = factor_->apply_factor(white);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= chi_.values[i];
  return GridField(domain_, std::move(v));
}

GridField GaussianSampler::synthesize(std::span<const double> latent, int truncation_level) const {
  if (factor_) {
    auto v = factor_->apply_factor(latent);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= scale_ * chi_.values[i];
    return GridField(domain_, std::move(v));
  }
  Grid g = build_grid(domain_);
  std::vector<double> nodes(static_cast<std::size_t>(g.node_count), 0.0);
  if (!explicit_basis_.empty()) {
    if (latent.size() != explicit_basis_.size())
      throw DomainViolation("synthesize: latent size mismatch");
    for (std::size_t b = 0; b < explicit_basis_.size(); ++b)
      for (std::size_t i = 0; i < nodes.size(); ++i)
        nodes[i] += latent[b] * explicit_basis_[b].values[i];
    return GridField(domain_, std::move(nodes));
  }
  int levels = spec_.variant == PriorVariant::sieve_wavelet ? spec_.truncation : truncation_level;
  if (static_cast<int>(latent.size()) != series_->cumulative_size(levels))
    throw DomainViolation("synthesize: latent size mismatch");
  std::size_t idx = 0;
  for (int l = 1; l <= levels; ++l) {
    double w = level_weight(l);
    int count = series_->level_size(l);
    for (int pos = 0; pos < count; ++pos) series_->accumulate(l, pos, w * latent[idx++], nodes);
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] *= chi_.values[i];
  return GridField(domain_, std::move(nodes));
}

SeriesCoefficients GaussianSampler::to_coefficients(std::span<const double> latent,
                                                    int truncation_level) const {
  if (factor_) throw VariantMismatch("to_coefficients: Matern sampler has no series coefficients");
  SeriesCoefficients c;
  if (!explicit_basis_.empty()) {
    c.truncation = 1;
    c.levels.push_back(std::vector<double>(latent.begin(), latent.end()));
    return c;
  }
  int levels = spec_.variant == PriorVariant::sieve_wavelet ? spec_.truncation : truncation_level;
  c.truncation = levels;
  std::size_t idx = 0;
  for (int l = 1; l <= levels; ++l) {
    double w = level_weight(l);
    std::vector<double> lv(static_cast<std::size_t>(series_->level_size(l)));
    for (auto& v : lv) v = w * latent[idx++];
    c.levels.push_back(std::move(lv));
  }
  return c;
}

double GaussianSampler::covariance_entry(int i, int j) const {
  if (!factor_) throw VariantMismatch("covariance_entry: not a Matern sampler");
  return factor_->reconstruct(i, j);
}

double GaussianSampler::assembled_covariance(int i, int j) const {
  if (!factor_) throw VariantMismatch("assembled_covariance: not a Matern sampler");
  return cov_[static_cast<std::size_t>(i) * factor_->dim() + j];
}

GridField draw_base_matern(const GaussianSampler& sampler, Rng& rng) {
  std::vector<double> z(static_cast<std::size_t>(sampler.latent_dim(0)));
  for (auto& v : z) v = rng.normal();
  return sampler.base_field(z);
}

PriorDraw draw_prior(const PriorSpec& spec, const GaussianSampler& sampler, Rng& rng) {
  PriorDraw d;
  if (spec.variant == PriorVariant::rescaled_matern) {
    std::vector<double> z(static_cast<std::size_t>(sampler.latent_dim(0)));
    for (auto& v : z) v = rng.normal();
    d.field = sampler.synthesize(z, 0);
    return d;
  }
  int levels = spec.variant == PriorVariant::sieve_wavelet ? spec.truncation
                                                           : sample_truncation_level(sampler.domain().dim, rng);
  if (levels > sampler.max_series_level())
    throw UnsupportedLevel("draw_prior: truncation level " + std::to_string(levels) +
                           " beyond the grid's finest representable level");
  std::vector<double> z(static_cast<std::size_t>(sampler.latent_dim(levels)));
  for (auto& v : z) v = rng.normal();
  d.field = sampler.synthesize(z, levels);
  d.coefficients = sampler.to_coefficients(z, levels);
  d.truncation_level = levels;
  return d;
}

void write_coefficients_csv(const SeriesCoefficients& coeffs, std::ostream& os) {
  os.precision(17);
  os << "level,index,value\n";
  for (std::size_t l = 0; l < coeffs.levels.size(); ++l)
    for (std::size_t i = 0; i < coeffs.levels[l].size(); ++i)
      os << (l + 1) << ',' << i << ',' << coeffs.levels[l][i] << '\n';
}

}  // namespace divlab
