#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>

#include "divlab/prior.hpp"
#include "doctest.h"

using namespace divlab;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("daubechies_filter: db2 closed form, orthonormality, moments") {
  auto h = daubechies_filter(2);
  const double rt3 = std::sqrt(3.0), c = 4.0 * std::sqrt(2.0);
  REQUIRE(h.size() == 4);
  CHECK(h[0] == doctest::Approx((1 + rt3) / c).epsilon(1e-12));
  CHECK(h[1] == doctest::Approx((3 + rt3) / c).epsilon(1e-12));
  CHECK(h[2] == doctest::Approx((3 - rt3) / c).epsilon(1e-12));
  CHECK(h[3] == doctest::Approx((1 - rt3) / c).epsilon(1e-12));

  for (int k : {4, 6, 8}) {
    auto f = daubechies_filter(k);
    REQUIRE(static_cast<int>(f.size()) == 2 * k);
    double sum = 0.0;
    for (double v : f) sum += v;
    CHECK(sum == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    // Vanishing moments of the wavelet filter.
    const int taps = static_cast<int>(f.size());
    for (int m = 0; m < k; ++m) {
      double s = 0.0;
      for (int j = 0; j < taps; ++j)
        s += ((j % 2) ? -1.0 : 1.0) * f[taps - 1 - j] * std::pow(static_cast<double>(j), m);
      CHECK(std::abs(s) <= 1e-8);
    }
  }
  CHECK_THROWS_AS(daubechies_filter(0), DomainViolation);
}

TEST_CASE("cascade: db2 integer values and partition of unity") {
  auto t = build_cascade(2, 0);
  CHECK(t.phi[1] == doctest::Approx((1 + std::sqrt(3.0)) / 2).epsilon(1e-12));
  CHECK(t.phi[2] == doctest::Approx((1 - std::sqrt(3.0)) / 2).epsilon(1e-12));

  // Partition of unity: sum_k phi(x - k) = 1 at dyadic points.
  auto t6 = build_cascade(6, 4);
  const int step = 1 << 4, width = t6.support_width();
  for (int frac = 0; frac < step; ++frac) {
    double s = 0.0;
    for (int k = 0; k < width; ++k) {
      std::size_t idx = static_cast<std::size_t>(frac + k * step);
      if (idx < t6.phi.size()) s += t6.phi[idx];
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
  // The wavelet table integrates to ~0 (Riemann sum of a zero-mean function).
  double mean = 0.0;
  for (double v : t6.psi) mean += v;
  CHECK(std::abs(mean / step) <= 1e-9);
}

TEST_CASE("series basis: discrete orthonormality at J=3, n=512") {
  DomainSpec s{1, 512};
  SeriesBasis basis(BasisKind::daubechies, 6, s, 0.25, 0.75);
  REQUIRE(basis.max_level() >= 3);
  std::vector<GridField> fields;
  for (int l = 1; l <= 3; ++l)
    for (int p = 0; p < basis.level_size(l); ++p) fields.push_back(basis.synthesize(l, p));
  double worst_off = 0.0, worst_diag = 0.0;
  for (std::size_t a = 0; a < fields.size(); ++a)
    for (std::size_t b = a; b < fields.size(); ++b) {
      double ip = quadrature_inner(fields[a], fields[b]);
      if (a == b)
        worst_diag = std::max(worst_diag, std::abs(ip - 1.0));
      else
        worst_off = std::max(worst_off, std::abs(ip));
    }
  CHECK(worst_off <= 5e-3);
  CHECK(worst_diag <= 5e-3);
}

TEST_CASE("series basis: cutoff containment above the computed level") {
  DomainSpec s{1, 512};
  SeriesBasis basis(BasisKind::daubechies, 6, s, 0.25, 0.75);
  CutoffSpec cut;  // plateau [0.2, 0.8]
  auto jmin = basis.containment_level(cut.plateau_lo, cut.plateau_hi);
  REQUIRE(jmin.has_value());
  GridField chi = cutoff_field(cut, s);
  for (int l = *jmin; l <= basis.max_level(); ++l) {
    for (int p = 0; p < basis.level_size(l); ++p) {
      GridField psi = basis.synthesize(l, p);
      GridField prod = pointwise_multiply(chi, psi);
      for (std::size_t i = 0; i < psi.values.size(); ++i)
        CHECK(prod.values[i] == psi.values[i]);
    }
  }
  // Below the containment level at least one basis function is clipped.
  if (*jmin > 1) {
    bool touched = false;
    for (int p = 0; p < basis.level_size(*jmin - 1) && !touched; ++p) {
      GridField psi = basis.synthesize(*jmin - 1, p);
      GridField prod = pointwise_multiply(chi, psi);
      for (std::size_t i = 0; i < psi.values.size(); ++i)
        if (prod.values[i] != psi.values[i]) {
          touched = true;
          break;
        }
    }
    CHECK(touched);
  }
  // The sine provider has no containment level.
  SeriesBasis sine(BasisKind::sine, 0, s, 0.25, 0.75);
  CHECK(!sine.containment_level(cut.plateau_lo, cut.plateau_hi).has_value());
}

TEST_CASE("series basis: level beyond the grid Nyquist errors out") {
  DomainSpec s{1, 128};
  SeriesBasis basis(BasisKind::daubechies, 6, s, 0.25, 0.75);
  CHECK(basis.max_level() == 1);
  CHECK_THROWS_AS(basis.level_size(2), UnsupportedLevel);
  CHECK_THROWS_AS(basis.level_size(0), UnsupportedLevel);
  // A grid too coarse to hold even one interior level is rejected outright.
  CHECK_THROWS_AS(SeriesBasis(BasisKind::daubechies, 6, DomainSpec{1, 64}, 0.25, 0.75),
                  UnsupportedLevel);
}

TEST_CASE("series basis: atoms approach pointwise cascade samples under refinement") {
  // Fix the continuum wavelet (j = offset+1 on n=512) and sample it on finer
  // grids; the atom values converge toward the cascade point samples.
  std::vector<double> gaps;
  for (int n : {512, 2048, 8192}) {
    DomainSpec s{1, n};
    SeriesBasis basis(BasisKind::daubechies, 6, s, 0.25, 0.75);
    int p = 0;
    while ((1 << p) < n) ++p;
    const int level = 1, j = basis.level_offset() + level, q = p - j;
    auto cas = build_cascade(6, q);
    const int width = cas.support_width();
    const int r = static_cast<int>(std::ceil(0.25 * (1 << j))) - width;
    GridField atom = basis.synthesize(level, 0);
    double scale = std::pow(2.0, 0.5 * j), worst = 0.0;
    for (int i = 0; i <= n; ++i) {
      long t = (static_cast<long>(i) - (static_cast<long>(r) << q));
      double ref =
          (t >= 0 && t < static_cast<long>(cas.psi.size())) ? scale * cas.psi[t] : 0.0;
      worst = std::max(worst, std::abs(atom.values[i] - ref));
    }
    gaps.push_back(worst / scale);
  }
  CHECK(gaps[1] < gaps[0]);
  CHECK(gaps[2] < gaps[1]);
}

TEST_CASE("series basis: 2D tensor atoms are orthonormal") {
  DomainSpec s{2, 128};
  SeriesBasis basis(BasisKind::daubechies, 6, s, 0.25, 0.75);
  REQUIRE(basis.max_level() >= 1);
  auto a = basis.synthesize(1, 0);
  auto b = basis.synthesize(1, 1);
  auto c = basis.synthesize(1, basis.level_size(1) / 2);
  CHECK(quadrature_inner(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(quadrature_inner(a, b)) <= 1e-12);
  CHECK(std::abs(quadrature_inner(a, c)) <= 1e-12);
}

TEST_CASE("matern_covariance: analytic lag-zero values and symmetry") {
  CHECK(matern_covariance_lag(0.0, 2.0, 1) == doctest::Approx(kPi / 2.0).epsilon(1e-6));
  CHECK(matern_covariance_lag(0.0, 1.0, 1) == doctest::Approx(kPi).epsilon(1e-6));
  // d=2, alpha=2: 2 pi int s (1+s^2)^-2 ds = pi.
  CHECK(matern_covariance_lag(0.0, 2.0, 2) == doctest::Approx(kPi).epsilon(1e-6));
  Point x{0.3, 0.0}, y{0.71, 0.0};
  CHECK(matern_covariance(x, y, 2.5, 1) == matern_covariance(y, x, 2.5, 1));
  Point a{0.2, 0.6}, b{0.5, 0.1};
  CHECK(matern_covariance(a, b, 2.0, 2) == matern_covariance(b, a, 2.0, 2));
  CHECK(matern_covariance_lag(0.4, 2.0, 1) < matern_covariance_lag(0.0, 2.0, 1));
  CHECK_THROWS_AS(matern_covariance_lag(0.0, 0.4, 1), DomainViolation);
}

TEST_CASE("cutoff field: plateau, support, smoothness") {
  CutoffSpec c;
  CHECK(cutoff_value(c, 0.5) == 1.0);
  CHECK(cutoff_value(c, 0.2) == doctest::Approx(1.0));
  CHECK(cutoff_value(c, 0.05) == 0.0);
  CHECK(cutoff_value(c, 0.95) == 0.0);
  double prev = 0.0;
  for (double x = 0.1; x <= 0.2 + 1e-9; x += 0.005) {
    double v = cutoff_value(c, x);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
  CutoffSpec bad;
  bad.plateau_lo = 0.05;  // below support_lo
  CHECK_THROWS_AS(cutoff_field(bad, DomainSpec{1, 64}), DomainViolation);
}

TEST_CASE("matern sampler: factor reproduces the assembled covariance") {
  PriorSpec spec;
  spec.variant = PriorVariant::rescaled_matern;
  spec.alpha = 2.0;
  spec.sample_size = 1;
  DomainSpec s{1, 32};
  GaussianSampler sampler(spec, s);
  for (int i = 0; i < 33; i += 7)
    for (int j = 0; j <= i; j += 5)
      CHECK(sampler.covariance_entry(i, j) ==
            doctest::Approx(sampler.assembled_covariance(i, j)).epsilon(1e-8));
}

TEST_CASE("draw_base_matern: moments and support") {
  PriorSpec spec;
  spec.variant = PriorVariant::rescaled_matern;
  spec.alpha = 2.0;
  spec.sample_size = 1;
  DomainSpec s{1, 64};
  GaussianSampler sampler(spec, s);
  Rng rng(2024);
  const int draws = 100000;
  const int node_mid = 32;   // x = 0.5, chi = 1
  const int node_edge = 3;   // x < support_lo, chi = 0
  double sum = 0.0, sumsq = 0.0;
  for (int d = 0; d < draws; ++d) {
    GridField f = draw_base_matern(sampler, rng);
    double v = f.values[node_mid];
    sum += v;
    sumsq += v * v;
    if (d < 100)
      CHECK(f.values[node_edge] == 0.0);
  }
  double mean = sum / draws;
  double var = sumsq / draws - mean * mean;
  double k0 = matern_covariance_lag(0.0, 2.0, 1);
  double sd = std::sqrt(k0);
  CHECK(std::abs(mean) <= 4.0 * sd / std::sqrt(static_cast<double>(draws)));
  CHECK(std::abs(var - k0) <= 4.0 * k0 * std::sqrt(2.0 / draws));
}

TEST_CASE("draw_prior: rescaling factor and exact multiplicativity") {
  PriorSpec spec;
  spec.variant = PriorVariant::rescaled_matern;
  spec.alpha = 3.0;
  spec.sample_size = 10000;
  DomainSpec s{1, 32};
  GaussianSampler sampler(spec, s);
  // d/(4 alpha + 4 + 2d) = 1/18.
  CHECK(sampler.rescale_factor() == doctest::Approx(std::pow(10000.0, -1.0 / 18.0)).epsilon(1e-12));
  CHECK(sampler.rescale_factor() == doctest::Approx(0.59948).epsilon(1e-4));

  PriorSpec unit = spec;
  unit.sample_size = 1;
  GaussianSampler base(unit, s);
  Rng r1(99), r2(99);
  GridField a = draw_prior(spec, sampler, r1).field;
  GridField b = draw_prior(unit, base, r2).field;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    CHECK(a.values[i] == doctest::Approx(sampler.rescale_factor() * b.values[i]).epsilon(1e-13));
}

TEST_CASE("draw_prior: sieve with zero coefficients is the zero field") {
  PriorSpec spec;
  spec.variant = PriorVariant::sieve_wavelet;
  spec.alpha = 3.0;
  spec.truncation = 1;
  DomainSpec s{1, 128};
  GaussianSampler sampler(spec, s);
  std::vector<double> zeros(static_cast<std::size_t>(sampler.latent_dim(1)), 0.0);
  CHECK(sup_norm(sampler.synthesize(zeros, 1)) == 0.0);
}

TEST_CASE("draw_prior: series coefficient variances are 2^(-2 l alpha)") {
  PriorSpec spec;
  spec.variant = PriorVariant::sieve_wavelet;
  spec.alpha = 2.0;
  spec.truncation = 2;
  DomainSpec s{1, 256};
  GaussianSampler sampler(spec, s);
  Rng rng(31415);
  const int draws = 100000;
  double sumsq1 = 0.0, sumsq2 = 0.0;
  long count1 = 0, count2 = 0;
  for (int d = 0; d < draws; ++d) {
    PriorDraw p = draw_prior(spec, sampler, rng);
    REQUIRE(p.coefficients.has_value());
    const auto& lv = p.coefficients->levels;
    sumsq1 += lv[0][0] * lv[0][0];
    ++count1;
    sumsq2 += lv[1][0] * lv[1][0];
    ++count2;
  }
  double v1 = sumsq1 / count1, v2 = sumsq2 / count2;
  double t1 = std::pow(2.0, -2.0 * 2.0 * 1.0), t2 = std::pow(2.0, -2.0 * 2.0 * 2.0);
  CHECK(std::abs(v1 - t1) <= 4.0 * t1 * std::sqrt(2.0 / draws));
  CHECK(std::abs(v2 - t2) <= 4.0 * t2 * std::sqrt(2.0 / draws));
}

TEST_CASE("draw_prior: every draw vanishes outside the cutoff support") {
  for (PriorVariant variant :
       {PriorVariant::rescaled_matern, PriorVariant::sieve_wavelet, PriorVariant::hierarchical}) {
    PriorSpec spec;
    spec.variant = variant;
    spec.alpha = 2.0;
    spec.sample_size = 100;
    spec.truncation = 2;
    DomainSpec s{1, 512};
    GaussianSampler sampler(spec, s);
    Rng rng(8 + static_cast<int>(variant));
    for (int d = 0; d < 25; ++d) {
      GridField f = draw_prior(spec, sampler, rng).field;
      // chi vanishes outside [0.1, 0.9]; boundary nodes in particular.
      CHECK(f.values.front() == 0.0);
      CHECK(f.values.back() == 0.0);
      for (int i = 0; i <= 50; ++i) CHECK(f.values[i] == 0.0);  // x <= 50/512 < 0.1
    }
  }
}

TEST_CASE("sample_truncation_level: law of the random level") {
  Rng rng(777);
  const int draws = 1000000;
  long over1 = 0, over2 = 0;
  for (int i = 0; i < draws; ++i) {
    int j = sample_truncation_level(1, rng);
    CHECK(j >= 1);
    if (j > 1) ++over1;
    if (j > 2) ++over2;
  }
  double p1 = static_cast<double>(over1) / draws;
  double p2 = static_cast<double>(over2) / draws;
  double t1 = 0.25, t2 = 1.0 / 256.0;
  CHECK(std::abs(p1 - t1) <= 4.0 * std::sqrt(t1 * (1 - t1) / draws));
  CHECK(std::abs(p2 - t2) <= 4.0 * std::sqrt(t2 * (1 - t2) / draws));

  // d = 2: Pr(J > 1) = e^{-4 ln 4} = 1/256.
  Rng rng2(778);
  long over1_d2 = 0;
  for (int i = 0; i < draws; ++i)
    if (sample_truncation_level(2, rng2) > 1) ++over1_d2;
  double q1 = static_cast<double>(over1_d2) / draws;
  CHECK(std::abs(q1 - t2) <= 4.0 * std::sqrt(t2 * (1 - t2) / draws));

  CHECK(truncation_tail(1, 1) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(truncation_tail(1, 2) == doctest::Approx(1.0 / 256.0).epsilon(1e-13));
  CHECK(truncation_tail(2, 1) == doctest::Approx(1.0 / 256.0).epsilon(1e-13));
}

TEST_CASE("draw_prior: hierarchical truncation frequencies") {
  PriorSpec spec;
  spec.variant = PriorVariant::hierarchical;
  spec.alpha = 2.0;
  DomainSpec s{1, 512};
  GaussianSampler sampler(spec, s);
  Rng rng(4242);
  const int draws = 20000;
  long over1 = 0;
  for (int i = 0; i < draws; ++i) {
    PriorDraw p = draw_prior(spec, sampler, rng);
    REQUIRE(p.truncation_level >= 1);
    if (p.truncation_level > 1) ++over1;
  }
  double p1 = static_cast<double>(over1) / draws;
  CHECK(std::abs(p1 - 0.25) <= 4.0 * std::sqrt(0.25 * 0.75 / draws));
}

TEST_CASE("rkhs_norm: formula, homogeneity, variant mismatch") {
  SeriesCoefficients zero;
  zero.truncation = 2;
  zero.levels = {{0.0, 0.0}, {0.0}};
  CHECK(rkhs_norm(zero, 2.0) == 0.0);

  SeriesCoefficients single;
  single.truncation = 2;
  single.levels = {{0.0}, {3.0}};  // F_{2,r} = 3, alpha = 2 -> sqrt(2^8 * 9) = 48
  CHECK(rkhs_norm(single, 2.0) == doctest::Approx(48.0).epsilon(1e-12));

  SeriesCoefficients doubled = single;
  for (auto& lv : doubled.levels)
    for (auto& v : lv) v *= 2.0;
  CHECK(rkhs_norm(doubled, 2.0) == doctest::Approx(96.0).epsilon(1e-12));

  PriorSpec spec;
  spec.variant = PriorVariant::rescaled_matern;
  spec.alpha = 2.0;
  spec.sample_size = 10;
  DomainSpec s{1, 32};
  GaussianSampler sampler(spec, s);
  Rng rng(1);
  PriorDraw draw = draw_prior(spec, sampler, rng);
  CHECK(!draw.coefficients.has_value());
  std::vector<double> z(33, 0.0);
  CHECK_THROWS_AS(sampler.to_coefficients(z, 0), VariantMismatch);
}

TEST_CASE("prior spec validation") {
  DomainSpec s{1, 64};
  PriorSpec bad;
  bad.alpha = 1.2;  // must exceed 1 + d/2
  CHECK_THROWS_AS(GaussianSampler(bad, s), DomainViolation);
  PriorSpec sieve;
  sieve.variant = PriorVariant::sieve_wavelet;
  sieve.alpha = 2.0;
  sieve.truncation = 99;
  CHECK_THROWS_AS(GaussianSampler(sieve, s), UnsupportedLevel);
}
