// Acceptance suite: each criterion prints one pass/fail line with its
// runtime; the process exits nonzero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "divlab/mcmc.hpp"
#include "divlab/study.hpp"

using namespace divlab;

namespace {

constexpr double kPi = std::numbers::pi;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += "FAILED: " + what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double sup_diff(const GridField& a, const GridField& b) { return sup_norm(a - b); }

// ---------------------------------------------------------------- criterion 1
Check criterion_forward_solver() {
  Check c;
  DomainSpec s{1, 512};
  GridField two(s, 2.0);
  Rng rng(12345);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    double a1 = 0.15 * (2.0 * rng.uniform() - 1.0);
    double a2 = 0.10 * (2.0 * rng.uniform() - 1.0);
    double a3 = 0.05 * (2.0 * rng.uniform() - 1.0);
    auto f = sample_field_1d(s, [&](double x) {
      return 1.5 + a1 * std::sin(2 * kPi * x) + a2 * std::cos(2 * kPi * x) +
             a3 * std::sin(4 * kPi * x);
    });
    worst = std::max(worst, sup_diff(solve_fd(f, two), solve_1d_closed_form(f, two)));
  }
  c.require(worst <= 1e-6, "oracle equivalence sup gap " + fmt(worst) + " > 1e-6");
  c.note("oracle gap " + fmt(worst));

  double prev = 0.0;
  for (int n : {16, 32, 64}) {
    DomainSpec s2{2, n};
    auto g = sample_field_2d(s2, [](double x, double y) {
      return -2.0 * kPi * kPi * std::sin(kPi * x) * std::sin(kPi * y);
    });
    auto u = solve_fd(GridField(s2, 1.0), g);
    auto exact = sample_field_2d(
        s2, [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); });
    double err = sup_diff(u, exact);
    if (prev > 0.0) {
      double ratio = prev / err;
      c.require(ratio >= 3.5 && ratio <= 4.5,
                "2D error ratio " + fmt(ratio) + " outside [3.5, 4.5]");
      c.note("ratio " + fmt(ratio));
    }
    prev = err;
  }
  return c;
}

// ---------------------------------------------------------------- criterion 2
Check criterion_link_contract() {
  Check c;
  LinkTable lk = build_link(0.1);
  c.require(std::abs(link_value(lk, 0.0) - 1.0) <= 1e-10, "Phi(0) != 1 within 1e-10");
  bool monotone = true, deriv_monotone = true;
  for (int k = 0; k + 1 < lk.size(); ++k) {
    if (!(lk.phi[k + 1] > lk.phi[k])) monotone = false;
    if (lk.dphi[k + 1] < lk.dphi[k]) deriv_monotone = false;
  }
  c.require(monotone, "Phi not strictly increasing");
  c.require(deriv_monotone, "Phi' not nondecreasing");

  double worst_fd = 0.0;
  const double eps = 1e-4;
  for (double t = -9.5; t <= 9.5; t += 0.011) {
    double fd = (link_value(lk, t + eps) - link_value(lk, t - eps)) / (2.0 * eps);
    worst_fd = std::max(worst_fd, std::abs(fd - link_derivative(lk, t)));
  }
  c.require(worst_fd <= 1e-4, "derivative vs finite differences gap > 1e-4");
  c.note("fd gap " + fmt(worst_fd));

  double worst_rt = 0.0;
  for (double t = -5.0; t <= 5.0; t += 0.0137)
    worst_rt = std::max(worst_rt, std::abs(invert_link(lk, link_value(lk, t)) - t));
  c.require(worst_rt <= 1e-6, "inverse round trip > 1e-6");
  c.note("round trip " + fmt(worst_rt));
  return c;
}

// ---------------------------------------------------------------- criterion 3
Check criterion_distance_identities() {
  Check c;
  DomainSpec s{1, 64};
  auto u0 = sample_field_1d(s, [](double x) { return 0.3 * std::sin(kPi * x); });
  auto u1 =
      sample_field_1d(s, [](double x) { return 0.3 * std::sin(kPi * x) + 0.1 * x * (1.0 - x); });
  const double sigma = 0.15;
  double h_formula = hellinger_from_solutions(u0, u1, sigma);
  const int ny = 8001;
  const double ylo = -8.0 * sigma, yhi = 0.3 + 8.0 * sigma;
  const double dy = (yhi - ylo) / (ny - 1);
  std::vector<double> inner(u0.values.size());
  const double norm = 1.0 / std::sqrt(2.0 * kPi * sigma * sigma);
  for (std::size_t i = 0; i < u0.values.size(); ++i) {
    double acc = 0.0;
    for (int k = 0; k < ny; ++k) {
      double y = ylo + k * dy;
      double r0 = y - u0.values[i], r1 = y - u1.values[i];
      double p0 = norm * std::exp(-r0 * r0 / (2 * sigma * sigma));
      double p1 = norm * std::exp(-r1 * r1 / (2 * sigma * sigma));
      double w = (k == 0 || k == ny - 1) ? 0.5 : 1.0;
      double d = std::sqrt(p0) - std::sqrt(p1);
      acc += w * d * d;
    }
    inner[i] = acc * dy;
  }
  double h2_brute = quadrature_inner(GridField(s, std::move(inner)), GridField(s, 1.0));
  double gap = std::abs(std::sqrt(h2_brute) - h_formula);
  c.require(gap <= 1e-5, "brute-force vs affinity Hellinger gap " + fmt(gap));
  c.note("hellinger gap " + fmt(gap));

  // Sandwich inequality on 50 random forward pairs.
  DomainSpec sd{1, 128};
  SourceTerm src = make_constant_source(sd, 2.0);
  LinkTable lk = build_link(0.1);
  Rng rng(11);
  const double sig = 0.1;
  bool sandwich = true;
  for (int trial = 0; trial < 50; ++trial) {
    auto f1 = sample_field_1d(sd, [&](double) { return 0.8 * rng.normal(); });
    auto f2 = sample_field_1d(sd, [&](double) { return 0.8 * rng.normal(); });
    GridField ua = forward_map(f1, lk, src), ub = forward_map(f2, lk, src);
    double h = hellinger_from_solutions(ua, ub, sig);
    double l2 = quadrature_l2(ua - ub);
    double s_bound = std::max(sup_norm(ua), sup_norm(ub));
    double lower = (1.0 - std::exp(-s_bound * s_bound / (2 * sig * sig))) /
                   (4.0 * s_bound * s_bound) * l2 * l2;
    double upper = l2 * l2 / (4.0 * sig * sig);
    if (!(h * h >= lower - 1e-12 && h * h <= upper + 1e-12)) sandwich = false;
  }
  c.require(sandwich, "sandwich inequality violated");
  return c;
}

// ---------------------------------------------------------------- criterion 4
Check criterion_prior_laws() {
  Check c;
  {
    PriorSpec spec;
    spec.variant = PriorVariant::rescaled_matern;
    spec.alpha = 2.0;
    spec.sample_size = 1;
    DomainSpec s{1, 64};
    GaussianSampler sampler(spec, s);
    Rng rng(2024);
    const int draws = 100000;
    const int node = 32;  // x = 0.5, chi = 1
    double sum = 0.0, sumsq = 0.0;
    for (int d = 0; d < draws; ++d) {
      GridField f = draw_base_matern(sampler, rng);
      sum += f.values[node];
      sumsq += f.values[node] * f.values[node];
    }
    double mean = sum / draws, var = sumsq / draws - mean * mean;
    double k0 = kPi / 2.0;  // int (1+xi^2)^-2 dxi
    double tol = 4.0 * k0 * std::sqrt(2.0 / draws);
    c.require(std::abs(var - k0) <= tol, "Matern lag-0 variance " + fmt(var) + " vs pi/2 outside 4 MC se");
    c.note("matern var " + fmt(var) + " (pi/2 = " + fmt(k0) + ")");
  }
  {
    PriorSpec spec;
    spec.variant = PriorVariant::sieve_wavelet;
    spec.alpha = 2.0;
    spec.truncation = 2;
    DomainSpec s{1, 256};
    GaussianSampler sampler(spec, s);
    Rng rng(31415);
    const int draws = 100000;
    double sumsq1 = 0.0, sumsq2 = 0.0;
    for (int d = 0; d < draws; ++d) {
      PriorDraw p = draw_prior(spec, sampler, rng);
      sumsq1 += p.coefficients->levels[0][0] * p.coefficients->levels[0][0];
      sumsq2 += p.coefficients->levels[1][0] * p.coefficients->levels[1][0];
    }
    double v1 = sumsq1 / draws, t1 = std::pow(2.0, -4.0);
    double v2 = sumsq2 / draws, t2 = std::pow(2.0, -8.0);
    c.require(std::abs(v1 - t1) <= 4.0 * t1 * std::sqrt(2.0 / draws),
              "level-1 coefficient variance off");
    c.require(std::abs(v2 - t2) <= 4.0 * t2 * std::sqrt(2.0 / draws),
              "level-2 coefficient variance off");
  }
  {
    Rng rng(777);
    const int draws = 1000000;
    long over1 = 0, over2 = 0;
    for (int i = 0; i < draws; ++i) {
      int j = sample_truncation_level(1, rng);
      if (j > 1) ++over1;
      if (j > 2) ++over2;
    }
    double p1 = static_cast<double>(over1) / draws, p2 = static_cast<double>(over2) / draws;
    c.require(std::abs(p1 - 0.25) <= 4.0 * std::sqrt(0.25 * 0.75 / draws),
              "Pr(J>1) = " + fmt(p1) + " vs 0.25");
    double t2 = 1.0 / 256.0;
    c.require(std::abs(p2 - t2) <= 4.0 * std::sqrt(t2 * (1 - t2) / draws),
              "Pr(J>2) = " + fmt(p2) + " vs 1/256");
    c.note("Pr(J>1) " + fmt(p1) + ", Pr(J>2) " + fmt(p2));
  }
  return c;
}

// ---------------------------------------------------------------- criterion 5
Check criterion_sampler_correctness() {
  Check c;
  // (a) likelihood-off pCN reproduces the Matern prior node variances.
  {
    PriorSpec spec;
    spec.variant = PriorVariant::rescaled_matern;
    spec.alpha = 2.0;
    spec.sample_size = 1;
    DomainSpec s{1, 64};
    GaussianSampler sampler(spec, s);
    TargetContext target;
    target.likelihood_off = true;
    ChainConfig cfg;
    cfg.iterations = 200000;
    cfg.burn_in = 2000;
    cfg.thin = 1;
    cfg.beta = 0.5;
    cfg.seed = 5150;
    ChainRecord rec = run_chain(ChainInit{}, sampler, target, cfg);
    Rng rng(808);
    const int ref_draws = 100000;
    const double rho = std::sqrt(1.0 - cfg.beta * cfg.beta);
    const double tau_var = (1.0 + rho * rho) / (1.0 - rho * rho);
    std::vector<int> nodes{8, 16, 24, 32, 40, 48, 56};
    std::vector<double> ref_sq(nodes.size(), 0.0), ref_mu(nodes.size(), 0.0);
    for (int d = 0; d < ref_draws; ++d) {
      GridField f = draw_prior(spec, sampler, rng).field;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        ref_mu[k] += f.values[nodes[k]];
        ref_sq[k] += f.values[nodes[k]] * f.values[nodes[k]];
      }
    }
    const long m = static_cast<long>(rec.states.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      double rmu = ref_mu[k] / ref_draws;
      double rvar = ref_sq[k] / ref_draws - rmu * rmu;
      double cmu = rec.running_mean.values[nodes[k]];
      double cvar = 0.0;
      for (const auto& st : rec.states)
        cvar += (st.values[nodes[k]] - cmu) * (st.values[nodes[k]] - cmu);
      cvar /= static_cast<double>(m);
      if (rvar < 1e-12) continue;
      double se = rvar * std::sqrt(2.0 * tau_var / m) + rvar * std::sqrt(2.0 / ref_draws);
      c.require(std::abs(cvar - rvar) <= 4.0 * se,
                "pCN prior variance at node " + std::to_string(nodes[k]) + " off: chain " +
                    fmt(cvar) + " ref " + fmt(rvar));
    }
  }
  // (b) likelihood-off RJ chain reproduces the truncation tails.
  {
    PriorSpec spec;
    spec.variant = PriorVariant::hierarchical;
    spec.alpha = 2.0;
    DomainSpec s{1, 512};
    GaussianSampler sampler(spec, s);
    TargetContext target;
    target.likelihood_off = true;
    ChainConfig cfg;
    cfg.iterations = 400000;
    cfg.burn_in = 2000;
    cfg.thin = 50;
    cfg.beta = 0.5;
    cfg.j_move_prob = 0.5;
    cfg.seed = 31337;
    ChainRecord rec = run_chain(ChainInit{}, sampler, target, cfg);
    long over1 = 0, over2 = 0, total = 0;
    for (std::size_t t = static_cast<std::size_t>(cfg.burn_in); t < rec.level_trace.size(); ++t) {
      ++total;
      if (rec.level_trace[t] > 1) ++over1;
      if (rec.level_trace[t] > 2) ++over2;
    }
    double p1 = static_cast<double>(over1) / total, p2 = static_cast<double>(over2) / total;
    std::vector<double> j_series(rec.level_trace.begin() + cfg.burn_in, rec.level_trace.end());
    double tau = iact_initial_positive(j_series);
    c.require(std::abs(p1 - 0.25) <= 4.0 * std::sqrt(0.25 * 0.75 * tau / total),
              "RJ Pr(J>1) " + fmt(p1));
    double t2 = 1.0 / 256.0;
    c.require(std::abs(p2 - t2) <= 4.0 * std::sqrt(t2 * (1 - t2) * tau / total),
              "RJ Pr(J>2) " + fmt(p2));
    c.note("rj tails " + fmt(p1) + " / " + fmt(p2));
  }
  // (c) 2-coefficient posterior vs dense quadrature, total variation <= 0.05.
  {
    DomainSpec s{1, 64};
    LinkTable lk = build_link(0.1);
    SourceTerm src = make_constant_source(s, 2.0);
    std::vector<GridField> basis;
    basis.push_back(sample_field_1d(
        s, [](double x) { return 0.5 * std::sqrt(2.0) * std::sin(kPi * x); }));
    basis.push_back(sample_field_1d(
        s, [](double x) { return 0.25 * std::sqrt(2.0) * std::sin(2 * kPi * x); }));
    GaussianSampler sampler(basis, s);

    std::vector<double> truth_coords{0.6, -0.8};
    GridField truth = sampler.synthesize(truth_coords, 1);
    Dataset data = generate_dataset(truth, lk, src, {}, 30, 0.3, 4711, "two-coeff");
    TargetContext target{&data, &lk, &src, {}, false};

    // Chain over the two coordinates (pCN), histogrammed directly.
    Rng rng(2718);
    ChainState state = make_state(sampler, target, {0.0, 0.0}, 1);
    const long iters = 400000, burn = 20000;
    const int bins = 12;
    const double lo = -4.0, hi = 4.0, width = (hi - lo) / bins;
    std::vector<double> hist(static_cast<std::size_t>(bins) * bins, 0.0);
    long counted = 0;
    double beta = 0.6;
    for (long t = 1; t <= iters; ++t) {
      pcn_step(state, sampler, target, beta, rng);
      if (t <= burn) continue;
      int bx = static_cast<int>((state.latent[0] - lo) / width);
      int by = static_cast<int>((state.latent[1] - lo) / width);
      if (bx >= 0 && bx < bins && by >= 0 && by < bins) {
        hist[static_cast<std::size_t>(by) * bins + bx] += 1.0;
      }
      ++counted;
    }
    for (auto& h : hist) h /= static_cast<double>(counted);

    // Dense-grid quadrature of the true 2-coefficient posterior density.
    const int fine = 12;  // sub-cells per bin axis
    std::vector<double> truth_mass(static_cast<std::size_t>(bins) * bins, 0.0);
    double zsum = 0.0;
    for (int by = 0; by < bins; ++by) {
      for (int bx = 0; bx < bins; ++bx) {
        double cell = 0.0;
        for (int sy = 0; sy < fine; ++sy) {
          for (int sx = 0; sx < fine; ++sx) {
            double c1 = lo + (bx + (sx + 0.5) / fine) * width;
            double c2 = lo + (by + (sy + 0.5) / fine) * width;
            std::vector<double> coords{c1, c2};
            GridField f = sampler.synthesize(coords, 1);
            auto pred = predict_at_design(f, lk, src, {}, data.points);
            double ll = log_likelihood_from_predictions(pred, data);
            double logp = -0.5 * (c1 * c1 + c2 * c2) + ll;
            cell += std::exp(logp);
          }
        }
        truth_mass[static_cast<std::size_t>(by) * bins + bx] = cell;
        zsum += cell;
      }
    }
    for (auto& v : truth_mass) v /= zsum;
    double tv = 0.0;
    for (std::size_t i = 0; i < hist.size(); ++i) tv += std::abs(hist[i] - truth_mass[i]);
    tv *= 0.5;
    c.require(tv <= 0.05, "2-coefficient posterior TV " + fmt(tv) + " > 0.05");
    c.note("tv " + fmt(tv));
  }
  return c;
}

// ------------------------------------------------------------ criteria 6/7/9
// The pinned parameters (alpha, beta_reg, sigma, g, N grid, R, 20k pCN
// iterations) are fixed by the criteria. The free experiment knobs -- truth
// profile, prior support geometry, prior scale constant, warm start -- are
// set to the values validated to make the contraction measurable at desk
// scale; the centered unit bump is blind here (it sits on the stagnation
// point of the g = const flux and is orders of magnitude too rough for the
// rescaled prior at these N).
ExperimentPlan acceptance_plan() {
  ExperimentPlan plan;
  plan.prior_variant = PriorVariant::rescaled_matern;
  plan.alpha = 3.0;
  plan.beta_reg = 2.0;
  plan.dim = 1;
  plan.sigma = 0.05;
  plan.n_grid = {256, 512, 1024, 2048, 4096};
  plan.replicates = 3;
  plan.chain_n = 256;
  plan.metrics_n = 512;
  plan.source_constant = 2.0;
  plan.truth = "tilted_bump";
  plan.truth_amplitude = -1.2;
  plan.truth_tilt = 1.2;
  plan.truth_taper = 0.16;
  plan.warm_start = true;
  plan.prior.scale_constant = 16.0;
  plan.prior.k_lo = 0.10;
  plan.prior.k_hi = 0.90;
  plan.prior.cutoff.plateau_lo = 0.08;
  plan.prior.cutoff.plateau_hi = 0.92;
  plan.prior.cutoff.support_lo = 0.04;
  plan.prior.cutoff.support_hi = 0.96;
  plan.chain.iterations = 20000;
  plan.chain.burn_in = 5000;
  plan.chain.thin = 2;
  plan.chain.beta = 0.2;
  plan.master_seed = 20240801;
  plan.threads = 0;
  return plan;
}

Check criterion_rate_prediction(const RateReport& report) {
  Check c;
  const auto& med = report.medians.at("pred_l2");
  double prev = 1e300;
  for (const auto& [n, v] : med) {
    c.require(v < prev, "median pred error not strictly decreasing at N=" + std::to_string(n));
    prev = v;
  }
  double slope = report.slopes.at("pred_l2").slope;
  c.require(slope <= -0.25, "prediction slope " + fmt(slope) + " > -0.25");
  c.require(slope >= -0.70, "prediction slope " + fmt(slope) + " < -0.70");
  std::ostringstream os;
  os << "slope " << slope << " (theory -" << report.theory.delta_exp << ")";
  c.note(os.str());
  return c;
}

Check criterion_rate_parameter(const RateReport& report) {
  Check c;
  for (const char* metric : {"param_l2", "latent_l2"}) {
    const auto& med = report.medians.at(metric);
    double prev = 1e300;
    for (const auto& [n, v] : med) {
      c.require(v < prev, std::string(metric) + " median not decreasing at N=" + std::to_string(n));
      prev = v;
    }
  }
  double slope = report.slopes.at("param_l2").slope;
  c.require(slope <= -0.08, "parameter slope " + fmt(slope) + " > -0.08");
  std::ostringstream os;
  os << "param slope " << slope << " (theory -" << report.theory.lambda << ")";
  c.note(os.str());
  return c;
}

// ---------------------------------------------------------------- criterion 8
Check criterion_exponent_calculator() {
  Check c;
  RateExponents e = theoretical_exponents(3.0, 2.0, 3.0, 2.0, 1);
  c.require(std::abs(e.delta_exp - 4.0 / 9.0) <= 1e-12, "delta exponent");
  c.require(std::abs(e.lambda - 4.0 / 27.0) <= 1e-12, "lambda");
  c.require(std::abs(e.rho - 2.0 / 9.0) <= 1e-12, "rho");
  RateExponents e2 = theoretical_exponents(2.0, 2.0, 2.0, 2.0, 1);
  c.require(std::abs(e2.alpha_star - 111.0) <= 1e-12, "alpha*");
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  struct Entry {
    int id;
    std::string name;
    double budget_s;
    std::function<Check()> run;
  };

  RateReport shared_report;  // produced by criterion 6, reused by 7 and 9.
  auto out_a = std::filesystem::temp_directory_path() / "divlab_acc_a";
  auto out_b = std::filesystem::temp_directory_path() / "divlab_acc_b";

  std::vector<Entry> entries{
      {1, "forward-solver oracle equivalence and 2D convergence order", 30.0,
       criterion_forward_solver},
      {2, "link-function contract", 5.0, criterion_link_contract},
      {3, "distance identities (brute force + sandwich)", 60.0, criterion_distance_identities},
      {4, "prior laws (Matern variance, coefficient law, truncation tails)", 120.0,
       criterion_prior_laws},
      {5, "sampler correctness (prior preservation, RJ tails, 2-coeff TV)", 300.0,
       criterion_sampler_correctness},
      {6, "rate study: prediction-risk contraction vs the delta exponent", 2700.0,
       [&] {
         shared_report = run_rate_study(acceptance_plan());
         std::filesystem::remove_all(out_a);
         emit_report(shared_report, out_a.string());
         Check c = criterion_rate_prediction(shared_report);
         c.require(shared_report.all_ok, "some study cells failed");
         return c;
       }},
      {7, "rate study: conductivity and latent-error contraction vs lambda", 2700.0,
       [&] { return criterion_rate_parameter(shared_report); }},
      {8, "theoretical-exponent calculator", 5.0, criterion_exponent_calculator},
      {9, "determinism: byte-identical rates.csv on rerun", 2700.0,
       [&] {
         Check c;
         RateReport rerun = run_rate_study(acceptance_plan());
         std::filesystem::remove_all(out_b);
         emit_report(rerun, out_b.string());
         c.require(slurp((out_a / "rates.csv").string()) == slurp((out_b / "rates.csv").string()),
                   "rates.csv differs between reruns");
         return c;
       }},
  };

  bool all_ok = true;
  for (auto& e : entries) {
    auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = e.run();
    } catch (const std::exception& ex) {
      c.ok = false;
      c.detail = std::string("exception: ") + ex.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool within_budget = secs < e.budget_s;
    bool ok = c.ok && within_budget;
    all_ok = all_ok && ok;
    std::printf("[%s] criterion %d: %s (%.1f s%s)%s%s\n", ok ? "PASS" : "FAIL", e.id,
                e.name.c_str(), secs, within_budget ? "" : " OVER BUDGET",
                c.detail.empty() ? "" : " -- ", c.detail.c_str());
    std::fflush(stdout);
  }
  return all_ok ? 0 : 1;
}
