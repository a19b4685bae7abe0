#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "divlab/config.hpp"
#include "divlab/mcmc.hpp"
#include "divlab/study.hpp"
#include "json.hpp"

namespace {

using namespace divlab;

DomainSpec domain_from_config(const Config& cfg) {
  DomainSpec d;
  d.dim = static_cast<int>(cfg.get_long("domain", "dim", 1));
  d.n = static_cast<int>(cfg.get_long("domain", "n", 256));
  return d;
}

LinkTable link_from_config(const Config& cfg) {
  return build_link(cfg.get_double("link", "k_min", 0.1),
                    cfg.get_double("link", "range", 10.0),
                    cfg.get_double("link", "step", 1e-3));
}

SolverConfig solver_from_config(const Config& cfg) {
  SolverConfig s;
  std::string method = cfg.get_string("solver", "method", "auto");
  if (method == "factorize") s.method = LinearSolver::factorize;
  else if (method == "cg") s.method = LinearSolver::cg;
  s.cg_tol = cfg.get_double("solver", "cg_tol", s.cg_tol);
  s.cg_max_iter = static_cast<int>(cfg.get_long("solver", "cg_max_iter", s.cg_max_iter));
  s.oracle_check = cfg.get_bool("solver", "oracle_check", false);
  return s;
}

PriorSpec prior_from_config(const Config& cfg) {
  PriorSpec p;
  std::string variant = cfg.get_string("prior", "variant", "rescaled_matern");
  if (variant == "sieve_wavelet") p.variant = PriorVariant::sieve_wavelet;
  else if (variant == "hierarchical") p.variant = PriorVariant::hierarchical;
  else if (variant == "rescaled_matern") p.variant = PriorVariant::rescaled_matern;
  else throw IoError("unknown prior variant: " + variant);
  p.alpha = cfg.get_double("prior", "alpha", p.alpha);
  p.k_lo = cfg.get_double("prior", "k_lo", p.k_lo);
  p.k_hi = cfg.get_double("prior", "k_hi", p.k_hi);
  p.basis = cfg.get_string("prior", "basis", "daubechies") == "sine" ? BasisKind::sine
                                                                     : BasisKind::daubechies;
  p.wavelet_moments = static_cast<int>(cfg.get_long("prior", "wavelet_moments", 6));
  p.sample_size = cfg.get_long("prior", "sample_size", p.sample_size);
  p.truncation = static_cast<int>(cfg.get_long("prior", "truncation", p.truncation));
  p.scale_constant = cfg.get_double("prior", "scale_constant", 1.0);
  p.cutoff.plateau_lo = cfg.get_double("prior", "plateau_lo", p.cutoff.plateau_lo);
  p.cutoff.plateau_hi = cfg.get_double("prior", "plateau_hi", p.cutoff.plateau_hi);
  p.cutoff.support_lo = cfg.get_double("prior", "support_lo", p.cutoff.support_lo);
  p.cutoff.support_hi = cfg.get_double("prior", "support_hi", p.cutoff.support_hi);
  p.cutoff.identity = cfg.get_bool("prior", "cutoff_identity", false);
  return p;
}

ChainConfig chain_from_config(const Config& cfg) {
  ChainConfig c;
  c.iterations = cfg.get_long("chain", "iterations", c.iterations);
  c.burn_in = cfg.get_long("chain", "burn_in", c.burn_in);
  c.thin = static_cast<int>(cfg.get_long("chain", "thin", c.thin));
  c.beta = cfg.get_double("chain", "beta", c.beta);
  c.accept_lo = cfg.get_double("chain", "accept_lo", c.accept_lo);
  c.accept_hi = cfg.get_double("chain", "accept_hi", c.accept_hi);
  c.adapt_window = static_cast<int>(cfg.get_long("chain", "adapt_window", c.adapt_window));
  c.j_move_prob = cfg.get_double("chain", "j_move_prob", c.j_move_prob);
  c.likelihood_off = cfg.get_bool("chain", "likelihood_off", false);
  c.seed = static_cast<std::uint64_t>(cfg.get_long("chain", "seed", 1));
  return c;
}

GridField field_from_config(const Config& cfg, const std::string& section, const std::string& key,
                            const DomainSpec& spec, double fallback_const) {
  std::string v = cfg.get_string(section, key, "");
  if (v.rfind("csv:", 0) == 0) return read_field_csv(v.substr(4));
  if (v.rfind("const:", 0) == 0) return GridField(spec, std::stod(v.substr(6)));
  if (v == "bump") {
    ExperimentPlan p;
    p.dim = spec.dim;
    return make_truth_field(p, spec);
  }
  if (v.empty()) return GridField(spec, fallback_const);
  throw IoError("config [" + section + "] " + key + ": expected const:<v>, csv:<path> or bump");
}

int cmd_solve(const Config& cfg, const std::string& out_dir) {
  DomainSpec spec = domain_from_config(cfg);
  GridField f = field_from_config(cfg, "solve", "f", spec, 1.0);
  GridField g = field_from_config(cfg, "solve", "g", spec, 2.0);
  SolverConfig scfg = solver_from_config(cfg);
  GridField u = solve_fd(f, g, scfg);
  std::filesystem::create_directories(out_dir);
  write_field_csv(u, out_dir + "/solution.csv");
  if (spec.dim == 1 && scfg.oracle_check) {
    GridField oracle = solve_1d_closed_form(f, g);
    write_field_csv(oracle, out_dir + "/solution_oracle.csv");
  }
  std::printf("wrote %s/solution.csv (n=%d, dim=%d)\n", out_dir.c_str(), spec.n, spec.dim);
  return 0;
}

int cmd_link_build(const Config& cfg, const std::string& out_dir) {
  LinkTable lk = link_from_config(cfg);
  std::filesystem::create_directories(out_dir);
  write_link_csv(lk, out_dir + "/link.csv");
  std::printf("wrote %s/link.csv (%d entries, k_min=%g)\n", out_dir.c_str(), lk.size(), lk.k_min);
  return 0;
}

int cmd_prior_sample(const Config& cfg, std::uint64_t seed, const std::string& out_dir,
                     int count) {
  DomainSpec spec = domain_from_config(cfg);
  PriorSpec prior = prior_from_config(cfg);
  GaussianSampler sampler(prior, spec);
  Rng rng(seed);
  std::filesystem::create_directories(out_dir);
  for (int i = 0; i < count; ++i) {
    PriorDraw draw = draw_prior(prior, sampler, rng);
    write_field_csv(draw.field, out_dir + "/draw_" + std::to_string(i) + ".csv");
    if (draw.coefficients) {
      std::ofstream os(out_dir + "/coeffs_" + std::to_string(i) + ".csv");
      write_coefficients_csv(*draw.coefficients, os);
    }
  }
  std::printf("wrote %d prior draw(s) to %s\n", count, out_dir.c_str());
  return 0;
}

int cmd_simulate(const Config& cfg, std::uint64_t seed, const std::string& out_dir) {
  DomainSpec spec = domain_from_config(cfg);
  LinkTable link = link_from_config(cfg);
  SolverConfig scfg = solver_from_config(cfg);
  GridField truth = field_from_config(cfg, "truth", "latent", spec, 0.0);
  SourceTerm src = make_source(field_from_config(cfg, "solve", "g", spec, 2.0));
  int n_obs = static_cast<int>(cfg.get_long("observation", "N", 1000));
  double sigma = cfg.get_double("observation", "sigma", 0.05);
  Dataset data = generate_dataset(truth, link, src, scfg, n_obs, sigma, seed,
                                  cfg.get_string("truth", "id", "truth"));
  std::filesystem::create_directories(out_dir);
  write_dataset_csv(data, out_dir + "/dataset.csv", out_dir + "/dataset.json");
  write_field_csv(truth, out_dir + "/truth_latent.csv");
  std::printf("wrote %s/dataset.csv (N=%d, sigma=%g)\n", out_dir.c_str(), n_obs, sigma);
  return 0;
}

int cmd_chain(const Config& cfg, std::uint64_t seed, const std::string& out_dir) {
  DomainSpec spec = domain_from_config(cfg);
  LinkTable link = link_from_config(cfg);
  SolverConfig scfg = solver_from_config(cfg);
  PriorSpec prior = prior_from_config(cfg);
  SourceTerm src = make_source(field_from_config(cfg, "solve", "g", spec, 2.0));
  Dataset data = read_dataset_csv(cfg.get_string("chain", "data"),
                                  cfg.get_string("chain", "sidecar"));
  ChainConfig ccfg = chain_from_config(cfg);
  if (seed != 0) ccfg.seed = seed;
  GaussianSampler sampler(prior, spec);
  TargetContext target{&data, &link, &src, scfg, ccfg.likelihood_off};
  ChainRecord record = run_chain(ChainInit{}, sampler, target, ccfg);
  std::filesystem::create_directories(out_dir);
  write_chain_dump(record, out_dir + "/chain");
  write_field_csv(posterior_mean(record), out_dir + "/posterior_mean.csv");
  write_field_csv(posterior_mean_conductivity(record, link),
                  out_dir + "/posterior_mean_conductivity.csv");
  ChainSummary s = chain_diagnostics(record);
  std::printf("chain done: pcn acceptance %.3f, final beta %.4f, stored %zu states\n",
              s.pcn_acceptance, record.final_beta, record.states.size());
  return 0;
}

int cmd_rate_study(const Config& cfg, std::uint64_t seed, const std::string& out_dir) {
  ExperimentPlan plan = plan_from_config(cfg);
  if (seed != 0) plan.master_seed = seed;
  RateReport report = run_rate_study(plan);
  emit_report(report, out_dir);
  std::printf("rate study: %zu cells, all_ok=%s\n", report.cells.size(),
              report.all_ok ? "true" : "false");
  for (const auto& [metric, fit] : report.slopes)
    std::printf("  slope[%s] = %+.4f (stderr %.4f)\n", metric.c_str(), fit.slope, fit.stderr_);
  return report.all_ok ? 0 : 1;
}

int cmd_theory(const Config& cfg, const std::string& out_dir) {
  double alpha = cfg.get_double("theory", "alpha", 3.0);
  double beta_reg = cfg.get_double("theory", "beta_reg", 2.0);
  double alpha0 = cfg.get_double("theory", "alpha0", alpha);
  double tail_a = cfg.get_double("theory", "a", 2.0);
  int dim = static_cast<int>(cfg.get_long("theory", "dim", 1));
  RateExponents e = theoretical_exponents(alpha, beta_reg, alpha0, tail_a, dim);
  nlohmann::json j{{"alpha", alpha},     {"beta_reg", beta_reg}, {"alpha0", alpha0},
                   {"a", tail_a},        {"dim", dim},           {"delta_exp", e.delta_exp},
                   {"lambda", e.lambda}, {"xi_exp", e.xi_exp},   {"rho", e.rho},
                   {"alpha_star", e.alpha_star}};
  std::cout << j.dump(2) << '\n';
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream os(out_dir + "/theory.json");
    os << j.dump(2) << '\n';
  }
  return 0;
}

int cmd_stability(const Config& cfg, std::uint64_t seed, const std::string& out_dir) {
  DomainSpec spec = domain_from_config(cfg);
  SolverConfig scfg = solver_from_config(cfg);
  double amplitude = cfg.get_double("stability", "amplitude", 0.1);
  int count = static_cast<int>(cfg.get_long("stability", "count", 50));
  GridField f0 = field_from_config(cfg, "stability", "f0", spec, 1.0);
  SourceTerm src = make_source(field_from_config(cfg, "solve", "g", spec, 2.0));
  Rng rng(seed ? seed : 7);
  std::vector<GridField> samples;
  for (int s = 0; s < count; ++s) {
    double a1 = amplitude * (2.0 * rng.uniform() - 1.0);
    double a2 = amplitude * (2.0 * rng.uniform() - 1.0);
    double a3 = 0.5 * amplitude * (2.0 * rng.uniform() - 1.0);
    GridField pert = sample_field_1d(spec, [&](double x) {
      return a1 * std::sin(2 * std::numbers::pi * x) + a2 * std::cos(2 * std::numbers::pi * x) +
             a3 * std::sin(4 * std::numbers::pi * x);
    });
    samples.push_back(f0 + pert);
  }
  auto entries = stability_diagnostic(samples, f0, src, scfg);
  std::filesystem::create_directories(out_dir);
  std::ofstream os(out_dir + "/stability.csv");
  os.precision(17);
  os << "sample,ratio,skipped\n";
  double worst = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    os << i << ',' << entries[i].ratio << ',' << (entries[i].skipped ? 1 : 0) << '\n';
    if (!entries[i].skipped) worst = std::max(worst, entries[i].ratio);
  }
  std::printf("stability: %zu samples, max ratio %.6f -> %s/stability.csv\n", entries.size(),
              worst, out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"divlab: Bayesian inversion laboratory for div(f grad u) = g"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int count = 1;
  for (auto* sub : {app.add_subcommand("solve", "solve the PDE for a given conductivity"),
                    app.add_subcommand("link-build", "tabulate the link function"),
                    app.add_subcommand("prior-sample", "draw from a prior"),
                    app.add_subcommand("simulate", "generate a synthetic dataset"),
                    app.add_subcommand("chain", "run one MCMC chain"),
                    app.add_subcommand("rate-study", "run a full contraction-rate study"),
                    app.add_subcommand("theory", "evaluate the theoretical rate exponents"),
                    app.add_subcommand("stability", "stability-estimate diagnostic")}) {
    sub->add_option("-c,--config", config_path, "config file (sectioned key=value)");
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--out", out_dir, "output directory");
    if (sub->get_name() == "prior-sample")
      sub->add_option("--count", count, "number of draws");
  }

  CLI11_PARSE(app, argc, argv);
  try {
    Config cfg = config_path.empty() ? Config::parse_string("") : Config::parse_file(config_path);
    CLI::App* sub = app.get_subcommands().front();
    const std::string& name = sub->get_name();
    if (name == "solve") return cmd_solve(cfg, out_dir);
    if (name == "link-build") return cmd_link_build(cfg, out_dir);
    if (name == "prior-sample") return cmd_prior_sample(cfg, seed ? seed : 1, out_dir, count);
    if (name == "simulate") return cmd_simulate(cfg, seed ? seed : 1, out_dir);
    if (name == "chain") return cmd_chain(cfg, seed, out_dir);
    if (name == "rate-study") return cmd_rate_study(cfg, seed, out_dir);
    if (name == "theory") return cmd_theory(cfg, out_dir);
    if (name == "stability") return cmd_stability(cfg, seed, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
