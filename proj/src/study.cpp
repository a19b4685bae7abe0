#include "divlab/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"

namespace divlab {

const std::vector<std::string> kCellMetrics = {
    "pred_l2", "param_l2", "latent_l2", "pred_h2", "hellinger", "kl", "stability_ratio"};

namespace {

constexpr const char* kVersion = "divlab 1.0.0";

double bump_profile(double x, double center, double radius) {
  double u = (x - center) / radius;
  double q = 1.0 - u * u;
  if (q <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / q);  // scaled so the peak value is 1
}

// Smooth plateau window: 0 outside [a, d], 1 on [b, c].
double plateau_window(double x, double a, double b, double c, double d) {
  auto blend = [](double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    double v = std::exp(-1.0 / u), w = std::exp(-1.0 / (1.0 - u));
    return v / (v + w);
  };
  if (x < b) return blend((x - a) / (b - a));
  if (x > c) return blend((d - x) / (d - c));
  return 1.0;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

void validate(const ExperimentPlan& plan) {
  if (plan.n_grid.empty()) throw DomainViolation("ExperimentPlan: empty N grid");
  for (std::size_t i = 1; i < plan.n_grid.size(); ++i)
    if (plan.n_grid[i] <= plan.n_grid[i - 1])
      throw DomainViolation("ExperimentPlan: N grid must be strictly increasing");
  if (plan.replicates < 1) throw DomainViolation("ExperimentPlan: replicates must be >= 1");
  if (!(plan.sigma > 0.0)) throw DomainViolation("ExperimentPlan: sigma must be > 0");
  if (plan.metrics_n < plan.chain_n || plan.metrics_n % plan.chain_n != 0)
    throw DomainViolation("ExperimentPlan: metrics grid must refine the chain grid");
  validate(plan.chain);
  if (plan.truth != "bump" && plan.truth != "tilted_bump")
    throw DomainViolation("ExperimentPlan: unknown truth " + plan.truth);
  // The truth must be supported in K.
  if (plan.truth == "bump" && (plan.truth_center - plan.truth_radius < plan.prior.k_lo ||
                               plan.truth_center + plan.truth_radius > plan.prior.k_hi))
    throw DomainViolation("ExperimentPlan: bump support must lie inside K");
  if (plan.truth == "tilted_bump" &&
      !(plan.truth_taper > 0.0 && 2.0 * plan.truth_taper < plan.prior.k_hi - plan.prior.k_lo))
    throw DomainViolation("ExperimentPlan: tilted_bump taper too wide for K");
}

GridField make_truth_field(const ExperimentPlan& plan, const DomainSpec& spec) {
  const double a = plan.truth_amplitude;
  if (plan.truth == "tilted_bump") {
    const double lo = plan.prior.k_lo, hi = plan.prior.k_hi, w = plan.truth_taper;
    const double tilt = plan.truth_tilt;
    auto profile = [&](double x) {
      double t = (x - 0.5) / 0.4;
      return a * plateau_window(x, lo, lo + w, hi - w, hi) * (1.0 + tilt * t);
    };
    if (spec.dim == 1) return sample_field_1d(spec, profile);
    return sample_field_2d(spec,
                           [&](double x, double y) { return profile(x) * profile(y) / a; });
  }
  const double c = plan.truth_center, r = plan.truth_radius;
  if (spec.dim == 1)
    return sample_field_1d(spec, [&](double x) { return a * bump_profile(x, c, r); });
  return sample_field_2d(spec, [&](double x, double y) {
    return a * bump_profile(x, c, r) * bump_profile(y, c, r);
  });
}

namespace {

CellResult run_cell(const ExperimentPlan& plan, const LinkTable& link, long n_obs,
                    int replicate) {
  CellResult cell;
  cell.n_obs = n_obs;
  cell.replicate = replicate;
  cell.seed = derive_seed(plan.master_seed, 0xc4a1, static_cast<std::uint64_t>(replicate + 1));
  try {
    DomainSpec chain_spec{plan.dim, plan.chain_n};
    DomainSpec fine_spec{plan.dim, plan.metrics_n};
    SourceTerm src_chain = make_constant_source(chain_spec, plan.source_constant);
    SourceTerm src_fine = make_constant_source(fine_spec, plan.source_constant);

    GridField truth_chain = make_truth_field(plan, chain_spec);
    GridField truth_fine = make_truth_field(plan, fine_spec);

    // One data stream per replicate: datasets are nested across the N grid,
    // so each replicate traces one growing experiment.
    Dataset data = generate_dataset(truth_chain, link, src_chain, plan.solver,
                                    static_cast<int>(n_obs), plan.sigma,
                                    derive_seed(plan.master_seed, 0xda7a, replicate + 1),
                                    plan.truth);

    PriorSpec prior = plan.prior;
    prior.variant = plan.prior_variant;
    prior.alpha = plan.alpha;
    prior.sample_size = n_obs;
    GaussianSampler sampler(prior, chain_spec);

    ChainConfig ccfg = plan.chain;
    // Chain randomness is also shared across the N grid within a replicate,
    // so error differences between adjacent N are driven by the data volume.
    ccfg.seed = cell.seed;
    TargetContext target{&data, &link, &src_chain, plan.solver, false};
    ChainInit init;
    if (plan.warm_start && plan.prior_variant == PriorVariant::rescaled_matern)
      init.latent = gauss_newton_init(sampler, data, link, src_chain, plan.solver, 0, 3);
    ChainRecord record = run_chain(init, sampler, target, ccfg);
    if (!plan.cell_dump_dir.empty()) {
      std::filesystem::create_directories(plan.cell_dump_dir);
      std::string stem = plan.cell_dump_dir + "/cell_N" + std::to_string(n_obs) + "_r" +
                         std::to_string(replicate);
      write_dataset_csv(data, stem + "_dataset.csv", stem + "_dataset.json");
      write_chain_dump(record, stem);
    }
    ChainSummary summary = chain_diagnostics(record);
    cell.pcn_acceptance = summary.pcn_acceptance;
    cell.final_beta = record.final_beta;

    GridField mean_chain = posterior_mean(record);
    GridField mean_fine = refine_to(mean_chain, fine_spec);

    GridField f_mean = apply_link(link, mean_fine);
    GridField f_true = apply_link(link, truth_fine);
    GridField u_mean = solve_fd(f_mean, src_fine.g, plan.solver);
    GridField u_true = solve_fd(f_true, src_fine.g, plan.solver);
    GridField du = u_mean - u_true;

    cell.metrics["pred_l2"] = quadrature_l2(du);
    cell.metrics["param_l2"] = quadrature_l2(f_mean - f_true);
    cell.metrics["latent_l2"] = quadrature_l2(mean_fine - truth_fine);
    cell.metrics["pred_h2"] = sobolev_norm_h2(du);
    cell.metrics["hellinger"] = hellinger_from_solutions(u_true, u_mean, plan.sigma);
    cell.metrics["kl"] = kl_divergence_from_solutions(u_true, u_mean, plan.sigma);
    double den = c1_norm_discrete(f_mean) * cell.metrics["pred_h2"];
    cell.metrics["stability_ratio"] =
        den > 0.0 ? cell.metrics["param_l2"] / den : std::numeric_limits<double>::quiet_NaN();
  } catch (const std::exception& e) {
    cell.status = "failed";
    cell.error = e.what();
    cell.metrics.clear();
    for (const auto& m : kCellMetrics) cell.metrics[m] = std::numeric_limits<double>::quiet_NaN();
  }
  return cell;
}

}  // namespace

RateReport run_rate_study(const ExperimentPlan& plan) {
  validate(plan);
  RateReport report;
  report.version = kVersion;
  report.plan = plan;
  report.theory =
      theoretical_exponents(plan.alpha, plan.beta_reg, std::max(plan.alpha0, plan.alpha),
                            plan.tail_a, plan.dim);
  if (plan.prior_variant == PriorVariant::hierarchical &&
      std::max(plan.alpha0, plan.alpha) < report.theory.alpha_star)
    report.notes.push_back(
        "outside the guaranteed-rate regime: truth smoothness alpha0 is below alpha* = " +
        std::to_string(report.theory.alpha_star));

  LinkTable link = build_link(plan.k_min);

  const std::size_t cell_count = plan.n_grid.size() * static_cast<std::size_t>(plan.replicates);
  report.cells.resize(cell_count);
  std::atomic<std::size_t> next{0};
  unsigned workers = plan.threads > 0 ? static_cast<unsigned>(plan.threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(cell_count));
  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= cell_count) return;
      std::size_t n_index = i / plan.replicates;
      int replicate = static_cast<int>(i % plan.replicates);
      report.cells[i] = run_cell(plan, link, plan.n_grid[n_index], replicate);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  report.all_ok = true;
  for (const auto& c : report.cells)
    if (c.status != "ok") report.all_ok = false;

  for (const auto& metric : kCellMetrics) {
    std::map<long, double>& med = report.medians[metric];
    for (std::size_t ni = 0; ni < plan.n_grid.size(); ++ni) {
      std::vector<double> vals;
      for (int r = 0; r < plan.replicates; ++r) {
        const CellResult& c = report.cells[ni * plan.replicates + r];
        if (c.status == "ok") vals.push_back(c.metrics.at(metric));
      }
      if (!vals.empty()) med[plan.n_grid[ni]] = median_of(std::move(vals));
    }
    if (med.size() >= 3) {
      std::vector<std::pair<double, double>> pairs;
      bool positive = true;
      for (const auto& [n, v] : med) {
        if (!(v > 0.0)) positive = false;
        pairs.emplace_back(static_cast<double>(n), v);
      }
      if (positive) report.slopes[metric] = fit_loglog_slope(pairs);
    }
  }
  return report;
}

std::vector<StabilityEntry> stability_diagnostic(const std::vector<GridField>& f_samples,
                                                 const GridField& f0, const SourceTerm& src,
                                                 const SolverConfig& cfg) {
  if (!src.strictly_positive)
    throw DomainViolation("stability_diagnostic: source must be strictly positive");
  GridField u0 = solve_fd(f0, src.g, cfg);
  std::vector<StabilityEntry> out;
  out.reserve(f_samples.size());
  for (const auto& f : f_samples) {
    StabilityEntry e;
    double num = quadrature_l2(f - f0);
    if (num == 0.0) {
      e.skipped = true;
      out.push_back(e);
      continue;
    }
    GridField u = solve_fd(f, src.g, cfg);
    double den = c1_norm_discrete(f) * sobolev_norm_h2(u - u0);
    if (den == 0.0) {
      e.skipped = true;
      out.push_back(e);
      continue;
    }
    e.ratio = num / den;
    out.push_back(e);
  }
  return out;
}

namespace {

nlohmann::json chain_to_json(const ChainConfig& c) {
  return {{"iterations", c.iterations},
          {"burn_in", c.burn_in},
          {"thin", c.thin},
          {"beta", c.beta},
          {"accept_lo", c.accept_lo},
          {"accept_hi", c.accept_hi},
          {"adapt_window", c.adapt_window},
          {"adapt_rate", c.adapt_rate},
          {"beta_min", c.beta_min},
          {"j_move_prob", c.j_move_prob},
          {"likelihood_off", c.likelihood_off},
          {"seed", c.seed}};
}

ChainConfig chain_from_json(const nlohmann::json& j) {
  ChainConfig c;
  c.iterations = j.at("iterations").get<long>();
  c.burn_in = j.at("burn_in").get<long>();
  c.thin = j.at("thin").get<int>();
  c.beta = j.at("beta").get<double>();
  c.accept_lo = j.at("accept_lo").get<double>();
  c.accept_hi = j.at("accept_hi").get<double>();
  c.adapt_window = j.at("adapt_window").get<int>();
  c.adapt_rate = j.at("adapt_rate").get<double>();
  c.beta_min = j.at("beta_min").get<double>();
  c.j_move_prob = j.at("j_move_prob").get<double>();
  c.likelihood_off = j.at("likelihood_off").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

std::string variant_name(PriorVariant v) {
  switch (v) {
    case PriorVariant::rescaled_matern: return "rescaled_matern";
    case PriorVariant::sieve_wavelet: return "sieve_wavelet";
    case PriorVariant::hierarchical: return "hierarchical";
  }
  return "rescaled_matern";
}

PriorVariant variant_from_name(const std::string& s) {
  if (s == "rescaled_matern") return PriorVariant::rescaled_matern;
  if (s == "sieve_wavelet") return PriorVariant::sieve_wavelet;
  if (s == "hierarchical") return PriorVariant::hierarchical;
  throw IoError("unknown prior variant: " + s);
}

nlohmann::json prior_to_json(const PriorSpec& p) {
  return {{"variant", variant_name(p.variant)},
          {"alpha", p.alpha},
          {"k_lo", p.k_lo},
          {"k_hi", p.k_hi},
          {"basis", p.basis == BasisKind::daubechies ? "daubechies" : "sine"},
          {"wavelet_moments", p.wavelet_moments},
          {"sample_size", p.sample_size},
          {"truncation", p.truncation},
          {"scale_constant", p.scale_constant},
          {"cutoff",
           {{"plateau_lo", p.cutoff.plateau_lo},
            {"plateau_hi", p.cutoff.plateau_hi},
            {"support_lo", p.cutoff.support_lo},
            {"support_hi", p.cutoff.support_hi},
            {"identity", p.cutoff.identity}}}};
}

PriorSpec prior_from_json(const nlohmann::json& j) {
  PriorSpec p;
  p.variant = variant_from_name(j.at("variant").get<std::string>());
  p.alpha = j.at("alpha").get<double>();
  p.k_lo = j.at("k_lo").get<double>();
  p.k_hi = j.at("k_hi").get<double>();
  p.basis = j.at("basis").get<std::string>() == "sine" ? BasisKind::sine : BasisKind::daubechies;
  p.wavelet_moments = j.at("wavelet_moments").get<int>();
  p.sample_size = j.at("sample_size").get<long>();
  p.truncation = j.at("truncation").get<int>();
  p.scale_constant = j.at("scale_constant").get<double>();
  const auto& c = j.at("cutoff");
  p.cutoff.plateau_lo = c.at("plateau_lo").get<double>();
  p.cutoff.plateau_hi = c.at("plateau_hi").get<double>();
  p.cutoff.support_lo = c.at("support_lo").get<double>();
  p.cutoff.support_hi = c.at("support_hi").get<double>();
  p.cutoff.identity = c.at("identity").get<bool>();
  return p;
}

nlohmann::json plan_to_json(const ExperimentPlan& p) {
  return {{"prior_variant", variant_name(p.prior_variant)},
          {"alpha", p.alpha},
          {"beta_reg", p.beta_reg},
          {"alpha0", p.alpha0},
          {"tail_a", p.tail_a},
          {"dim", p.dim},
          {"sigma", p.sigma},
          {"n_grid", p.n_grid},
          {"replicates", p.replicates},
          {"truth", p.truth},
          {"truth_amplitude", p.truth_amplitude},
          {"truth_center", p.truth_center},
          {"truth_radius", p.truth_radius},
          {"truth_tilt", p.truth_tilt},
          {"truth_taper", p.truth_taper},
          {"warm_start", p.warm_start},
          {"k_min", p.k_min},
          {"chain_n", p.chain_n},
          {"metrics_n", p.metrics_n},
          {"source_constant", p.source_constant},
          {"chain", chain_to_json(p.chain)},
          {"solver_cg_tol", p.solver.cg_tol},
          {"solver_cg_max_iter", p.solver.cg_max_iter},
          {"prior", prior_to_json(p.prior)},
          {"master_seed", p.master_seed},
          {"threads", p.threads},
          {"cell_dump_dir", p.cell_dump_dir}};
}

ExperimentPlan plan_from_json(const nlohmann::json& j) {
  ExperimentPlan p;
  p.prior_variant = variant_from_name(j.at("prior_variant").get<std::string>());
  p.alpha = j.at("alpha").get<double>();
  p.beta_reg = j.at("beta_reg").get<double>();
  p.alpha0 = j.at("alpha0").get<double>();
  p.tail_a = j.at("tail_a").get<double>();
  p.dim = j.at("dim").get<int>();
  p.sigma = j.at("sigma").get<double>();
  p.n_grid = j.at("n_grid").get<std::vector<long>>();
  p.replicates = j.at("replicates").get<int>();
  p.truth = j.at("truth").get<std::string>();
  p.truth_amplitude = j.at("truth_amplitude").get<double>();
  p.truth_center = j.at("truth_center").get<double>();
  p.truth_radius = j.at("truth_radius").get<double>();
  p.truth_tilt = j.at("truth_tilt").get<double>();
  p.truth_taper = j.at("truth_taper").get<double>();
  p.warm_start = j.at("warm_start").get<bool>();
  p.k_min = j.at("k_min").get<double>();
  p.chain_n = j.at("chain_n").get<int>();
  p.metrics_n = j.at("metrics_n").get<int>();
  p.source_constant = j.at("source_constant").get<double>();
  p.chain = chain_from_json(j.at("chain"));
  p.solver.cg_tol = j.at("solver_cg_tol").get<double>();
  p.solver.cg_max_iter = j.at("solver_cg_max_iter").get<int>();
  p.prior = prior_from_json(j.at("prior"));
  p.master_seed = j.at("master_seed").get<std::uint64_t>();
  p.threads = j.at("threads").get<int>();
  p.cell_dump_dir = j.at("cell_dump_dir").get<std::string>();
  return p;
}

nlohmann::json report_to_json(const RateReport& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [k, v] : c.metrics) {
      if (std::isnan(v))
        metrics[k] = nullptr;
      else
        metrics[k] = v;
    }
    cells.push_back({{"N", c.n_obs},
                     {"replicate", c.replicate},
                     {"seed", c.seed},
                     {"status", c.status},
                     {"error", c.error},
                     {"metrics", metrics},
                     {"pcn_acceptance", c.pcn_acceptance},
                     {"final_beta", c.final_beta}});
  }
  nlohmann::json medians = nlohmann::json::object();
  for (const auto& [metric, byn] : r.medians) {
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [n, v] : byn) m[std::to_string(n)] = v;
    medians[metric] = m;
  }
  nlohmann::json slopes = nlohmann::json::object();
  for (const auto& [metric, fit] : r.slopes)
    slopes[metric] = {{"slope", fit.slope}, {"stderr", fit.stderr_}};
  return {{"version", r.version},
          {"plan", plan_to_json(r.plan)},
          {"theory",
           {{"delta_exp", r.theory.delta_exp},
            {"lambda", r.theory.lambda},
            {"xi_exp", r.theory.xi_exp},
            {"rho", r.theory.rho},
            {"alpha_star", r.theory.alpha_star}}},
          {"notes", r.notes},
          {"cells", cells},
          {"medians", medians},
          {"slopes", slopes},
          {"all_ok", r.all_ok}};
}

}  // namespace

std::string report_to_json_string(const RateReport& report) {
  return report_to_json(report).dump(2);
}

void emit_report(const RateReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream os(out_dir + "/report.json");
    if (!os) throw IoError("cannot open " + out_dir + "/report.json");
    os << report_to_json_string(report) << '\n';
  }
  {
    std::ofstream os(out_dir + "/rates.csv");
    if (!os) throw IoError("cannot open " + out_dir + "/rates.csv");
    os.precision(17);
    os << "N,replicate,metric,value\n";
    for (const auto& c : report.cells)
      for (const auto& metric : kCellMetrics) {
        os << c.n_obs << ',' << c.replicate << ',' << metric << ',';
        double v = c.metrics.at(metric);
        if (std::isnan(v))
          os << "nan";
        else
          os << v;
        os << '\n';
      }
  }
}

RateReport read_report(const std::string& json_path) {
  std::ifstream is(json_path);
  if (!is) throw IoError("cannot open " + json_path);
  nlohmann::json j = nlohmann::json::parse(is);
  RateReport r;
  r.version = j.at("version").get<std::string>();
  r.plan = plan_from_json(j.at("plan"));
  r.theory.delta_exp = j.at("theory").at("delta_exp").get<double>();
  r.theory.lambda = j.at("theory").at("lambda").get<double>();
  r.theory.xi_exp = j.at("theory").at("xi_exp").get<double>();
  r.theory.rho = j.at("theory").at("rho").get<double>();
  r.theory.alpha_star = j.at("theory").at("alpha_star").get<double>();
  r.notes = j.at("notes").get<std::vector<std::string>>();
  for (const auto& cj : j.at("cells")) {
    CellResult c;
    c.n_obs = cj.at("N").get<long>();
    c.replicate = cj.at("replicate").get<int>();
    c.seed = cj.at("seed").get<std::uint64_t>();
    c.status = cj.at("status").get<std::string>();
    c.error = cj.at("error").get<std::string>();
    for (const auto& [k, v] : cj.at("metrics").items())
      c.metrics[k] = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
    c.pcn_acceptance = cj.at("pcn_acceptance").get<double>();
    c.final_beta = cj.at("final_beta").get<double>();
    r.cells.push_back(std::move(c));
  }
  for (const auto& [metric, m] : j.at("medians").items())
    for (const auto& [n, v] : m.items()) r.medians[metric][std::stol(n)] = v.get<double>();
  for (const auto& [metric, f] : j.at("slopes").items())
    r.slopes[metric] = SlopeFit{f.at("slope").get<double>(), f.at("stderr").get<double>()};
  r.all_ok = j.at("all_ok").get<bool>();
  return r;
}

ExperimentPlan plan_from_config(const Config& cfg) {
  ExperimentPlan p;
  p.prior_variant = variant_from_name(cfg.get_string("study", "prior_variant", "rescaled_matern"));
  p.alpha = cfg.get_double("study", "alpha", p.alpha);
  p.beta_reg = cfg.get_double("study", "beta_reg", p.beta_reg);
  p.alpha0 = cfg.get_double("study", "alpha0", p.alpha);
  p.tail_a = cfg.get_double("study", "tail_a", p.tail_a);
  p.dim = static_cast<int>(cfg.get_long("study", "dim", p.dim));
  p.sigma = cfg.get_double("study", "sigma", p.sigma);
  if (cfg.has("study", "n_grid")) p.n_grid = cfg.get_long_list("study", "n_grid");
  p.replicates = static_cast<int>(cfg.get_long("study", "replicates", p.replicates));
  p.truth = cfg.get_string("study", "truth", p.truth);
  p.truth_amplitude = cfg.get_double("study", "truth_amplitude", p.truth_amplitude);
  p.truth_center = cfg.get_double("study", "truth_center", p.truth_center);
  p.truth_radius = cfg.get_double("study", "truth_radius", p.truth_radius);
  p.truth_tilt = cfg.get_double("study", "truth_tilt", p.truth_tilt);
  p.truth_taper = cfg.get_double("study", "truth_taper", p.truth_taper);
  p.warm_start = cfg.get_bool("study", "warm_start", p.warm_start);
  p.k_min = cfg.get_double("link", "k_min", p.k_min);
  p.chain_n = static_cast<int>(cfg.get_long("study", "chain_n", p.chain_n));
  p.metrics_n = static_cast<int>(cfg.get_long("study", "metrics_n", p.metrics_n));
  p.source_constant = cfg.get_double("study", "source_constant", p.source_constant);
  p.master_seed = static_cast<std::uint64_t>(cfg.get_long("study", "seed", 20240801));
  p.threads = static_cast<int>(cfg.get_long("study", "threads", 0));
  p.cell_dump_dir = cfg.get_string("study", "cell_dump_dir", "");

  p.chain.iterations = cfg.get_long("chain", "iterations", p.chain.iterations);
  p.chain.burn_in = cfg.get_long("chain", "burn_in", p.chain.burn_in);
  p.chain.thin = static_cast<int>(cfg.get_long("chain", "thin", p.chain.thin));
  p.chain.beta = cfg.get_double("chain", "beta", p.chain.beta);
  p.chain.accept_lo = cfg.get_double("chain", "accept_lo", p.chain.accept_lo);
  p.chain.accept_hi = cfg.get_double("chain", "accept_hi", p.chain.accept_hi);
  p.chain.adapt_window = static_cast<int>(cfg.get_long("chain", "adapt_window", p.chain.adapt_window));
  p.chain.j_move_prob = cfg.get_double("chain", "j_move_prob", p.chain.j_move_prob);

  p.solver.cg_tol = cfg.get_double("solver", "cg_tol", p.solver.cg_tol);
  p.solver.cg_max_iter = static_cast<int>(cfg.get_long("solver", "cg_max_iter", p.solver.cg_max_iter));
  std::string method = cfg.get_string("solver", "method", "auto");
  if (method == "factorize")
    p.solver.method = LinearSolver::factorize;
  else if (method == "cg")
    p.solver.method = LinearSolver::cg;

  p.prior.k_lo = cfg.get_double("prior", "k_lo", p.prior.k_lo);
  p.prior.k_hi = cfg.get_double("prior", "k_hi", p.prior.k_hi);
  p.prior.wavelet_moments = static_cast<int>(cfg.get_long("prior", "wavelet_moments", 6));
  p.prior.basis = cfg.get_string("prior", "basis", "daubechies") == "sine" ? BasisKind::sine
                                                                           : BasisKind::daubechies;
  p.prior.truncation = static_cast<int>(cfg.get_long("prior", "truncation", p.prior.truncation));
  p.prior.scale_constant = cfg.get_double("prior", "scale_constant", 1.0);
  p.prior.cutoff.plateau_lo = cfg.get_double("prior", "plateau_lo", p.prior.cutoff.plateau_lo);
  p.prior.cutoff.plateau_hi = cfg.get_double("prior", "plateau_hi", p.prior.cutoff.plateau_hi);
  p.prior.cutoff.support_lo = cfg.get_double("prior", "support_lo", p.prior.cutoff.support_lo);
  p.prior.cutoff.support_hi = cfg.get_double("prior", "support_hi", p.prior.cutoff.support_hi);
  return p;
}

}  // namespace divlab
