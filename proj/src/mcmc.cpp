#include "divlab/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace divlab {

void validate(const ChainConfig& cfg) {
  if (!(cfg.beta > 0.0 && cfg.beta <= 1.0))
    throw DomainViolation("ChainConfig: beta must be in (0, 1]");
  if (cfg.burn_in >= cfg.iterations)
    throw DomainViolation("ChainConfig: burn_in must be < iterations");
  if (!(cfg.accept_lo > 0.0 && cfg.accept_lo < cfg.accept_hi && cfg.accept_hi < 1.0))
    throw DomainViolation("ChainConfig: acceptance band must be inside (0,1)");
  if (cfg.thin < 1) throw DomainViolation("ChainConfig: thin must be >= 1");
  if (!(cfg.j_move_prob >= 0.0 && cfg.j_move_prob < 1.0))
    throw DomainViolation("ChainConfig: j_move_prob must be in [0,1)");
}

namespace {

void evaluate_state(ChainState& s, const GaussianSampler& sampler, const TargetContext& target) {
  s.field = sampler.synthesize(s.latent, s.level);
  if (target.likelihood_off || target.data == nullptr) {
    s.predictions.clear();
    s.loglik = 0.0;
    return;
  }
  GridField u = forward_map(s.field, *target.link, *target.source, target.solver);
  s.predictions = eval_at_points(u, target.data->points);
  s.loglik = log_likelihood_from_predictions(s.predictions, *target.data);
}

}  // namespace

ChainState make_state(const GaussianSampler& sampler, const TargetContext& target,
                      std::vector<double> latent, int level) {
  ChainState s;
  s.latent = std::move(latent);
  s.level = level;
  evaluate_state(s, sampler, target);
  return s;
}

bool pcn_step(ChainState& state, const GaussianSampler& sampler, const TargetContext& target,
              double beta, Rng& rng, long* solve_failures) {
  ChainState prop;
  prop.level = state.level;
  prop.latent.resize(state.latent.size());
  const double keep = std::sqrt(std::max(0.0, 1.0 - beta * beta));
  for (std::size_t i = 0; i < state.latent.size(); ++i)
    prop.latent[i] = keep * state.latent[i] + beta * rng.normal();
  try {
    evaluate_state(prop, sampler, target);
  } catch (const Error&) {
    if (solve_failures) ++*solve_failures;
    rng.uniform();  // keep the stream aligned with the accept draw
    return false;
  }
  double log_ratio = prop.loglik - state.loglik;
  double u = rng.uniform();
  if (std::log(u) < log_ratio) {
    state = std::move(prop);
    return true;
  }
  return false;
}

RjOutcome rj_truncation_step(ChainState& state, const GaussianSampler& sampler,
                             const TargetContext& target, Rng& rng, long* solve_failures) {
  if (!sampler.is_series())
    throw VariantMismatch("rj_truncation_step: requires a series (hierarchical) prior");
  const int dim = sampler.domain().dim;
  const bool up = rng.uniform() >= 0.5;
  if (!up && state.level == 1) {
    // Reflected at the bottom: identity proposal, always accepted.
    return RjOutcome::reflected;
  }
  const int proposed = state.level + (up ? 1 : -1);
  if (proposed > sampler.max_series_level()) {
    rng.uniform();  // keep the stream aligned with the accept draw
    return RjOutcome::auto_rejected;
  }
  ChainState prop;
  prop.level = proposed;
  prop.latent = state.latent;
  if (up) {
    const int add = sampler.latent_dim(proposed) - sampler.latent_dim(state.level);
    for (int i = 0; i < add; ++i) prop.latent.push_back(rng.normal());
  } else {
    prop.latent.resize(static_cast<std::size_t>(sampler.latent_dim(proposed)));
  }
  try {
    evaluate_state(prop, sampler, target);
  } catch (const Error&) {
    if (solve_failures) ++*solve_failures;
    rng.uniform();
    return RjOutcome::auto_rejected;
  }
  // Prior-proposal births cancel the coefficient priors; the Jacobian is one.
  double log_ratio = prop.loglik - state.loglik +
                     std::log(truncation_pmf(dim, proposed)) -
                     std::log(truncation_pmf(dim, state.level));
  double u = rng.uniform();
  if (std::log(u) < log_ratio) {
    state = std::move(prop);
    return RjOutcome::accepted;
  }
  return RjOutcome::rejected;
}

std::vector<double> gauss_newton_init(const GaussianSampler& sampler, const Dataset& data,
                                      const LinkTable& link, const SourceTerm& src,
                                      const SolverConfig& solver, int level, int passes) {
  const int mz = sampler.latent_dim(level);
  const int no = data.size();
  const double eps = 1e-5;
  const double lam = 1.0 / (data.sigma * data.sigma);
  std::vector<double> z(static_cast<std::size_t>(mz), 0.0);
  std::vector<std::vector<double>> jac(static_cast<std::size_t>(mz));
  for (int pass = 0; pass < passes; ++pass) {
    GridField u = forward_map(sampler.synthesize(z, level), link, src, solver);
    auto pred = eval_at_points(u, data.points);
    for (int j = 0; j < mz; ++j) {
      std::vector<double> zp = z;
      zp[static_cast<std::size_t>(j)] += eps;
      auto pj = eval_at_points(forward_map(sampler.synthesize(zp, level), link, src, solver),
                               data.points);
      auto& col = jac[static_cast<std::size_t>(j)];
      col.resize(static_cast<std::size_t>(no));
      for (int i = 0; i < no; ++i) col[i] = (pj[i] - pred[i]) / eps;
    }
    // (lam J^T J + I) dz = lam J^T (y - pred) - z
    std::vector<double> m(static_cast<std::size_t>(mz) * mz, 0.0);
    std::vector<double> rhs(static_cast<std::size_t>(mz), 0.0);
    for (int a = 0; a < mz; ++a) {
      for (int b = a; b < mz; ++b) {
        double v = 0.0;
        for (int i = 0; i < no; ++i) v += jac[a][i] * jac[b][i];
        m[static_cast<std::size_t>(a) * mz + b] = m[static_cast<std::size_t>(b) * mz + a] =
            lam * v;
      }
      double vb = 0.0;
      for (int i = 0; i < no; ++i) vb += jac[a][i] * (data.y[i] - pred[i]);
      rhs[a] = lam * vb - z[a];
      m[static_cast<std::size_t>(a) * mz + a] += 1.0;
    }
    DenseCholesky chol(std::move(m), mz);
    std::vector<double> y(static_cast<std::size_t>(mz));
    for (int i = 0; i < mz; ++i) {
      double acc = rhs[i];
      for (int k = 0; k < i; ++k) acc -= chol.factor_at(i, k) * y[k];
      y[i] = acc / chol.factor_at(i, i);
    }
    for (int i = mz - 1; i >= 0; --i) {
      double acc = y[i];
      for (int k = i + 1; k < mz; ++k) acc -= chol.factor_at(k, i) * y[k];
      y[i] = acc / chol.factor_at(i, i);
      z[i] += y[i];
    }
  }
  return z;
}

ChainRecord run_chain(const ChainInit& init, const GaussianSampler& sampler,
                      const TargetContext& target, const ChainConfig& cfg) {
  validate(cfg);
  const bool hierarchical = sampler.spec().variant == PriorVariant::hierarchical &&
                            sampler.is_series();
  Rng rng(cfg.seed);
  int level = sampler.is_series()
                  ? (sampler.spec().variant == PriorVariant::sieve_wavelet
                         ? sampler.spec().truncation
                         : std::min(init.level, sampler.max_series_level()))
                  : 0;
  std::vector<double> latent =
      init.latent ? *init.latent
                  : std::vector<double>(static_cast<std::size_t>(sampler.latent_dim(level)), 0.0);
  ChainState state = make_state(sampler, target, std::move(latent), level);

  ChainRecord rec;
  rec.config = cfg;
  rec.domain = sampler.domain();
  rec.loglik_trace.reserve(static_cast<std::size_t>(cfg.iterations));
  double beta = cfg.beta;
  long window_pcn = 0, window_acc = 0, adapt_count = 0;
  GridField mean_acc(sampler.domain(), 0.0);
  long stored = 0;

  for (long t = 1; t <= cfg.iterations; ++t) {
    bool accepted = false;
    bool did_rj = hierarchical && rng.uniform() < cfg.j_move_prob;
    if (did_rj) {
      ++rec.rj_proposed;
      RjOutcome out = rj_truncation_step(state, sampler, target, rng, &rec.solve_failures);
      accepted = out == RjOutcome::accepted || out == RjOutcome::reflected;
      if (accepted) ++rec.rj_accepted;
      if (out == RjOutcome::auto_rejected) ++rec.rj_auto_rejected;
    } else {
      ++rec.pcn_proposed;
      ++window_pcn;
      accepted = pcn_step(state, sampler, target, beta, rng, &rec.solve_failures);
      if (accepted) {
        ++rec.pcn_accepted;
        ++window_acc;
      }
    }
    rec.loglik_trace.push_back(state.loglik);
    rec.level_trace.push_back(state.level);
    rec.beta_trace.push_back(beta);
    rec.accept_trace.push_back(accepted ? 1 : 0);

    // Robbins-Monro adaptation of beta, frozen after burn-in.
    if (t <= cfg.burn_in && window_pcn >= cfg.adapt_window) {
      double rate = static_cast<double>(window_acc) / static_cast<double>(window_pcn);
      if (window_acc == 0 && beta <= cfg.beta_min) {
        if (!cfg.dump_on_abort.empty()) {
          rec.final_beta = beta;
          write_chain_dump(rec, cfg.dump_on_abort);
        }
        throw ChainStalled("run_chain: zero acceptance over a full window at minimum beta");
      }
      ++adapt_count;
      double step = cfg.adapt_rate / std::sqrt(static_cast<double>(adapt_count));
      if (rate < cfg.accept_lo)
        beta *= std::exp(-step);
      else if (rate > cfg.accept_hi)
        beta *= std::exp(step);
      beta = std::clamp(beta, cfg.beta_min, 1.0);
      window_pcn = 0;
      window_acc = 0;
    }

    if (t > cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0) {
      rec.states.push_back(state.field);
      rec.state_iters.push_back(t);
      ++stored;
      for (std::size_t i = 0; i < mean_acc.values.size(); ++i)
        mean_acc.values[i] += (state.field.values[i] - mean_acc.values[i]) / static_cast<double>(stored);
    }
  }
  rec.running_mean = std::move(mean_acc);
  rec.final_beta = beta;
  return rec;
}

GridField posterior_mean(const ChainRecord& record) {
  if (record.states.empty()) throw EmptyChain("posterior_mean: no stored states");
  GridField mean(record.domain, 0.0);
  for (const auto& s : record.states)
    for (std::size_t i = 0; i < mean.values.size(); ++i) mean.values[i] += s.values[i];
  const double inv = 1.0 / static_cast<double>(record.states.size());
  for (auto& v : mean.values) v *= inv;
  return mean;
}

GridField posterior_mean_conductivity(const ChainRecord& record, const LinkTable& link) {
  return apply_link(link, posterior_mean(record));
}

double iact_initial_positive(std::span<const double> series, bool* degenerate) {
  const std::size_t m = series.size();
  if (degenerate) *degenerate = false;
  if (m < 4) {
    if (degenerate) *degenerate = true;
    return 1.0;
  }
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(m);
  auto gamma = [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t t = 0; t + k < m; ++t) s += (series[t] - mean) * (series[t + k] - mean);
    return s / static_cast<double>(m);
  };
  double g0 = gamma(0);
  if (!(g0 > 1e-300)) {
    if (degenerate) *degenerate = true;
    return 1.0;
  }
  double acc = 0.0;
  for (std::size_t k = 0; 2 * k + 1 < m; ++k) {
    double pair = gamma(2 * k) + gamma(2 * k + 1);
    if (pair <= 0.0) break;
    acc += pair;
  }
  return std::max(1.0, 2.0 * acc / g0 - 1.0);
}

ChainSummary chain_diagnostics(const ChainRecord& record) {
  if (record.loglik_trace.empty()) throw EmptyChain("chain_diagnostics: empty record");
  ChainSummary s;
  s.pcn_acceptance = record.pcn_proposed > 0
                         ? static_cast<double>(record.pcn_accepted) / record.pcn_proposed
                         : 0.0;
  s.rj_acceptance =
      record.rj_proposed > 0 ? static_cast<double>(record.rj_accepted) / record.rj_proposed : 0.0;
  double mean = 0.0;
  for (double v : record.loglik_trace) mean += v;
  mean /= static_cast<double>(record.loglik_trace.size());
  double var = 0.0;
  for (double v : record.loglik_trace) var += (v - mean) * (v - mean);
  var /= static_cast<double>(record.loglik_trace.size());
  s.loglik_mean = mean;
  s.loglik_sd = std::sqrt(var);
  std::vector<double> norms;
  norms.reserve(record.states.size());
  for (const auto& f : record.states) norms.push_back(quadrature_l2(f));
  s.iact_field_norm = iact_initial_positive(norms, &s.degenerate_variance);
  for (int j : record.level_trace) ++s.level_histogram[j];
  s.solve_failures = record.solve_failures;
  return s;
}

void write_chain_dump(const ChainRecord& record, const std::string& prefix) {
  {
    std::ofstream os(prefix + "_trace.csv");
    if (!os) throw IoError("cannot open " + prefix + "_trace.csv");
    os.precision(17);
    os << "iter,loglik,accepted,J,beta\n";
    for (std::size_t t = 0; t < record.loglik_trace.size(); ++t)
      os << (t + 1) << ',' << record.loglik_trace[t] << ','
         << static_cast<int>(record.accept_trace[t]) << ',' << record.level_trace[t] << ','
         << record.beta_trace[t] << '\n';
  }
  {
    std::ofstream os(prefix + "_states.csv");
    if (!os) throw IoError("cannot open " + prefix + "_states.csv");
    os.precision(17);
    os << "state,iter";
    const std::size_t width = record.states.empty() ? 0 : record.states.front().values.size();
    for (std::size_t i = 0; i < width; ++i) os << ",v" << i;
    os << '\n';
    for (std::size_t s = 0; s < record.states.size(); ++s) {
      os << s << ',' << record.state_iters[s];
      for (double v : record.states[s].values) os << ',' << v;
      os << '\n';
    }
  }
  {
    ChainSummary sum = chain_diagnostics(record);
    nlohmann::json j{{"pcn_proposed", record.pcn_proposed},
                     {"pcn_accepted", record.pcn_accepted},
                     {"rj_proposed", record.rj_proposed},
                     {"rj_accepted", record.rj_accepted},
                     {"rj_auto_rejected", record.rj_auto_rejected},
                     {"solve_failures", record.solve_failures},
                     {"final_beta", record.final_beta},
                     {"pcn_acceptance", sum.pcn_acceptance},
                     {"rj_acceptance", sum.rj_acceptance},
                     {"loglik_mean", sum.loglik_mean},
                     {"loglik_sd", sum.loglik_sd},
                     {"iact_field_norm", sum.iact_field_norm},
                     {"degenerate_variance", sum.degenerate_variance},
                     {"stored_states", record.states.size()}};
    nlohmann::json hist = nlohmann::json::object();
    for (auto& [lvl, count] : sum.level_histogram) hist[std::to_string(lvl)] = count;
    j["level_histogram"] = hist;
    std::ofstream os(prefix + "_summary.json");
    if (!os) throw IoError("cannot open " + prefix + "_summary.json");
    os << j.dump(2) << '\n';
  }
}

std::vector<std::vector<double>> read_chain_states_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  std::string line;
  std::getline(is, line);  // header
  std::vector<std::vector<double>> states;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() < 3) throw IoError("chain states CSV: malformed row");
    states.emplace_back(row.begin() + 2, row.end());
  }
  return states;
}

}  // namespace divlab
