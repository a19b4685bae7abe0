#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "divlab/observation.hpp"
#include "divlab/prior.hpp"

namespace divlab {

struct ChainConfig {
  long iterations = 20000;
  long burn_in = 5000;
  int thin = 10;
  double beta = 0.2;  // initial pCN step size in (0, 1]
  double accept_lo = 0.2, accept_hi = 0.4;
  int adapt_window = 50;      // Robbins-Monro window; adaptation stops at burn-in
  double adapt_rate = 0.35;   // base log-step, scaled by 1/sqrt(window count)
  double beta_min = 1e-4;
  double j_move_prob = 0.2;   // hierarchical only
  bool likelihood_off = false;  // diagnostic: target the prior
  std::uint64_t seed = 1;
  std::string dump_on_abort;  // optional path prefix for the stall dump
};

void validate(const ChainConfig& cfg);

// Likelihood context shared by all moves of one chain. Predictions for the
// current state and each proposal are computed once and cached in the state.
struct TargetContext {
  const Dataset* data = nullptr;  // may be null when likelihood_off
  const LinkTable* link = nullptr;
  const SourceTerm* source = nullptr;
  SolverConfig solver;
  bool likelihood_off = false;
};

struct ChainState {
  std::vector<double> latent;  // iid standard normal under the prior
  int level = 0;               // truncation level J (series variants)
  GridField field;
  std::vector<double> predictions;
  double loglik = 0.0;
};

// Builds a fully evaluated state from latent coordinates.
ChainState make_state(const GaussianSampler& sampler, const TargetContext& target,
                      std::vector<double> latent, int level);

// One preconditioned Crank-Nicolson move; returns true when accepted. A
// failed forward solve rejects the proposal (and bumps solve_failures when a
// counter is supplied).
bool pcn_step(ChainState& state, const GaussianSampler& sampler, const TargetContext& target,
              double beta, Rng& rng, long* solve_failures = nullptr);

enum class RjOutcome { accepted, rejected, reflected, auto_rejected };

// Reversible-jump birth/death move on the truncation level: J' = J +- 1 with
// probability 1/2 each, reflection at J = 1, prior-proposal births so the
// coefficient-prior terms cancel. Auto-rejects (with a log counter) proposals
// beyond the grid's finest representable level.
RjOutcome rj_truncation_step(ChainState& state, const GaussianSampler& sampler,
                             const TargetContext& target, Rng& rng,
                             long* solve_failures = nullptr);

struct ChainRecord {
  ChainConfig config;
  DomainSpec domain;
  std::vector<GridField> states;  // thinned latent fields, post burn-in
  std::vector<long> state_iters;
  std::vector<double> loglik_trace;
  std::vector<int> level_trace;
  std::vector<double> beta_trace;
  std::vector<char> accept_trace;
  long pcn_proposed = 0, pcn_accepted = 0;
  long rj_proposed = 0, rj_accepted = 0, rj_auto_rejected = 0;
  long solve_failures = 0;
  GridField running_mean;
  double final_beta = 0.0;
};

struct ChainInit {
  std::optional<std::vector<double>> latent;  // default: zeros (prior mean)
  int level = 1;                              // initial J for the hierarchical prior
};

// Deterministic warm start at the (ridge-regularized) Gauss-Newton mode of
// the posterior in latent coordinates. Cuts the burn-in distance when the
// posterior sits many prior standard deviations from the origin; the chain
// law is unchanged.
std::vector<double> gauss_newton_init(const GaussianSampler& sampler, const Dataset& data,
                                      const LinkTable& link, const SourceTerm& src,
                                      const SolverConfig& solver, int level = 0, int passes = 2);

// Runs the chain: pCN sweeps, interleaved with RJ truncation moves for the
// hierarchical prior; beta adapts toward the acceptance band during burn-in
// only. Throws ChainStalled (after an optional diagnostic dump) if a whole
// adaptation window rejects at the minimum step size.
ChainRecord run_chain(const ChainInit& init, const GaussianSampler& sampler,
                      const TargetContext& target, const ChainConfig& cfg);

GridField posterior_mean(const ChainRecord& record);
GridField posterior_mean_conductivity(const ChainRecord& record, const LinkTable& link);

struct ChainSummary {
  double pcn_acceptance = 0.0;
  double rj_acceptance = 0.0;
  double loglik_mean = 0.0;
  double loglik_sd = 0.0;
  double iact_field_norm = 0.0;  // of ||F||_{L2} over stored states
  bool degenerate_variance = false;
  std::map<int, long> level_histogram;
  long solve_failures = 0;
};

ChainSummary chain_diagnostics(const ChainRecord& record);

// Initial-positive-sequence IACT estimator; flags (not throws) on a
// degenerate series.
double iact_initial_positive(std::span<const double> series, bool* degenerate = nullptr);

// Dump: <prefix>_trace.csv (iter,loglik,accepted,J,beta), <prefix>_states.csv
// (state,iter,v0..vK), <prefix>_summary.json.
void write_chain_dump(const ChainRecord& record, const std::string& prefix);
std::vector<std::vector<double>> read_chain_states_csv(const std::string& path);

}  // namespace divlab
