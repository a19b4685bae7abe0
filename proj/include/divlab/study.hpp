#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "divlab/config.hpp"
#include "divlab/exponents.hpp"
#include "divlab/mcmc.hpp"

namespace divlab {

// One rate study: for each N in the grid and each replicate, simulate data
// from the truth, run a chain, and measure posterior-mean errors against the
// truth on the fine metrics grid.
struct ExperimentPlan {
  PriorVariant prior_variant = PriorVariant::rescaled_matern;
  double alpha = 3.0;
  double beta_reg = 2.0;  // C^beta regularity index entering lambda
  double alpha0 = 3.0;    // truth smoothness for the hierarchical exponents
  double tail_a = 2.0;    // link left-tail exponent
  int dim = 1;
  double sigma = 0.05;
  std::vector<long> n_grid{256, 512, 1024, 2048, 4096};
  int replicates = 3;
  // Truth families: "bump" is the symmetric mollifier bump; "tilted_bump" is
  // a plateau profile over K with a linear tilt, amp * W(x) * (1 + tilt * t),
  // t = (x - 1/2)/0.4. A bump centered at 0.5 sits on the stagnation point of
  // the g = const flux (2x + c vanishes there for symmetric f), which makes
  // it nearly invisible to the data; the tilted profile loads the directions
  // the design actually informs.
  std::string truth = "bump";
  double truth_amplitude = 1.0;
  double truth_center = 0.5;  // bump only
  double truth_radius = 0.2;  // bump only
  double truth_tilt = 1.2;    // tilted_bump only
  double truth_taper = 0.16;  // tilted_bump edge width inside K
  bool warm_start = false;    // Gauss-Newton chain initialization per cell
  double k_min = 0.1;
  int chain_n = 256;    // inference grid
  int metrics_n = 512;  // fine grid for all error norms
  double source_constant = 2.0;
  ChainConfig chain;
  SolverConfig solver;
  PriorSpec prior;  // variant/alpha/sample_size are overridden per cell
  std::uint64_t master_seed = 20240801;
  int threads = 0;  // 0 = hardware concurrency
  // When set, every cell writes its dataset and chain dump here, so all
  // report numbers can be recomputed offline.
  std::string cell_dump_dir;
};

void validate(const ExperimentPlan& plan);

// The smooth bump truth scaled to the requested sup norm (tensorized in 2D).
GridField make_truth_field(const ExperimentPlan& plan, const DomainSpec& spec);

extern const std::vector<std::string> kCellMetrics;  // fixed metric names

struct CellResult {
  long n_obs = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";  // "ok" | "failed"
  std::string error;
  std::map<std::string, double> metrics;
  double pcn_acceptance = 0.0;
  double final_beta = 0.0;
};

struct RateReport {
  std::string version;
  ExperimentPlan plan;
  RateExponents theory;
  std::vector<std::string> notes;  // e.g. hierarchical runs outside alpha* hypotheses
  std::vector<CellResult> cells;
  // metric -> (N -> median over replicates)
  std::map<std::string, std::map<long, double>> medians;
  // present only when the N grid has >= 3 entries (absent, not zero)
  std::map<std::string, SlopeFit> slopes;
  bool all_ok = true;
};

RateReport run_rate_study(const ExperimentPlan& plan);

struct StabilityEntry {
  double ratio = 0.0;
  bool skipped = false;  // f == f0 (degenerate 0/0)
};

// Per-sample ratios ||f - f0|| / (||f||_C1 ||G(f) - G(f0)||_H2), the
// conditioning monitor derived from the stability estimate.
std::vector<StabilityEntry> stability_diagnostic(const std::vector<GridField>& f_samples,
                                                 const GridField& f0, const SourceTerm& src,
                                                 const SolverConfig& cfg);

// report.json + rates.csv (`N,replicate,metric,value`).
void emit_report(const RateReport& report, const std::string& out_dir);
RateReport read_report(const std::string& json_path);
std::string report_to_json_string(const RateReport& report);

// Plan parsing from the sectioned config format (see README).
ExperimentPlan plan_from_config(const Config& cfg);

}  // namespace divlab
