#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "divlab/grid.hpp"
#include "divlab/pde.hpp"

namespace divlab {

// N point observations Y_i = u(X_i) + sigma W_i at uniform design points.
struct Dataset {
  int dim = 1;
  std::vector<Point> points;
  std::vector<double> y;
  double sigma = 0.05;
  std::uint64_t seed = 0;
  std::string truth_id;

  int size() const { return static_cast<int>(points.size()); }
};

void validate(const Dataset& data);

Dataset generate_dataset(const GridField& truth_latent, const LinkTable& link,
                         const SourceTerm& src, const SolverConfig& cfg, int n_obs, double sigma,
                         std::uint64_t seed, const std::string& truth_id = "truth");

// Joint log-likelihood, additive constant dropped:
// -(1/(2 sigma^2)) sum (y_i - u(X_i))^2.
double log_likelihood_from_predictions(std::span<const double> predictions, const Dataset& data);
double log_likelihood(const GridField& latent, const Dataset& data, const LinkTable& link,
                      const SourceTerm& src, const SolverConfig& cfg = {});

// Per-observation KL divergence between the data laws at F0 and F:
// (1/(2 sigma^2)) ||u0 - u||_{L2}^2 by grid quadrature (the proof's constant).
double kl_divergence_from_solutions(const GridField& u0, const GridField& u, double sigma);
double kl_divergence(const GridField& latent0, const GridField& latent, const LinkTable& link,
                     const SourceTerm& src, const SolverConfig& cfg, double sigma);

// Hellinger distance via the affinity identity
// h^2 = 2 - 2 E exp(-(u0 - u)^2 / (8 sigma^2)).
double hellinger_from_solutions(const GridField& u0, const GridField& u, double sigma);
double hellinger_distance(const GridField& latent0, const GridField& latent, const LinkTable& link,
                          const SourceTerm& src, const SolverConfig& cfg, double sigma);

// Plug-in noise scale: sample standard deviation of the Y_i.
double estimate_noise_sigma(std::span<const double> y);

// CSV `x[,y],obs` plus JSON sidecar {N, sigma, seed, truth_id}.
void write_dataset_csv(const Dataset& data, const std::string& csv_path,
                       const std::string& sidecar_path);
Dataset read_dataset_csv(const std::string& csv_path, const std::string& sidecar_path);

}  // namespace divlab
