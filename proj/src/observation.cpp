#include "divlab/observation.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "divlab/rng.hpp"
#include "json.hpp"

namespace divlab {

void validate(const Dataset& data) {
  if (data.points.size() != data.y.size())
    throw DomainViolation("Dataset: X/Y length mismatch");
  if (data.sigma < 0.0) throw DomainViolation("Dataset: sigma must be >= 0");
  for (const auto& p : data.points) {
    if (!(p[0] > 0.0 && p[0] < 1.0) || (data.dim == 2 && !(p[1] > 0.0 && p[1] < 1.0)))
      throw PointOutsideDomain("Dataset: design point outside the open domain");
  }
}

Dataset generate_dataset(const GridField& truth_latent, const LinkTable& link,
                         const SourceTerm& src, const SolverConfig& cfg, int n_obs, double sigma,
                         std::uint64_t seed, const std::string& truth_id) {
  if (n_obs < 1) throw DomainViolation("generate_dataset: N must be >= 1");
  if (sigma < 0.0) throw DomainViolation("generate_dataset: sigma must be >= 0");
  Dataset d;
  d.dim = truth_latent.spec.dim;
  d.sigma = sigma;
  d.seed = seed;
  d.truth_id = truth_id;
  Rng rng(seed);
  d.points.reserve(static_cast<std::size_t>(n_obs));
  // Design point and noise variable are drawn together per observation, so
  // datasets with the same seed are nested across N (common random numbers).
  std::vector<double> noise(static_cast<std::size_t>(n_obs));
  for (int i = 0; i < n_obs; ++i) {
    Point p{rng.uniform(), d.dim == 2 ? rng.uniform() : 0.0};
    d.points.push_back(p);
    noise[static_cast<std::size_t>(i)] = rng.normal();
  }
  GridField u = forward_map(truth_latent, link, src, cfg);
  d.y = eval_at_points(u, d.points);
  if (sigma > 0.0)
    for (int i = 0; i < n_obs; ++i) d.y[static_cast<std::size_t>(i)] += sigma * noise[static_cast<std::size_t>(i)];
  return d;
}

double log_likelihood_from_predictions(std::span<const double> predictions, const Dataset& data) {
  if (!(data.sigma > 0.0)) throw DomainViolation("log_likelihood: sigma must be > 0");
  if (predictions.size() != data.y.size())
    throw DomainViolation("log_likelihood: prediction count mismatch");
  double ss = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    double r = data.y[i] - predictions[i];
    ss += r * r;
  }
  return -ss / (2.0 * data.sigma * data.sigma);
}

double log_likelihood(const GridField& latent, const Dataset& data, const LinkTable& link,
                      const SourceTerm& src, const SolverConfig& cfg) {
  auto pred = predict_at_design(latent, link, src, cfg, data.points);
  return log_likelihood_from_predictions(pred, data);
}

double kl_divergence_from_solutions(const GridField& u0, const GridField& u, double sigma) {
  if (!(sigma > 0.0)) throw DomainViolation("kl_divergence: sigma must be > 0");
  double d = quadrature_l2(u0 - u);
  return d * d / (2.0 * sigma * sigma);
}

double kl_divergence(const GridField& latent0, const GridField& latent, const LinkTable& link,
                     const SourceTerm& src, const SolverConfig& cfg, double sigma) {
  return kl_divergence_from_solutions(forward_map(latent0, link, src, cfg),
                                      forward_map(latent, link, src, cfg), sigma);
}

double hellinger_from_solutions(const GridField& u0, const GridField& u, double sigma) {
  if (!(sigma > 0.0)) throw DomainViolation("hellinger_distance: sigma must be > 0");
  GridField diff = u0 - u;
  const double c = 8.0 * sigma * sigma;
  std::vector<double> affinity(diff.values.size());
  for (std::size_t i = 0; i < affinity.size(); ++i)
    affinity[i] = std::exp(-diff.values[i] * diff.values[i] / c);
  GridField one(diff.spec, 1.0);
  double rho = quadrature_inner(GridField(diff.spec, std::move(affinity)), one);
  double h2 = std::max(0.0, 2.0 - 2.0 * rho);
  return std::sqrt(h2);
}

double hellinger_distance(const GridField& latent0, const GridField& latent, const LinkTable& link,
                          const SourceTerm& src, const SolverConfig& cfg, double sigma) {
  return hellinger_from_solutions(forward_map(latent0, link, src, cfg),
                                  forward_map(latent, link, src, cfg), sigma);
}

double estimate_noise_sigma(std::span<const double> y) {
  if (y.size() < 2) throw InsufficientPoints("estimate_noise_sigma: need >= 2 observations");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(y.size() - 1));
}

void write_dataset_csv(const Dataset& data, const std::string& csv_path,
                       const std::string& sidecar_path) {
  std::ofstream os(csv_path);
  if (!os) throw IoError("cannot open " + csv_path + " for writing");
  os.precision(17);
  os << (data.dim == 1 ? "x,obs\n" : "x,y,obs\n");
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    os << data.points[i][0];
    if (data.dim == 2) os << ',' << data.points[i][1];
    os << ',' << data.y[i] << '\n';
  }
  nlohmann::json side{{"N", data.size()},
                      {"sigma", data.sigma},
                      {"seed", data.seed},
                      {"truth_id", data.truth_id},
                      {"dim", data.dim}};
  std::ofstream js(sidecar_path);
  if (!js) throw IoError("cannot open " + sidecar_path + " for writing");
  js << side.dump(2) << '\n';
}

Dataset read_dataset_csv(const std::string& csv_path, const std::string& sidecar_path) {
  std::ifstream is(csv_path);
  if (!is) throw IoError("cannot open " + csv_path);
  std::ifstream js(sidecar_path);
  if (!js) throw IoError("cannot open " + sidecar_path);
  nlohmann::json side = nlohmann::json::parse(js);
  Dataset d;
  d.dim = side.at("dim").get<int>();
  d.sigma = side.at("sigma").get<double>();
  d.seed = side.at("seed").get<std::uint64_t>();
  d.truth_id = side.at("truth_id").get<std::string>();
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cols;
    while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
    if (static_cast<int>(cols.size()) != d.dim + 1)
      throw IoError("dataset CSV: wrong column count");
    d.points.push_back({cols[0], d.dim == 2 ? cols[1] : 0.0});
    d.y.push_back(cols.back());
  }
  validate(d);
  return d;
}

}  // namespace divlab
