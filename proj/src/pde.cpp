#include "divlab/pde.hpp"

#include <algorithm>
#include <cmath>

#include "divlab/linalg.hpp"

namespace divlab {

namespace {

void require_positive(const GridField& f) {
  if (!(min_value(f) > 0.0))
    throw NonPositiveConductivity("solver requires min(f) > 0 at all nodes");
}

// Assembles and solves the negated system (-div(f grad u) = -g), which is an
// SPD M-matrix for f > 0.
GridField solve_1d_fd(const GridField& f, const GridField& g, const SolverConfig& cfg) {
  const int n = f.spec.n;
  const double h = 1.0 / n;
  const int m = n - 1;  // interior unknowns
  const auto& fv = f.values;
  std::vector<double> edge(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) edge[i] = 0.5 * (fv[i] + fv[i + 1]);

  std::vector<double> rhs(static_cast<std::size_t>(m));
  for (int i = 1; i <= m; ++i) rhs[i - 1] = -g.values[i] * h * h;

  bool use_factor = cfg.method == LinearSolver::factorize ||
                    (cfg.method == LinearSolver::automatic && n <= 512);
  std::vector<double> u_int;
  if (use_factor) {
    BandMatrix a(m, 1);
    for (int i = 0; i < m; ++i) {
      a.at(i, i) = edge[i] + edge[i + 1];
      if (i > 0) a.at(i, i - 1) = -edge[i];
    }
    a.factorize();
    u_int = a.solve(rhs);
  } else {
    std::vector<double> inv_diag(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) inv_diag[i] = 1.0 / (edge[i] + edge[i + 1]);
    auto apply = [&](std::span<const double> x, std::span<double> y) {
      for (int i = 0; i < m; ++i) {
        double v = (edge[i] + edge[i + 1]) * x[i];
        if (i > 0) v -= edge[i] * x[i - 1];
        if (i + 1 < m) v -= edge[i + 1] * x[i + 1];
        y[i] = v;
      }
    };
    u_int = cg_solve(apply, rhs, inv_diag, cfg.cg_tol, cfg.cg_max_iter).x;
  }
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0);
  for (int i = 1; i <= m; ++i) u[i] = u_int[i - 1];
  return GridField(f.spec, std::move(u));
}

GridField solve_2d_fd(const GridField& f, const GridField& g, const SolverConfig& cfg) {
  const int n = f.spec.n;
  const double h = 1.0 / n;
  const int nodes = n + 1;
  const int m = n - 1;                 // interior nodes per axis
  const int unknowns = m * m;
  const auto& fv = f.values;
  auto fat = [&](int ix, int iy) { return fv[static_cast<std::size_t>(iy * nodes + ix)]; };
  auto interior = [&](int ix, int iy) { return (iy - 1) * m + (ix - 1); };

  // Edge conductivities around interior node (ix, iy).
  auto fe = [&](int ix, int iy, int dx, int dy) {
    return 0.5 * (fat(ix, iy) + fat(ix + dx, iy + dy));
  };

  std::vector<double> rhs(static_cast<std::size_t>(unknowns));
  for (int iy = 1; iy <= m; ++iy)
    for (int ix = 1; ix <= m; ++ix)
      rhs[interior(ix, iy)] = -g.values[static_cast<std::size_t>(iy * nodes + ix)] * h * h;

  bool use_factor = cfg.method == LinearSolver::factorize ||
                    (cfg.method == LinearSolver::automatic && n <= 64);
  std::vector<double> u_int;
  if (use_factor) {
    BandMatrix a(unknowns, m);
    for (int iy = 1; iy <= m; ++iy) {
      for (int ix = 1; ix <= m; ++ix) {
        int row = interior(ix, iy);
        double fw = fe(ix, iy, -1, 0), fep = fe(ix, iy, 1, 0);
        double fs = fe(ix, iy, 0, -1), fn = fe(ix, iy, 0, 1);
        a.at(row, row) = fw + fep + fs + fn;
        if (ix > 1) a.at(row, row - 1) = -fw;
        if (iy > 1) a.at(row, row - m) = -fs;
      }
    }
    a.factorize();
    u_int = a.solve(rhs);
  } else {
    std::vector<double> inv_diag(static_cast<std::size_t>(unknowns));
    for (int iy = 1; iy <= m; ++iy)
      for (int ix = 1; ix <= m; ++ix)
        inv_diag[interior(ix, iy)] =
            1.0 / (fe(ix, iy, -1, 0) + fe(ix, iy, 1, 0) + fe(ix, iy, 0, -1) + fe(ix, iy, 0, 1));
    auto apply = [&](std::span<const double> x, std::span<double> y) {
      for (int iy = 1; iy <= m; ++iy) {
        for (int ix = 1; ix <= m; ++ix) {
          int row = interior(ix, iy);
          double fw = fe(ix, iy, -1, 0), fep = fe(ix, iy, 1, 0);
          double fs = fe(ix, iy, 0, -1), fn = fe(ix, iy, 0, 1);
          double v = (fw + fep + fs + fn) * x[row];
          if (ix > 1) v -= fw * x[row - 1];
          if (ix < m) v -= fep * x[row + 1];
          if (iy > 1) v -= fs * x[row - m];
          if (iy < m) v -= fn * x[row + m];
          y[row] = v;
        }
      }
    };
    u_int = cg_solve(apply, rhs, inv_diag, cfg.cg_tol, cfg.cg_max_iter).x;
  }
  std::vector<double> u(static_cast<std::size_t>(nodes) * nodes, 0.0);
  for (int iy = 1; iy <= m; ++iy)
    for (int ix = 1; ix <= m; ++ix)
      u[static_cast<std::size_t>(iy * nodes + ix)] = u_int[interior(ix, iy)];
  return GridField(f.spec, std::move(u));
}

}  // namespace

SourceTerm make_constant_source(const DomainSpec& spec, double value) {
  SourceTerm s{GridField(spec, value), value > 0.0, value > 0.0 ? value : 0.0};
  return s;
}

SourceTerm make_source(GridField g) {
  double gmin = min_value(g);
  return SourceTerm{std::move(g), gmin > 0.0, gmin > 0.0 ? gmin : 0.0};
}

GridField solve_1d_closed_form(const GridField& f, const GridField& g) {
  if (f.spec.dim != 1) throw DomainViolation("solve_1d_closed_form: 1D only");
  if (!(f.spec == g.spec)) throw DomainViolation("solve_1d_closed_form: mismatched grids");
  require_positive(f);
  const int n = f.spec.n;
  const double h = 1.0 / n;
  const auto& fv = f.values;
  const auto& gv = g.values;
  // G1(x_i) by cumulative trapezoid of g.
  std::vector<double> g1(static_cast<std::size_t>(n + 1), 0.0);
  for (int i = 1; i <= n; ++i) g1[i] = g1[i - 1] + 0.5 * h * (gv[i - 1] + gv[i]);
  // Cumulative trapezoids of G1/f and 1/f.
  std::vector<double> ig1f(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<double> iinvf(static_cast<std::size_t>(n + 1), 0.0);
  for (int i = 1; i <= n; ++i) {
    ig1f[i] = ig1f[i - 1] + 0.5 * h * (g1[i - 1] / fv[i - 1] + g1[i] / fv[i]);
    iinvf[i] = iinvf[i - 1] + 0.5 * h * (1.0 / fv[i - 1] + 1.0 / fv[i]);
  }
  const double c = -ig1f[n] / iinvf[n];
  std::vector<double> u(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) u[i] = ig1f[i] + c * iinvf[i];
  u[0] = 0.0;
  u[n] = 0.0;
  return GridField(f.spec, std::move(u));
}

GridField solve_fd(const GridField& f, const GridField& g, const SolverConfig& cfg) {
  if (!(f.spec == g.spec)) throw DomainViolation("solve_fd: mismatched grids");
  require_positive(f);
  return f.spec.dim == 1 ? solve_1d_fd(f, g, cfg) : solve_2d_fd(f, g, cfg);
}

GridField forward_map(const GridField& latent, const LinkTable& link, const SourceTerm& src,
                      const SolverConfig& cfg) {
  return solve_fd(apply_link(link, latent), src.g, cfg);
}

std::vector<double> predict_at_design(const GridField& latent, const LinkTable& link,
                                      const SourceTerm& src, const SolverConfig& cfg,
                                      std::span<const Point> points) {
  if (points.empty()) return {};
  GridField u = forward_map(latent, link, src, cfg);
  return eval_at_points(u, points);
}

}  // namespace divlab
