#pragma once

#include <span>
#include <vector>

#include "divlab/grid.hpp"
#include "divlab/link.hpp"

namespace divlab {

enum class LinearSolver {
  automatic,   // factorization up to the documented size cutoffs, then CG
  factorize,   // banded Cholesky of the SPD system
  cg,          // Jacobi-preconditioned conjugate gradient
};

struct SolverConfig {
  LinearSolver method = LinearSolver::automatic;
  double cg_tol = 1e-10;
  int cg_max_iter = 20000;
  bool oracle_check = false;  // d=1 only: cross-check against the closed form
};

// Source term g with an optional positivity certificate (inf g >= g_min > 0),
// the hypothesis under which the stability estimate applies.
struct SourceTerm {
  GridField g;
  bool strictly_positive = false;
  double g_min = 0.0;
};

SourceTerm make_constant_source(const DomainSpec& spec, double value);
SourceTerm make_source(GridField g);

// 1D oracle: u(x) = int_0^x (G1(s) + c)/f(s) ds with G1(s) = int_0^s g and c
// fixed by u(1) = 0; all integrals by trapezoid on the grid. Independent of
// the finite-difference path.
GridField solve_1d_closed_form(const GridField& f, const GridField& g);

// Conservative flux-form finite differences, f at edge midpoints by
// arithmetic averaging, homogeneous Dirichlet rows eliminated. The assembled
// system is symmetric positive definite.
GridField solve_fd(const GridField& f, const GridField& g, const SolverConfig& cfg = {});

// Re-parametrized forward map: solve with conductivity Phi o F.
GridField forward_map(const GridField& latent, const LinkTable& link, const SourceTerm& src,
                      const SolverConfig& cfg = {});

std::vector<double> predict_at_design(const GridField& latent, const LinkTable& link,
                                      const SourceTerm& src, const SolverConfig& cfg,
                                      std::span<const Point> points);

}  // namespace divlab
