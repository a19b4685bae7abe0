#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "divlab/errors.hpp"

namespace divlab {

// A point in the domain; coordinate 1 is ignored in 1D.
using Point = std::array<double, 2>;

// Unit interval (d=1) or unit square (d=2) with a dyadic grid of n cells per
// axis, spacing h = 1/n. Nodes include the boundary: (n+1)^d of them.
struct DomainSpec {
  int dim = 1;
  int n = 64;

  bool operator==(const DomainSpec&) const = default;
};

// Throws InvalidResolution / DomainViolation if the spec is unusable.
void validate(const DomainSpec& spec);

struct Grid {
  DomainSpec spec;
  double h = 0.0;
  int nodes_per_axis = 0;
  int node_count = 0;

  // Node coordinate along one axis.
  double coord(int i) const { return static_cast<double>(i) * h; }
  // Flat index: x fastest (raster order), y slowest in 2D.
  int flat(int ix, int iy = 0) const { return iy * nodes_per_axis + ix; }
  Point node(int idx) const {
    if (spec.dim == 1) return {coord(idx), 0.0};
    return {coord(idx % nodes_per_axis), coord(idx / nodes_per_axis)};
  }
};

Grid build_grid(const DomainSpec& spec);

// Real-valued function sampled at every grid node. Value ordering matches
// Grid::flat. Immutable by convention once constructed.
struct GridField {
  DomainSpec spec;
  std::vector<double> values;

  GridField() = default;
  GridField(const DomainSpec& s, std::vector<double> v);
  GridField(const DomainSpec& s, double fill);

  int nodes_per_axis() const { return spec.n + 1; }
  double h() const { return 1.0 / spec.n; }
  double operator[](std::size_t i) const { return values[i]; }
};

// Checks invariants (node count, finiteness); throws DomainViolation.
void validate(const GridField& field);

// Builds a field by sampling fn at nodes; Fn is (double)->double in 1D,
// (double,double)->double in 2D.
template <class Fn>
GridField sample_field_1d(const DomainSpec& spec, Fn&& fn) {
  Grid g = build_grid(spec);
  std::vector<double> v(static_cast<std::size_t>(g.node_count));
  for (int i = 0; i < g.node_count; ++i) v[static_cast<std::size_t>(i)] = fn(g.coord(i));
  return GridField(spec, std::move(v));
}

template <class Fn>
GridField sample_field_2d(const DomainSpec& spec, Fn&& fn) {
  Grid g = build_grid(spec);
  std::vector<double> v(static_cast<std::size_t>(g.node_count));
  for (int iy = 0; iy < g.nodes_per_axis; ++iy)
    for (int ix = 0; ix < g.nodes_per_axis; ++ix)
      v[static_cast<std::size_t>(g.flat(ix, iy))] = fn(g.coord(ix), g.coord(iy));
  return GridField(spec, std::move(v));
}

// L2(O) norm by trapezoid quadrature (tensorized in 2D); exact for
// piecewise-linear fields.
double quadrature_l2(const GridField& field);

// L2 inner product with the same trapezoid weights.
double quadrature_inner(const GridField& a, const GridField& b);

// L2 norm of order-th central finite differences (order in {1,2}); in 2D the
// sum runs over all multi-indices of that order.
double sobolev_seminorm(const GridField& field, int order);

// sup|v| + sup of first central differences; the C^1 surrogate used by the
// stability diagnostic.
double c1_norm_discrete(const GridField& field);

// Full discrete H^2 norm: sqrt(||v||^2 + |v|_1^2 + |v|_2^2).
double sobolev_norm_h2(const GridField& field);

// Piecewise-linear (1D) / bilinear (2D) interpolation; exact on affine fields.
std::vector<double> eval_at_points(const GridField& field, std::span<const Point> points);
double eval_at_point(const GridField& field, const Point& p);

double sup_norm(const GridField& field);
double min_value(const GridField& field);

// Pointwise arithmetic; operands must share a spec.
GridField operator+(const GridField& a, const GridField& b);
GridField operator-(const GridField& a, const GridField& b);
GridField operator*(double c, const GridField& a);
GridField pointwise_multiply(const GridField& a, const GridField& b);

// CSV serialization, header `x[,y],value`, one row per node in raster order.
void write_field_csv(const GridField& field, std::ostream& os);
void write_field_csv(const GridField& field, const std::string& path);
GridField read_field_csv(std::istream& is);
GridField read_field_csv(const std::string& path);

// Linear interpolation of a field onto a finer dyadic grid (same dim,
// fine.n a multiple of coarse n). Exact at shared nodes.
GridField refine_to(const GridField& field, const DomainSpec& fine);

}  // namespace divlab
