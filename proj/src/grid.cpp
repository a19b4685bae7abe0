#include "divlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace divlab {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Tolerated overshoot when classifying a query point as inside the closed domain.
constexpr double kBoundaryEps = 1e-12;

}  // namespace

void validate(const DomainSpec& spec) {
  if (spec.dim != 1 && spec.dim != 2)
    throw DomainViolation("DomainSpec: dim must be 1 or 2, got " + std::to_string(spec.dim));
  if (spec.n < 4 || !is_power_of_two(spec.n))
    throw InvalidResolution("DomainSpec: n must be a power of two >= 4, got " +
                            std::to_string(spec.n));
}

Grid build_grid(const DomainSpec& spec) {
  validate(spec);
  Grid g;
  g.spec = spec;
  g.h = 1.0 / spec.n;
  g.nodes_per_axis = spec.n + 1;
  g.node_count = spec.dim == 1 ? g.nodes_per_axis : g.nodes_per_axis * g.nodes_per_axis;
  return g;
}

GridField::GridField(const DomainSpec& s, std::vector<double> v) : spec(s), values(std::move(v)) {
  validate(*this);
}

GridField::GridField(const DomainSpec& s, double fill) : spec(s) {
  Grid g = build_grid(s);
  values.assign(static_cast<std::size_t>(g.node_count), fill);
}

void validate(const GridField& field) {
  Grid g = build_grid(field.spec);
  if (field.values.size() != static_cast<std::size_t>(g.node_count))
    throw DomainViolation("GridField: value count " + std::to_string(field.values.size()) +
                          " does not match node count " + std::to_string(g.node_count));
  for (double v : field.values)
    if (!std::isfinite(v)) throw DomainViolation("GridField: non-finite value");
}

namespace {

// Trapezoid weight for node index i on an axis with m+1 nodes.
inline double trap_w(int i, int m) { return (i == 0 || i == m) ? 0.5 : 1.0; }

}  // namespace

double quadrature_inner(const GridField& a, const GridField& b) {
  if (!(a.spec == b.spec)) throw DomainViolation("quadrature_inner: mismatched grids");
  const int n = a.spec.n;
  const int m = n + 1;
  const double h = 1.0 / n;
  double acc = 0.0;
  if (a.spec.dim == 1) {
    for (int i = 0; i <= n; ++i) acc += trap_w(i, n) * a.values[i] * b.values[i];
    return acc * h;
  }
  for (int iy = 0; iy <= n; ++iy) {
    const double wy = trap_w(iy, n);
    for (int ix = 0; ix <= n; ++ix) {
      const std::size_t k = static_cast<std::size_t>(iy * m + ix);
      acc += wy * trap_w(ix, n) * a.values[k] * b.values[k];
    }
  }
  return acc * h * h;
}

double quadrature_l2(const GridField& field) { return std::sqrt(quadrature_inner(field, field)); }

double sobolev_seminorm(const GridField& field, int order) {
  if (order != 1 && order != 2)
    throw DomainViolation("sobolev_seminorm: order must be 1 or 2");
  const int n = field.spec.n;
  if (n < 2 * order) throw ResolutionTooCoarse("sobolev_seminorm: stencil does not fit");
  const int m = n + 1;
  const double h = 1.0 / n;
  const auto& v = field.values;
  double acc = 0.0;
  if (field.spec.dim == 1) {
    for (int i = 1; i < n; ++i) {
      double d = order == 1 ? (v[i + 1] - v[i - 1]) / (2.0 * h)
                            : (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
      acc += d * d;
    }
    return std::sqrt(acc * h);
  }
  auto at = [&](int ix, int iy) { return v[static_cast<std::size_t>(iy * m + ix)]; };
  for (int iy = 1; iy < n; ++iy) {
    for (int ix = 1; ix < n; ++ix) {
      if (order == 1) {
        double dx = (at(ix + 1, iy) - at(ix - 1, iy)) / (2.0 * h);
        double dy = (at(ix, iy + 1) - at(ix, iy - 1)) / (2.0 * h);
        acc += dx * dx + dy * dy;
      } else {
        double dxx = (at(ix + 1, iy) - 2.0 * at(ix, iy) + at(ix - 1, iy)) / (h * h);
        double dyy = (at(ix, iy + 1) - 2.0 * at(ix, iy) + at(ix, iy - 1)) / (h * h);
        double dxy = (at(ix + 1, iy + 1) - at(ix + 1, iy - 1) - at(ix - 1, iy + 1) +
                      at(ix - 1, iy - 1)) /
                     (4.0 * h * h);
        acc += dxx * dxx + dyy * dyy + dxy * dxy;
      }
    }
  }
  return std::sqrt(acc * h * h);
}

double c1_norm_discrete(const GridField& field) {
  const int n = field.spec.n;
  const int m = n + 1;
  const double h = 1.0 / n;
  const auto& v = field.values;
  double sup_v = 0.0;
  for (double x : v) sup_v = std::max(sup_v, std::abs(x));
  double sup_d = 0.0;
  if (field.spec.dim == 1) {
    for (int i = 1; i < n; ++i)
      sup_d = std::max(sup_d, std::abs((v[i + 1] - v[i - 1]) / (2.0 * h)));
  } else {
    auto at = [&](int ix, int iy) { return v[static_cast<std::size_t>(iy * m + ix)]; };
    for (int iy = 1; iy < n; ++iy)
      for (int ix = 1; ix < n; ++ix) {
        sup_d = std::max(sup_d, std::abs((at(ix + 1, iy) - at(ix - 1, iy)) / (2.0 * h)));
        sup_d = std::max(sup_d, std::abs((at(ix, iy + 1) - at(ix, iy - 1)) / (2.0 * h)));
      }
  }
  return sup_v + sup_d;
}

double sobolev_norm_h2(const GridField& field) {
  double l2 = quadrature_l2(field);
  double s1 = sobolev_seminorm(field, 1);
  double s2 = sobolev_seminorm(field, 2);
  return std::sqrt(l2 * l2 + s1 * s1 + s2 * s2);
}

double eval_at_point(const GridField& field, const Point& p) {
  const int n = field.spec.n;
  const int m = n + 1;
  const auto& v = field.values;
  auto locate = [&](double x) -> std::pair<int, double> {
    if (x < -kBoundaryEps || x > 1.0 + kBoundaryEps)
      throw PointOutsideDomain("eval_at_points: coordinate " + std::to_string(x) +
                               " outside [0,1]");
    double clamped = std::clamp(x, 0.0, 1.0);
    double s = clamped * n;
    int i = std::min(static_cast<int>(s), n - 1);
    return {i, s - i};
  };
  if (field.spec.dim == 1) {
    auto [i, t] = locate(p[0]);
    return (1.0 - t) * v[i] + t * v[i + 1];
  }
  auto [ix, tx] = locate(p[0]);
  auto [iy, ty] = locate(p[1]);
  auto at = [&](int a, int b) { return v[static_cast<std::size_t>(b * m + a)]; };
  return (1.0 - tx) * (1.0 - ty) * at(ix, iy) + tx * (1.0 - ty) * at(ix + 1, iy) +
         (1.0 - tx) * ty * at(ix, iy + 1) + tx * ty * at(ix + 1, iy + 1);
}

std::vector<double> eval_at_points(const GridField& field, std::span<const Point> points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const Point& p : points) out.push_back(eval_at_point(field, p));
  return out;
}

double sup_norm(const GridField& field) {
  double s = 0.0;
  for (double v : field.values) s = std::max(s, std::abs(v));
  return s;
}

double min_value(const GridField& field) {
  double s = std::numeric_limits<double>::infinity();
  for (double v : field.values) s = std::min(s, v);
  return s;
}

GridField operator+(const GridField& a, const GridField& b) {
  if (!(a.spec == b.spec)) throw DomainViolation("GridField +: mismatched grids");
  std::vector<double> v(a.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values[i] + b.values[i];
  return GridField(a.spec, std::move(v));
}

GridField operator-(const GridField& a, const GridField& b) {
  if (!(a.spec == b.spec)) throw DomainViolation("GridField -: mismatched grids");
  std::vector<double> v(a.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values[i] - b.values[i];
  return GridField(a.spec, std::move(v));
}

GridField operator*(double c, const GridField& a) {
  std::vector<double> v(a.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = c * a.values[i];
  return GridField(a.spec, std::move(v));
}

GridField pointwise_multiply(const GridField& a, const GridField& b) {
  if (!(a.spec == b.spec)) throw DomainViolation("pointwise_multiply: mismatched grids");
  std::vector<double> v(a.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values[i] * b.values[i];
  return GridField(a.spec, std::move(v));
}

void write_field_csv(const GridField& field, std::ostream& os) {
  Grid g = build_grid(field.spec);
  os.precision(17);
  if (field.spec.dim == 1) {
    os << "x,value\n";
    for (int i = 0; i < g.node_count; ++i) os << g.coord(i) << ',' << field.values[i] << '\n';
  } else {
    os << "x,y,value\n";
    for (int iy = 0; iy < g.nodes_per_axis; ++iy)
      for (int ix = 0; ix < g.nodes_per_axis; ++ix)
        os << g.coord(ix) << ',' << g.coord(iy) << ','
           << field.values[static_cast<std::size_t>(g.flat(ix, iy))] << '\n';
  }
}

void write_field_csv(const GridField& field, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_field_csv(field, os);
}

GridField read_field_csv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw IoError("field CSV: empty stream");
  int dim = header.find("x,y,") != std::string::npos ? 2 : 1;
  std::vector<double> values;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::size_t pos = line.rfind(',');
    if (pos == std::string::npos) throw IoError("field CSV: malformed row: " + line);
    values.push_back(std::stod(line.substr(pos + 1)));
  }
  // Infer n from the node count.
  std::size_t count = values.size();
  int nodes = dim == 1 ? static_cast<int>(count)
                       : static_cast<int>(std::lround(std::sqrt(static_cast<double>(count))));
  DomainSpec spec{dim, nodes - 1};
  return GridField(spec, std::move(values));
}

GridField read_field_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  return read_field_csv(is);
}

GridField refine_to(const GridField& field, const DomainSpec& fine) {
  if (fine.dim != field.spec.dim) throw DomainViolation("refine_to: dimension mismatch");
  if (fine.n % field.spec.n != 0) throw DomainViolation("refine_to: grids not nested");
  Grid g = build_grid(fine);
  std::vector<double> v(static_cast<std::size_t>(g.node_count));
  if (fine.dim == 1) {
    for (int i = 0; i < g.node_count; ++i) v[i] = eval_at_point(field, {g.coord(i), 0.0});
  } else {
    for (int iy = 0; iy < g.nodes_per_axis; ++iy)
      for (int ix = 0; ix < g.nodes_per_axis; ++ix)
        v[static_cast<std::size_t>(g.flat(ix, iy))] =
            eval_at_point(field, {g.coord(ix), g.coord(iy)});
  }
  return GridField(fine, std::move(v));
}

}  // namespace divlab
