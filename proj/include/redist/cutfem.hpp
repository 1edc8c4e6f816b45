#pragma once

// Unfitted interface treatment: cell classification against a P1 level set,
// piecewise-linear reconstruction of its zero set, mapped surface quadrature
// and Nitsche terms for a homogeneous Dirichlet condition on that surface.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "redist/fem.hpp"
#include "redist/mesh.hpp"
#include "redist/sparse.hpp"

namespace redist {

enum class CellTag { inside, outside, cut };

/// Relative tolerance below which vertex values are snapped to +snap_tol.
inline constexpr double kSnapRelTol = 1e-12;

/// Vertex values with near-zero entries moved to a small positive value, so
/// that no vertex lies exactly on the reconstructed interface.
struct SnappedValues {
  std::vector<double> values;
  double snap_tol = 0.0;
};

inline SnappedValues snap_values(std::span<const double> phi0) {
  double inf = 0.0;
  for (double v : phi0) inf = std::max(inf, std::abs(v));
  SnappedValues s;
  s.snap_tol = inf > 0.0 ? kSnapRelTol * inf : kSnapRelTol;
  s.values.assign(phi0.begin(), phi0.end());
  for (double& v : s.values)
    if (std::abs(v) < s.snap_tol) v = s.snap_tol;
  return s;
}

/// Tags each cell inside (all vertices negative), outside (all positive) or cut.
template <int Dim>
std::vector<CellTag> classify_cells(const Mesh<Dim>& mesh, std::span<const double> phi0) {
  if (phi0.size() != mesh.num_vertices()) throw std::invalid_argument("field size mismatch");
  const auto snapped = snap_values(phi0);
  std::vector<CellTag> tags(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    bool neg = false, pos = false;
    for (Index v : mesh.cells()[c]) (snapped.values[v] < 0.0 ? neg : pos) = true;
    tags[c] = (neg && pos) ? CellTag::cut : (neg ? CellTag::inside : CellTag::outside);
  }
  return tags;
}

template <int Dim>
std::vector<CellTag> classify_cells(const FieldP1<Dim>& phi0) {
  return classify_cells(phi0.mesh(), phi0.values());
}

/// One simplicial piece of the reconstructed interface inside a cut cell.
template <int Dim>
struct InterfaceFacet {
  Index cell = 0;
  std::array<Point<Dim>, Dim> vertices{};
  double measure = 0.0;
  /// Unit normal pointing from the negative to the positive side.
  Vec<Dim> normal{};
  std::vector<Point<Dim>> qpoints;
  std::vector<double> qweights;
};

template <int Dim>
struct CutCell {
  Index cell = 0;
  /// Edge intersection points.
  std::vector<Point<Dim>> points;
  Vec<Dim> normal{};
};

template <int Dim>
struct CutInterface {
  std::vector<CutCell<Dim>> cut_cells;
  std::vector<InterfaceFacet<Dim>> facets;
  double snap_tol = 0.0;
  int quadrature_degree = 0;

  [[nodiscard]] bool empty() const { return facets.empty(); }
  [[nodiscard]] double measure() const {
    double s = 0.0;
    for (const auto& f : facets) s += f.measure;
    return s;
  }
  /// Sum over all quadrature points of w * f(p).
  template <typename F>
  [[nodiscard]] double integrate(F&& f) const {
    double s = 0.0;
    for (const auto& fc : facets)
      for (std::size_t q = 0; q < fc.qpoints.size(); ++q) s += fc.qweights[q] * f(fc, fc.qpoints[q]);
    return s;
  }
};

namespace detail {

template <int Dim>
Vec<Dim> cell_gradient(const Mesh<Dim>& mesh, std::size_t c, std::span<const double> phi) {
  const auto& g = mesh.geometry(c);
  Vec<Dim> s{};
  for (int i = 0; i <= Dim; ++i) s = axpy<Dim>(phi[g.vertex_ids[i]], g.grad_barycentric[i], s);
  return s;
}

template <int Dim>
Point<Dim> edge_root(const Point<Dim>& xa, const Point<Dim>& xb, double fa, double fb) {
  const double t = fa / (fa - fb);
  Point<Dim> p{};
  for (int k = 0; k < Dim; ++k) p[k] = xa[k] + t * (xb[k] - xa[k]);
  return p;
}

// Reference rules: barycentric points on a (Dim-1)-simplex with weights
// summing to one, exact up to `exactness`.
struct RefRule {
  int exactness;
  std::vector<std::array<double, 3>> bary;
  std::vector<double> weights;
};

inline RefRule segment_rule(int degree) {
  if (degree <= 1) return {1, {{0.5, 0.5, 0.0}}, {1.0}};
  if (degree <= 3) {
    const double a = 0.5 - 0.5 / std::sqrt(3.0);
    return {3, {{a, 1.0 - a, 0.0}, {1.0 - a, a, 0.0}}, {0.5, 0.5}};
  }
  if (degree <= 5) {
    const double a = 0.5 - 0.5 * std::sqrt(0.6);
    return {5, {{a, 1.0 - a, 0.0}, {0.5, 0.5, 0.0}, {1.0 - a, a, 0.0}}, {5.0 / 18, 8.0 / 18, 5.0 / 18}};
  }
  throw std::invalid_argument("unsupported quadrature degree " + std::to_string(degree));
}

inline RefRule triangle_rule(int degree) {
  auto orbit3 = [](RefRule& r, double a, double w) {
    const double b = 1.0 - 2.0 * a;
    r.bary.push_back({a, a, b});
    r.bary.push_back({a, b, a});
    r.bary.push_back({b, a, a});
    for (int i = 0; i < 3; ++i) r.weights.push_back(w);
  };
  RefRule r{};
  if (degree <= 1) {
    r.exactness = 1;
    r.bary.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
    r.weights.push_back(1.0);
  } else if (degree <= 2) {
    r.exactness = 2;
    orbit3(r, 1.0 / 6, 1.0 / 3);
  } else if (degree <= 4) {
    r.exactness = 4;
    orbit3(r, 0.445948490915965, 0.223381589678011);
    orbit3(r, 0.091576213509771, 0.109951743655322);
  } else if (degree <= 5) {
    r.exactness = 5;
    r.bary.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
    r.weights.push_back(0.225);
    orbit3(r, 0.470142064105115, 0.132394152788506);
    orbit3(r, 0.101286507323456, 0.125939180544827);
  } else {
    throw std::invalid_argument("unsupported quadrature degree " + std::to_string(degree));
  }
  return r;
}

template <int Dim>
void push_facet(CutInterface<Dim>& out, Index cell, const std::array<Point<Dim>, Dim>& x,
                const Vec<Dim>& normal) {
  InterfaceFacet<Dim> f;
  f.cell = cell;
  f.vertices = x;
  f.measure = facet_measure<Dim>(x);
  f.normal = normal;
  out.facets.push_back(std::move(f));
}

}  // namespace detail

/// Unit normal of the P1 level set on a cell, pointing towards increasing values.
template <int Dim>
Vec<Dim> interface_normal(const Mesh<Dim>& mesh, std::size_t cell, std::span<const double> phi0) {
  const auto g = detail::cell_gradient(mesh, cell, phi0);
  const double n = detail::norm<Dim>(g);
  if (!(n > 0.0)) throw std::invalid_argument("zero level-set gradient on cut cell " + std::to_string(cell));
  return detail::scale<Dim>(1.0 / n, g);
}

/// Fills quadrature points and weights on every facet by mapping a reference
/// rule of the requested degree; weights sum to the facet measure.
template <int Dim>
void cut_quadrature(CutInterface<Dim>& iface, int degree) {
  if (degree < 1) throw std::invalid_argument("quadrature degree must be >= 1");
  detail::RefRule rule{1, {{1.0, 0.0, 0.0}}, {1.0}};
  if constexpr (Dim == 2) rule = detail::segment_rule(degree);
  if constexpr (Dim == 3) rule = detail::triangle_rule(degree);
  if constexpr (Dim == 1) {
    if (degree > 5) throw std::invalid_argument("unsupported quadrature degree " + std::to_string(degree));
  }
  iface.quadrature_degree = degree;
  for (auto& f : iface.facets) {
    f.qpoints.clear();
    f.qweights.clear();
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      Point<Dim> p{};
      for (int i = 0; i < Dim; ++i)
        for (int k = 0; k < Dim; ++k) p[k] += rule.bary[q][i] * f.vertices[i][k];
      f.qpoints.push_back(p);
      f.qweights.push_back(rule.weights[q] * f.measure);
    }
  }
}

/// Piecewise-linear zero set of the P1 interpolant phi0, one or two facets per cut cell.
template <int Dim>
CutInterface<Dim> reconstruct_interface(const Mesh<Dim>& mesh, std::span<const double> phi0) {
  if (phi0.size() != mesh.num_vertices()) throw std::invalid_argument("field size mismatch");
  for (double v : phi0)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite level-set value");
  const auto snapped = snap_values(phi0);
  const auto& f = snapped.values;
  CutInterface<Dim> out;
  out.snap_tol = snapped.snap_tol;

  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& cell = mesh.cells()[c];
    std::array<int, Dim + 1> neg{}, pos{};
    int nn = 0, np = 0;
    for (int i = 0; i <= Dim; ++i) (f[cell[i]] < 0.0 ? neg[nn++] : pos[np++]) = i;
    if (nn == 0 || np == 0) continue;

    const auto x = mesh.corners(c);
    auto root = [&](int a, int b) { return detail::edge_root<Dim>(x[a], x[b], f[cell[a]], f[cell[b]]); };
    CutCell<Dim> cc;
    cc.cell = static_cast<Index>(c);
    cc.normal = interface_normal(mesh, c, f);

    if constexpr (Dim == 1) {
      cc.points = {root(neg[0], pos[0])};
      detail::push_facet<1>(out, cc.cell, {cc.points[0]}, cc.normal);
    } else if constexpr (Dim == 2) {
      // One vertex is alone on its side; the other two edges from it are cut.
      const int lone = nn == 1 ? neg[0] : pos[0];
      const auto& others = nn == 1 ? pos : neg;
      cc.points = {root(lone, others[0]), root(lone, others[1])};
      detail::push_facet<2>(out, cc.cell, {cc.points[0], cc.points[1]}, cc.normal);
    } else {
      if (nn == 1 || np == 1) {
        const int lone = nn == 1 ? neg[0] : pos[0];
        const auto& others = nn == 1 ? pos : neg;
        cc.points = {root(lone, others[0]), root(lone, others[1]), root(lone, others[2])};
        detail::push_facet<3>(out, cc.cell, {cc.points[0], cc.points[1], cc.points[2]}, cc.normal);
      } else {
        // Two against two: the cut is a quadrilateral with cyclic corners
        // on edges (a,c), (a,d), (b,d), (b,c); split on the shorter diagonal.
        const int a = neg[0], b = neg[1], cpos = pos[0], d = pos[1];
        cc.points = {root(a, cpos), root(a, d), root(b, d), root(b, cpos)};
        const auto& q = cc.points;
        const double d02 = detail::norm<3>(detail::sub<3>(q[0], q[2]));
        const double d13 = detail::norm<3>(detail::sub<3>(q[1], q[3]));
        if (d02 <= d13) {
          detail::push_facet<3>(out, cc.cell, {q[0], q[1], q[2]}, cc.normal);
          detail::push_facet<3>(out, cc.cell, {q[0], q[2], q[3]}, cc.normal);
        } else {
          detail::push_facet<3>(out, cc.cell, {q[1], q[2], q[3]}, cc.normal);
          detail::push_facet<3>(out, cc.cell, {q[1], q[3], q[0]}, cc.normal);
        }
      }
    }
    out.cut_cells.push_back(std::move(cc));
  }
  return out;
}

/// Reconstruction followed by quadrature of the given degree.
template <int Dim>
CutInterface<Dim> build_interface(const Mesh<Dim>& mesh, std::span<const double> phi0, int degree = 2) {
  auto iface = reconstruct_interface(mesh, phi0);
  cut_quadrature(iface, degree);
  return iface;
}

/// Barycentric coordinates of p in a cell.
template <int Dim>
std::array<double, Dim + 1> barycentric(const Mesh<Dim>& mesh, std::size_t cell, const std::type_identity_t<Point<Dim>>& p) {
  const auto& g = mesh.geometry(cell);
  const auto d = detail::sub<Dim>(p, mesh.vertices()[g.vertex_ids[0]]);
  std::array<double, Dim + 1> lam{};
  for (int i = 0; i <= Dim; ++i) lam[i] = (i == 0 ? 1.0 : 0.0) + detail::dot<Dim>(g.grad_barycentric[i], d);
  return lam;
}

/// Value of a P1 field at a point of a given cell.
template <int Dim>
double evaluate_in_cell(const Mesh<Dim>& mesh, std::size_t cell, std::span<const double> phi,
                        const std::type_identity_t<Point<Dim>>& p) {
  const auto lam = barycentric(mesh, cell, p);
  const auto& ids = mesh.geometry(cell).vertex_ids;
  double s = 0.0;
  for (int i = 0; i <= Dim; ++i) s += lam[i] * phi[ids[i]];
  return s;
}

/// Adds the symmetric Nitsche terms for u = 0 on the interface:
///   - (grad u . n) v - (grad v . n) u + gamma / h_K u v
/// integrated with the facet quadrature. h_K is the cut-cell diameter unless
/// a global h is given. The homogeneous condition leaves b unchanged.
template <int Dim>
void assemble_nitsche(SparseMatrix& a, std::span<double> /*b*/, const Mesh<Dim>& mesh,
                      const CutInterface<Dim>& iface, double gamma_d,
                      std::optional<double> h_global = std::nullopt) {
  if (!(gamma_d > 0.0)) throw std::invalid_argument("gamma_D must be positive");
  if (h_global && !(*h_global > 0.0)) throw std::invalid_argument("h must be positive");
  for (const auto& f : iface.facets) {
    const auto& geo = mesh.geometry(f.cell);
    const double h = h_global ? *h_global : mesh.cell_diameter(f.cell);
    const double penalty = gamma_d / h;
    std::array<double, Dim + 1> dn{};
    for (int i = 0; i <= Dim; ++i) dn[i] = detail::dot<Dim>(geo.grad_barycentric[i], f.normal);
    for (std::size_t q = 0; q < f.qpoints.size(); ++q) {
      const auto lam = barycentric(mesh, f.cell, f.qpoints[q]);
      const double w = f.qweights[q];
      for (int i = 0; i <= Dim; ++i)
        for (int j = 0; j <= Dim; ++j)
          a.add(geo.vertex_ids[i], geo.vertex_ids[j],
                w * (-dn[j] * lam[i] - dn[i] * lam[j] + penalty * lam[i] * lam[j]));
    }
  }
}

}  // namespace redist
