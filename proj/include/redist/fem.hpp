#pragma once

// P1 Lagrange assembly on simplicial meshes.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "redist/diffusion.hpp"
#include "redist/mesh.hpp"
#include "redist/sparse.hpp"

namespace redist {

/// Continuous piecewise-linear field stored by vertex values.
template <int Dim>
class FieldP1 {
 public:
  FieldP1() = default;
  FieldP1(const Mesh<Dim>& mesh, std::vector<double> values)
      : mesh_(&mesh), values_(std::move(values)) {
    if (values_.size() != mesh.num_vertices())
      throw std::invalid_argument("field size does not match vertex count");
  }

  [[nodiscard]] const Mesh<Dim>& mesh() const { return *mesh_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::vector<double>& data() { return values_; }
  [[nodiscard]] const std::vector<double>& data() const { return values_; }
  [[nodiscard]] double operator[](std::size_t v) const { return values_[v]; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }

  [[nodiscard]] bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  const Mesh<Dim>* mesh_ = nullptr;
  std::vector<double> values_;
};

/// Nodal interpolant of a point function.
template <int Dim, typename F>
FieldP1<Dim> interpolate(const Mesh<Dim>& mesh, F&& f) {
  std::vector<double> v(mesh.num_vertices());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(mesh.vertices()[i]);
  return FieldP1<Dim>(mesh, std::move(v));
}

/// Per-vertex sign in {-1, 0, +1}.
using SignField = std::vector<std::int8_t>;

/// A_ij = sum_K |K| grad(lambda_i) . grad(lambda_j)
template <int Dim>
SparseMatrix assemble_stiffness(const Mesh<Dim>& mesh) {
  auto a = SparseMatrix::from_mesh(mesh);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& g = mesh.geometry(c);
    for (int i = 0; i <= Dim; ++i)
      for (int j = 0; j <= Dim; ++j)
        a.add(g.vertex_ids[i], g.vertex_ids[j],
              g.volume * detail::dot<Dim>(g.grad_barycentric[i], g.grad_barycentric[j]));
  }
  return a;
}

namespace detail {

// Sign carried by a simplex: the common sign of its nonzero vertices, or 0
// if they disagree (or all vanish).
template <std::size_t N>
int uniform_sign(const SignField& sgn, const std::array<Index, N>& verts, bool& mixed) {
  int s = 0;
  mixed = false;
  for (Index v : verts) {
    const int sv = sgn[v];
    if (sv == 0) continue;
    if (s == 0) {
      s = sv;
    } else if (s != sv) {
      mixed = true;
      return 0;
    }
  }
  return s;
}

// Adds int_S s_h v_i over a k-simplex S of measure `meas` with vertex ids
// `verts`. One-signed simplices use their constant sign, which is the exact
// sign of the interpolated level set there; mixed simplices fall back to the
// P1 interpolant of the vertex signs (consistent mass matrix).
template <std::size_t N>
void add_sign_load(const SignField& sgn, const std::array<Index, N>& verts, double meas,
                   std::vector<double>& load) {
  bool mixed = false;
  const int s = uniform_sign(sgn, verts, mixed);
  constexpr double k = static_cast<double>(N);  // vertices of the simplex
  if (!mixed) {
    if (s == 0) return;
    for (Index v : verts) load[v] += s * meas / k;
    return;
  }
  // Mass matrix of a simplex with N vertices: meas / (N (N + 1)) (1 + delta_ij).
  double sum = 0.0;
  for (Index v : verts) sum += sgn[v];
  for (Index v : verts) load[v] += meas / (k * (k + 1.0)) * (sum + sgn[v]);
}

}  // namespace detail

/// Predictor load: int_D sgn v_i dx + int_{dD} sgn v_i ds.
template <int Dim>
std::vector<double> assemble_sign_source(const Mesh<Dim>& mesh, const SignField& sgn) {
  if (sgn.size() != mesh.num_vertices()) throw std::invalid_argument("sign field size mismatch");
  std::vector<double> load(mesh.num_vertices(), 0.0);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    detail::add_sign_load(sgn, mesh.cells()[c], mesh.geometry(c).volume, load);
  for (const auto& f : mesh.boundary_facets()) detail::add_sign_load(sgn, f.vertices, f.measure, load);
  return load;
}

/// Constant gradient of phi on every cell.
template <int Dim>
std::vector<Vec<Dim>> cell_gradients(const Mesh<Dim>& mesh, std::span<const double> phi) {
  std::vector<Vec<Dim>> grads(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& g = mesh.geometry(c);
    Vec<Dim> s{};
    for (int i = 0; i <= Dim; ++i) s = detail::axpy<Dim>(phi[g.vertex_ids[i]], g.grad_barycentric[i], s);
    grads[c] = s;
  }
  return grads;
}

template <int Dim>
std::vector<Vec<Dim>> cell_gradients(const FieldP1<Dim>& phi) {
  return cell_gradients(phi.mesh(), phi.values());
}

/// Corrector load b_i = sum_K |K| d*(|g_K|) g_K . grad(lambda_i).
template <int Dim>
std::vector<double> assemble_corrector_rhs(const Mesh<Dim>& mesh, std::span<const double> phi,
                                           double eps_grad, Scheme scheme) {
  if (!(eps_grad > 0.0)) throw std::invalid_argument("eps_grad must be positive");
  if (phi.size() != mesh.num_vertices()) throw std::invalid_argument("field size mismatch");
  std::vector<double> b(mesh.num_vertices(), 0.0);
  const auto grads = cell_gradients(mesh, phi);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& geo = mesh.geometry(c);
    const auto& g = grads[c];
    const double flux = geo.volume * d_star(scheme, detail::norm<Dim>(g), eps_grad);
    for (int i = 0; i <= Dim; ++i)
      b[geo.vertex_ids[i]] += flux * detail::dot<Dim>(g, geo.grad_barycentric[i]);
  }
  return b;
}

template <int Dim>
std::vector<double> assemble_corrector_rhs(const FieldP1<Dim>& phi, double eps_grad, Scheme scheme) {
  return assemble_corrector_rhs(phi.mesh(), phi.values(), eps_grad, scheme);
}

}  // namespace redist
