#pragma once

// Error norms used to judge a redistanced field and observed convergence orders.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "redist/cutfem.hpp"
#include "redist/fem.hpp"
#include "redist/mesh.hpp"

namespace redist {

struct ErrorReport {
  double eikonal_error = 0.0;
  /// Absent when the case has no closed-form distance.
  std::optional<double> l2_error;
  double interface_error = 0.0;
  double h = 0.0;
};

/// Root-mean-square of (phi - I_h exact) over the mesh. The difference of
/// the two P1 fields is integrated exactly.
template <int Dim>
double l2_error(const Mesh<Dim>& mesh, std::span<const double> phi,
                const std::type_identity_t<PointFunction<Dim>>& exact) {
  std::vector<double> e(mesh.num_vertices());
  for (std::size_t v = 0; v < e.size(); ++v) e[v] = phi[v] - exact(mesh.vertices()[v]);
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& g = mesh.geometry(c);
    double sum = 0.0, sq = 0.0;
    for (Index v : g.vertex_ids) {
      sum += e[v];
      sq += e[v] * e[v];
    }
    // int_K u^2 = |K| / ((d+1)(d+2)) (sum u_i^2 + (sum u_i)^2) for P1 u.
    num += g.volume / ((Dim + 1.0) * (Dim + 2.0)) * (sq + sum * sum);
    den += g.volume;
  }
  return std::sqrt(num / den);
}

/// Root-mean-square of 1 - |grad phi| over the mesh.
template <int Dim>
double eikonal_error(const Mesh<Dim>& mesh, std::span<const double> phi) {
  const auto grads = cell_gradients(mesh, phi);
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const double vol = mesh.geometry(c).volume;
    const double d = 1.0 - detail::norm<Dim>(grads[c]);
    num += vol * d * d;
    den += vol;
  }
  return std::sqrt(num / den);
}

/// sqrt(int_Gamma phi^2 ds) over a reconstructed interface (not normalised
/// by the interface measure).
template <int Dim>
double interface_error(const Mesh<Dim>& mesh, std::span<const double> phi, const CutInterface<Dim>& iface) {
  if (iface.empty()) throw std::invalid_argument("interface_error: empty interface");
  const double s = iface.integrate([&](const InterfaceFacet<Dim>& f, const Point<Dim>& p) {
    const double v = evaluate_in_cell(mesh, f.cell, phi, p);
    return v * v;
  });
  return std::sqrt(s);
}

template <int Dim>
ErrorReport evaluate_errors(const Mesh<Dim>& mesh, std::span<const double> phi, const CutInterface<Dim>& iface,
                            const std::type_identity_t<PointFunction<Dim>>& exact) {
  ErrorReport r;
  r.h = mesh.h();
  r.eikonal_error = eikonal_error(mesh, phi);
  if (exact) r.l2_error = l2_error(mesh, phi, exact);
  r.interface_error = interface_error(mesh, phi, iface);
  return r;
}

/// Observed order between the coarsest and the finest sample:
/// log(e_coarse / e_fine) / log(h_coarse / h_fine).
inline double convergence_order(std::vector<std::pair<double, double>> samples) {
  if (samples.size() < 2) throw std::invalid_argument("convergence_order: need at least two samples");
  for (const auto& [h, e] : samples) {
    if (!(h > 0.0)) throw std::invalid_argument("convergence_order: mesh sizes must be positive");
    if (!(e > 0.0)) throw std::invalid_argument("convergence_order: errors must be positive");
  }
  std::sort(samples.begin(), samples.end());
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].first == samples[i - 1].first)
      throw std::invalid_argument("convergence_order: mesh sizes must be distinct");
  const auto& fine = samples.front();
  const auto& coarse = samples.back();
  return std::log(coarse.second / fine.second) / std::log(coarse.first / fine.first);
}

}  // namespace redist
