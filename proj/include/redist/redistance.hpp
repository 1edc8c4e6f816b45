#pragma once

// Predictor-corrector redistancing.
//
// The predictor solves -Laplace(phi) = sgn(phi0) with phi = 0 on the zero set
// of phi0 and grad(phi).n = sgn(phi0) on the outer boundary. The corrector
// is a Picard iteration on the least-squares Eikonal functional,
//   (grad phi^{n+1}, grad v) = (d*(|grad phi^n|) grad phi^n, grad v),
// with the same interface condition. Both share one operator: the P1
// stiffness matrix plus either strong zero Dirichlet rows on interface
// vertices (fitted) or Nitsche terms on the reconstructed interface
// (unfitted). Only the right-hand side changes between iterations.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "redist/cutfem.hpp"
#include "redist/diffusion.hpp"
#include "redist/fem.hpp"
#include "redist/levelset.hpp"
#include "redist/mesh.hpp"
#include "redist/metrics.hpp"
#include "redist/sparse.hpp"

namespace redist {

enum class Mode { fitted, unfitted };
enum class StopRule { residual, increment };

/// Non-finite iterates or a level set too flat for the original corrector.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RedistanceConfig {
  Mode mode = Mode::unfitted;
  Scheme scheme = Scheme::original;
  double gamma_d = 1e4;
  /// Floor on |grad phi| in the original corrector coefficient.
  double eps_grad = 1e-10;
  StopRule stop_rule = StopRule::increment;
  double stop_eps = 1e-8;
  int max_iters = 500;
  /// Narrow-band half width in multiples of h; unset means the whole mesh.
  std::optional<double> annulus;
  bool predictor = true;
  int quad_degree = 2;
  double solver_tol = 1e-12;
  /// The original scheme refuses an iterate whose gradient is below
  /// eps_grad on more than this fraction of the domain.
  double max_flat_fraction = 0.1;

  void validate() const {
    if (!(gamma_d > 0.0)) throw std::invalid_argument("gamma_d must be positive");
    if (!(eps_grad > 0.0)) throw std::invalid_argument("eps_grad must be positive");
    if (!(stop_eps > 0.0)) throw std::invalid_argument("stop_eps must be positive");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
    if (annulus && !(*annulus > 0.0)) throw std::invalid_argument("annulus width must be positive");
    if (quad_degree < 1) throw std::invalid_argument("quad_degree must be at least 1");
    if (!(solver_tol > 0.0)) throw std::invalid_argument("solver_tol must be positive");
    if (!(max_flat_fraction >= 0.0 && max_flat_fraction <= 1.0))
      throw std::invalid_argument("max_flat_fraction must lie in [0, 1]");
  }
};

struct IterationRecord {
  int iter = 0;
  ErrorReport errors;
};

template <int Dim>
struct RedistanceReport {
  /// One entry per corrector iteration.
  std::vector<IterationRecord> history;
  /// Errors of the field the corrector started from.
  ErrorReport initial;
  FieldP1<Dim> final_field;
  std::optional<FieldP1<Dim>> predictor;
  int iterations = 0;
  bool converged = false;
  double wall_seconds = 0.0;
  /// Vertices away from the interface whose predictor sign differs from phi0.
  int predictor_sign_violations = 0;
  /// Set for narrow-band runs; the fields above live on this submesh.
  std::shared_ptr<const Submesh<Dim>> band;

  [[nodiscard]] const ErrorReport& final_errors() const {
    return history.empty() ? initial : history.back().errors;
  }
};

/// Vertices that belong to no cut cell and whose sign in phi differs from
/// phi0 (vertices where phi0 itself vanishes are skipped).
template <int Dim>
int count_sign_violations(const Mesh<Dim>& mesh, std::span<const double> phi0, std::span<const double> phi) {
  const auto tags = classify_cells(mesh, phi0);
  std::vector<char> near(mesh.num_vertices(), 0);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    if (tags[c] == CellTag::cut)
      for (Index v : mesh.cells()[c]) near[v] = 1;
  const double tol = default_tol_zero(mesh);
  int bad = 0;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (near[v] || std::abs(phi0[v]) <= tol) continue;
    if ((phi0[v] > 0.0) != (phi[v] > 0.0)) ++bad;
  }
  return bad;
}

/// Fraction of the domain measure on which |grad phi| < eps.
template <int Dim>
double flat_fraction(const Mesh<Dim>& mesh, std::span<const double> phi, double eps) {
  const auto grads = cell_gradients(mesh, phi);
  double flat = 0.0, total = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const double vol = mesh.geometry(c).volume;
    total += vol;
    if (detail::norm<Dim>(grads[c]) < eps) flat += vol;
  }
  return flat / total;
}

/// Shared state of one redistancing problem: the interface of phi0, the
/// interface-constrained operator and the sign field.
template <int Dim>
class Redistancer {
 public:
  Redistancer(const Mesh<Dim>& mesh, std::vector<double> phi0, RedistanceConfig cfg)
      : mesh_(&mesh), phi0_(std::move(phi0)), cfg_(cfg) {
    cfg_.validate();
    if (phi0_.size() != mesh.num_vertices()) throw std::invalid_argument("phi0 size mismatch");
    for (double v : phi0_)
      if (!std::isfinite(v)) throw std::invalid_argument("phi0 has non-finite values");

    const auto snapped = snap_values(phi0_);
    bool neg = false, pos = false;
    for (std::size_t v = 0; v < phi0_.size(); ++v) {
      if (phi0_[v] < -snapped.snap_tol) neg = true;
      if (phi0_[v] > snapped.snap_tol) pos = true;
    }
    if (!neg || !pos) throw std::invalid_argument("no interface: phi0 does not change sign");

    sign_ = sign_field(FieldP1<Dim>(mesh, phi0_), default_tol_zero(mesh));
    iface_ = build_interface(mesh, std::span<const double>(phi0_), cfg_.quad_degree);
    op_ = assemble_stiffness(mesh);
    std::vector<double> dummy(mesh.num_vertices(), 0.0);
    if (cfg_.mode == Mode::unfitted) {
      assemble_nitsche(op_, dummy, mesh, iface_, cfg_.gamma_d);
    } else {
      std::vector<Index> dofs;
      for (std::size_t v = 0; v < phi0_.size(); ++v)
        if (std::abs(phi0_[v]) <= snapped.snap_tol) dofs.push_back(static_cast<Index>(v));
      if (dofs.empty()) throw std::invalid_argument("fitted mode: no mesh vertex lies on the interface");
      const std::vector<double> zeros(dofs.size(), 0.0);
      dirichlet_ = apply_strong_dirichlet(op_, dummy, dofs, zeros);
    }
  }

  [[nodiscard]] const Mesh<Dim>& mesh() const { return *mesh_; }
  [[nodiscard]] const RedistanceConfig& config() const { return cfg_; }
  [[nodiscard]] const CutInterface<Dim>& interface() const { return iface_; }
  [[nodiscard]] const SparseMatrix& op() const { return op_; }
  [[nodiscard]] const SignField& sign() const { return sign_; }
  [[nodiscard]] std::span<const double> phi0() const { return phi0_; }
  [[nodiscard]] FieldP1<Dim> initial_field() const { return FieldP1<Dim>(*mesh_, phi0_); }

  /// Solves the predictor problem.
  [[nodiscard]] FieldP1<Dim> predictor() const {
    auto b = assemble_sign_source(*mesh_, sign_);
    return solve(std::move(b), std::vector<double>(mesh_->num_vertices(), 0.0));
  }

  /// One Picard update from phi_n, warm-started at phi_n.
  [[nodiscard]] FieldP1<Dim> corrector_step(std::span<const double> phi_n) const {
    auto b = assemble_corrector_rhs(*mesh_, phi_n, cfg_.eps_grad, cfg_.scheme);
    return solve(std::move(b), std::vector<double>(phi_n.begin(), phi_n.end()));
  }

  [[nodiscard]] ErrorReport errors(std::span<const double> phi,
                                   const std::type_identity_t<PointFunction<Dim>>& exact) const {
    return evaluate_errors(*mesh_, phi, iface_, exact);
  }

 private:
  FieldP1<Dim> solve(std::vector<double> b, std::vector<double> x) const {
    if (dirichlet_) dirichlet_->apply_to_rhs(b);
    solve_spd(op_, b, x, SolverOptions{cfg_.solver_tol, 0});
    FieldP1<Dim> out(*mesh_, std::move(x));
    if (!out.all_finite()) throw NumericalError("linear solve produced non-finite values");
    return out;
  }

  const Mesh<Dim>* mesh_;
  std::vector<double> phi0_;
  RedistanceConfig cfg_;
  SignField sign_;
  CutInterface<Dim> iface_;
  SparseMatrix op_;
  std::optional<DirichletConstraint> dirichlet_;
};

/// Predictor solve for phi0 on a mesh.
template <int Dim>
FieldP1<Dim> solve_predictor(const Mesh<Dim>& mesh, std::span<const double> phi0, const RedistanceConfig& cfg) {
  return Redistancer<Dim>(mesh, std::vector<double>(phi0.begin(), phi0.end()), cfg).predictor();
}

/// One corrector step with a pre-built operator.
template <int Dim>
FieldP1<Dim> corrector_step(const Redistancer<Dim>& problem, std::span<const double> phi_n) {
  return problem.corrector_step(phi_n);
}

namespace detail {

template <int Dim>
void check_flatness(const Redistancer<Dim>& p, std::span<const double> phi) {
  const auto& cfg = p.config();
  if (cfg.scheme != Scheme::original) return;
  const double frac = flat_fraction(p.mesh(), phi, cfg.eps_grad);
  if (frac > cfg.max_flat_fraction) {
    std::ostringstream pct;
    pct << std::setprecision(3) << 100.0 * frac;
    throw NumericalError("level set is flat (|grad phi| < eps_grad) on " + pct.str() +
                         "% of the domain; the corrector right-hand side is undefined there"
                         " (enable the predictor)");
  }
}

// Corrector loop. With `fixed_iterations` > 0 the stop rule is ignored.
template <int Dim>
RedistanceReport<Dim> iterate(const Redistancer<Dim>& p, const std::type_identity_t<PointFunction<Dim>>& exact,
                              int fixed_iterations) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& cfg = p.config();
  RedistanceReport<Dim> report;
  FieldP1<Dim> current = p.initial_field();
  if (cfg.predictor) {
    current = p.predictor();
    report.predictor = current;
    report.predictor_sign_violations = count_sign_violations(p.mesh(), p.phi0(), current.values());
  }
  report.initial = p.errors(current.values(), exact);

  const int cap = fixed_iterations > 0 ? fixed_iterations : cfg.max_iters;
  double prev = report.initial.eikonal_error;
  for (int it = 1; it <= cap; ++it) {
    check_flatness(p, current.values());
    FieldP1<Dim> next = p.corrector_step(current.values());
    IterationRecord rec{it, p.errors(next.values(), exact)};
    const double eik = rec.errors.eikonal_error;
    report.history.push_back(rec);
    current = std::move(next);
    if (fixed_iterations > 0) continue;
    const bool done = cfg.stop_rule == StopRule::residual ? eik < cfg.stop_eps : std::abs(eik - prev) < cfg.stop_eps;
    prev = eik;
    if (done) {
      report.converged = true;
      break;
    }
  }
  report.iterations = static_cast<int>(report.history.size());
  report.final_field = std::move(current);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace detail

template <int Dim>
RedistanceReport<Dim> narrow_band_run(const Mesh<Dim>& mesh, std::span<const double> phi0, RedistanceConfig cfg,
                                      double band_width,
                                      const std::type_identity_t<PointFunction<Dim>>& exact = {});

/// Predictor (if enabled) followed by corrector iterations until the stop
/// rule holds or max_iters is reached. Non-convergence is reported, not thrown.
template <int Dim>
RedistanceReport<Dim> run(const Mesh<Dim>& mesh, std::span<const double> phi0, const RedistanceConfig& cfg,
                          const std::type_identity_t<PointFunction<Dim>>& exact = {}) {
  if (cfg.annulus) return narrow_band_run(mesh, phi0, cfg, *cfg.annulus, exact);
  Redistancer<Dim> p(mesh, std::vector<double>(phi0.begin(), phi0.end()), cfg);
  return detail::iterate(p, exact, 0);
}

namespace detail {

// Euclidean distance from p to an interface facet (point, segment or triangle).
template <int Dim>
double distance_to_facet(const Point<Dim>& p, const std::array<Point<Dim>, Dim>& x) {
  if constexpr (Dim == 1) {
    return std::abs(p[0] - x[0][0]);
  } else if constexpr (Dim == 2) {
    const auto d = sub<2>(x[1], x[0]);
    const double len2 = dot<2>(d, d);
    const double t = len2 > 0.0 ? std::clamp(dot<2>(sub<2>(p, x[0]), d) / len2, 0.0, 1.0) : 0.0;
    return norm<2>(sub<2>(p, axpy<2>(t, d, x[0])));
  } else {
    // Project onto the plane; if the foot lies outside, the nearest point is on an edge.
    const auto e1 = sub<3>(x[1], x[0]), e2 = sub<3>(x[2], x[0]);
    const auto n = cross(e1, e2);
    const double nn = dot<3>(n, n);
    if (nn > 0.0) {
      const auto w = sub<3>(p, x[0]);
      const auto foot = axpy<3>(-dot<3>(w, n) / nn, n, p);
      const auto f = sub<3>(foot, x[0]);
      const double b1 = dot<3>(cross(f, e2), n) / nn;
      const double b2 = dot<3>(cross(e1, f), n) / nn;
      if (b1 >= 0.0 && b2 >= 0.0 && b1 + b2 <= 1.0) return norm<3>(sub<3>(p, foot));
    }
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      const auto& a = x[i];
      const auto& b = x[(i + 1) % 3];
      const auto d = sub<3>(b, a);
      const double len2 = dot<3>(d, d);
      const double t = len2 > 0.0 ? std::clamp(dot<3>(sub<3>(p, a), d) / len2, 0.0, 1.0) : 0.0;
      best = std::min(best, norm<3>(sub<3>(p, axpy<3>(t, d, a))));
    }
    return best;
  }
}

}  // namespace detail

/// Distance from every mesh vertex to the reconstructed interface.
template <int Dim>
std::vector<double> interface_distance(const Mesh<Dim>& mesh, const CutInterface<Dim>& iface) {
  if (iface.empty()) throw std::invalid_argument("interface_distance: empty interface");
  std::vector<double> d(mesh.num_vertices(), std::numeric_limits<double>::infinity());
  for (std::size_t v = 0; v < d.size(); ++v)
    for (const auto& f : iface.facets)
      d[v] = std::min(d[v], detail::distance_to_facet<Dim>(mesh.vertices()[v], f.vertices));
  return d;
}

/// Cells with every vertex within band_width * h of the interface, plus one
/// layer of vertex neighbours.
template <int Dim>
std::vector<Index> band_cells(const Mesh<Dim>& mesh, const CutInterface<Dim>& iface, double band_width) {
  if (!(band_width > 0.0)) throw std::invalid_argument("band width must be positive");
  const double limit = band_width * mesh.h();
  const auto dist = interface_distance(mesh, iface);
  std::vector<char> core_vertex(mesh.num_vertices(), 0);
  for (const auto& cell : mesh.cells()) {
    bool inside = true;
    for (Index v : cell) inside = inside && dist[v] <= limit;
    if (!inside) continue;
    for (Index v : cell) core_vertex[v] = 1;
  }
  std::vector<Index> cells;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    bool touches = false;
    for (Index v : mesh.cells()[c]) touches = touches || core_vertex[v];
    if (touches) cells.push_back(static_cast<Index>(c));
  }
  if (cells.empty()) throw std::invalid_argument("narrow band is empty; increase the band width");
  return cells;
}

/// Runs the full scheme on a band of cells around the interface. The band
/// boundary receives the predictor Neumann condition; errors are measured on
/// the band only.
template <int Dim>
RedistanceReport<Dim> narrow_band_run(const Mesh<Dim>& mesh, std::span<const double> phi0, RedistanceConfig cfg,
                                      double band_width, const std::type_identity_t<PointFunction<Dim>>& exact) {
  cfg.annulus.reset();
  cfg.validate();
  const auto cells = band_cells(mesh, build_interface(mesh, phi0, cfg.quad_degree), band_width);
  auto band = std::make_shared<const Submesh<Dim>>(extract_submesh<Dim>(mesh, cells));
  std::vector<double> sub_phi0(band->parent_vertex.size());
  for (std::size_t v = 0; v < sub_phi0.size(); ++v) sub_phi0[v] = phi0[band->parent_vertex[v]];
  Redistancer<Dim> p(band->mesh, std::move(sub_phi0), cfg);
  auto report = detail::iterate(p, exact, 0);
  report.band = band;
  return report;
}

/// Exactly `iterations` corrector steps (after the predictor, if enabled).
template <int Dim>
RedistanceReport<Dim> run_fixed(const Mesh<Dim>& mesh, std::span<const double> phi0, const RedistanceConfig& cfg,
                                int iterations, const std::type_identity_t<PointFunction<Dim>>& exact = {}) {
  if (iterations < 1) throw std::invalid_argument("iterations must be at least 1");
  Redistancer<Dim> p(mesh, std::vector<double>(phi0.begin(), phi0.end()), cfg);
  return detail::iterate(p, exact, iterations);
}

/// Volume-weighted mean of |grad phi| over the cells contained in [a, b].
inline double mean_gradient_norm(const Mesh<1>& mesh, std::span<const double> phi, double a, double b) {
  const auto grads = cell_gradients(mesh, phi);
  double s = 0.0, w = 0.0;
  const double tol = 1e-12 * (b - a);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto x = mesh.corners(c);
    const double lo = std::min(x[0][0], x[1][0]), hi = std::max(x[0][0], x[1][0]);
    if (lo < a - tol || hi > b + tol) continue;
    const double vol = mesh.geometry(c).volume;
    s += vol * std::abs(grads[c][0]);
    w += vol;
  }
  if (w == 0.0) throw std::invalid_argument("mean_gradient_norm: no cell inside the range");
  return s / w;
}

/// The three-slope 1D comparison: ten fitted corrector iterations of the
/// given scheme on [0, 1], optionally preceded by the predictor. The mesh
/// must have a vertex at x = 0.5.
inline FieldP1<1> run_1d_comparison(const Mesh<1>& mesh, Scheme scheme, bool predictor, int iterations = 10) {
  RedistanceConfig cfg;
  cfg.mode = Mode::fitted;
  cfg.scheme = scheme;
  cfg.predictor = predictor;
  const auto phi0 = interpolate(mesh, [](const Point<1>& p) { return eval_piecewise_affine_1d(p[0]); });
  return run_fixed(mesh, phi0.values(), cfg, iterations).final_field;
}

}  // namespace redist
