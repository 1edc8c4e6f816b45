#pragma once

// Initial level-set functions for the benchmark cases and, where available,
// the exact signed distance to their zero set.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

#include "redist/fem.hpp"
#include "redist/mesh.hpp"

namespace redist {

template <int Dim>
struct LevelSet {
  std::string name;
  std::function<double(const Point<Dim>&)> evaluate;
  /// Empty when no closed form is known.
  std::function<double(const Point<Dim>&)> exact_sdf;

  [[nodiscard]] bool has_exact() const { return static_cast<bool>(exact_sdf); }
};

struct CircleParams {
  double cx = 0.5, cy = 0.5, radius = 0.25;
};

/// Paraboloid whose zero set is the circle.
inline double eval_circle(const Point<2>& p, const CircleParams& c = {}) {
  const double dx = p[0] - c.cx, dy = p[1] - c.cy;
  return dx * dx + dy * dy - c.radius * c.radius;
}

inline double exact_sdf_circle(const Point<2>& p, const CircleParams& c = {}) {
  return std::hypot(p[0] - c.cx, p[1] - c.cy) - c.radius;
}

/// +1 left of x = 0.5, -1 right of it, 0 on the line.
inline double eval_step(const Point<2>& p) {
  if (p[0] > 0.5) return -1.0;
  if (p[0] < 0.5) return 1.0;
  return 0.0;
}

inline double exact_sdf_step(const Point<2>& p) { return 0.5 - p[0]; }

/// Three slopes (0.6, 0.3, 0) on [0, 1] with the zero at x = 0.5.
inline double eval_piecewise_affine_1d(double x) {
  if (x <= 1.0 / 3.0) return 0.6 * x - 0.25;
  if (x <= 2.0 / 3.0) return 0.3 * x - 0.15;
  return 0.05;
}

struct NoiseParams {
  double amplitude = 0.02;
  std::uint64_t seed = 20240917;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t bits_of(double v) {
  if (v == 0.0) v = 0.0;  // fold -0 onto +0
  std::uint64_t b = 0;
  std::memcpy(&b, &v, sizeof b);
  return b;
}

// Standard normal sample attached to a point: a hash of the coordinates
// drives Box-Muller, so the value is a pure function of (seed, point) and
// distinct vertices receive independent samples.
template <int Dim>
double point_gaussian(const Point<Dim>& p, std::uint64_t seed) {
  std::uint64_t h = splitmix64(seed);
  for (int k = 0; k < Dim; ++k) h = splitmix64(h ^ bits_of(p[k]));
  const std::uint64_t h2 = splitmix64(h);
  const double u1 = (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;         // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace detail

/// arctan(10 (x - 0.5)) plus a seeded Gaussian perturbation of given amplitude.
inline double eval_arctan_noise(const Point<2>& p, const NoiseParams& noise = {}) {
  double v = std::atan(10.0 * (p[0] - 0.5));
  if (noise.amplitude != 0.0) v += noise.amplitude * detail::point_gaussian<2>(p, noise.seed);
  return v;
}

struct StarParams {
  double cx = 0.5, cy = 0.5;
  int rays = 8;
};

/// Star with radius 0.25 + 0.1 cos(n theta + 2) about the center.
inline double eval_star(const Point<2>& p, const StarParams& s = {}) {
  const double dx = p[0] - s.cx, dy = p[1] - s.cy;
  const double rho = std::hypot(dx, dy);
  const double theta = std::atan2(dy, dx);
  return 0.5 * (rho - 0.25 - 0.1 * std::cos(s.rays * theta + 2.0));
}

struct TorusParams {
  double major = 0.75, minor = 0.25;
};

inline double eval_torus(const Point<3>& p, const TorusParams& t = {}) {
  const double q = std::hypot(p[0], p[1]) - t.major;
  return q * q + p[2] * p[2] - t.minor * t.minor;
}

inline double exact_sdf_torus(const Point<3>& p, const TorusParams& t = {}) {
  return std::hypot(std::hypot(p[0], p[1]) - t.major, p[2]) - t.minor;
}

// Case factories.

inline LevelSet<2> circle_case(const CircleParams& c = {}) {
  return {"circle", [c](const Point<2>& p) { return eval_circle(p, c); },
          [c](const Point<2>& p) { return exact_sdf_circle(p, c); }};
}

inline LevelSet<2> step_case() { return {"step", eval_step, exact_sdf_step}; }

/// The reference distance is that of the unperturbed interface x = 0.5.
inline LevelSet<2> arctan_noise_case(const NoiseParams& n = {}) {
  return {"arctan_noise", [n](const Point<2>& p) { return eval_arctan_noise(p, n); },
          [](const Point<2>& p) { return p[0] - 0.5; }};
}

inline LevelSet<2> star_case(const StarParams& s = {}) {
  return {"star", [s](const Point<2>& p) { return eval_star(p, s); }, {}};
}

inline LevelSet<3> torus_case(const TorusParams& t = {}) {
  return {"torus", [t](const Point<3>& p) { return eval_torus(p, t); },
          [t](const Point<3>& p) { return exact_sdf_torus(p, t); }};
}

inline LevelSet<1> piecewise_affine_1d_case() {
  return {"piecewise_affine_1d", [](const Point<1>& p) { return eval_piecewise_affine_1d(p[0]); },
          [](const Point<1>& p) { return p[0] - 0.5; }};
}

/// 1D initial function negative on (-T, T) and positive outside.
inline LevelSet<1> interval_case(double half_width) {
  return {"interval", [half_width](const Point<1>& p) { return std::abs(p[0]) - half_width; },
          [half_width](const Point<1>& p) { return std::abs(p[0]) - half_width; }};
}

/// Default zero tolerance for sign extraction.
template <int Dim>
double default_tol_zero(const Mesh<Dim>& mesh) {
  return 1e-14 * mesh.bounding_diameter();
}

/// sign(phi0) per vertex, with |phi0| <= tol_zero counted as zero.
template <int Dim>
SignField sign_field(const FieldP1<Dim>& phi0, double tol_zero) {
  if (tol_zero < 0.0) throw std::invalid_argument("tol_zero must be non-negative");
  SignField s(phi0.size());
  for (std::size_t v = 0; v < s.size(); ++v) {
    const double x = phi0[v];
    s[v] = x > tol_zero ? 1 : (x < -tol_zero ? -1 : 0);
  }
  return s;
}

}  // namespace redist
