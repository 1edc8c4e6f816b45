#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "redist/levelset.hpp"

using namespace redist;

TEST(Circle, Values) {
  EXPECT_DOUBLE_EQ(eval_circle({0.5, 0.5}), -0.0625);
  EXPECT_DOUBLE_EQ(eval_circle({0.75, 0.5}), 0.0);
  EXPECT_DOUBLE_EQ(eval_circle({1.0, 1.0}), 0.4375);
  EXPECT_DOUBLE_EQ(exact_sdf_circle({0.5, 0.5}), -0.25);
  EXPECT_DOUBLE_EQ(exact_sdf_circle({0.75, 0.5}), 0.0);
  EXPECT_DOUBLE_EQ(exact_sdf_circle({1.0, 0.5}), 0.25);
}

TEST(Step, Values) {
  for (double y : {0.0, 0.3, 1.0}) {
    EXPECT_EQ(eval_step({0.25, y}), 1.0);
    EXPECT_EQ(eval_step({0.75, y}), -1.0);
    EXPECT_EQ(eval_step({0.5, y}), 0.0);
  }
  EXPECT_DOUBLE_EQ(exact_sdf_step({0.25, 0.1}), 0.25);
}

TEST(PiecewiseAffine, SlopesAndBreakpoints) {
  EXPECT_NEAR(eval_piecewise_affine_1d(1.0 / 3.0), -0.05, 1e-15);
  EXPECT_NEAR(eval_piecewise_affine_1d(2.0 / 3.0), 0.05, 1e-15);
  EXPECT_NEAR(eval_piecewise_affine_1d(0.5), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(eval_piecewise_affine_1d(0.8), eval_piecewise_affine_1d(0.95));
  EXPECT_NEAR((eval_piecewise_affine_1d(0.2) - eval_piecewise_affine_1d(0.1)) / 0.1, 0.6, 1e-12);
  EXPECT_NEAR((eval_piecewise_affine_1d(0.6) - eval_piecewise_affine_1d(0.4)) / 0.2, 0.3, 1e-12);
}

TEST(Torus, TubeCenterAndSurface) {
  const TorusParams t;
  EXPECT_NEAR(eval_torus({t.major + t.minor, 0, 0}), 0.0, 1e-15);
  EXPECT_NEAR(eval_torus({0, t.major - t.minor, 0}), 0.0, 1e-15);
  EXPECT_NEAR(eval_torus({t.major, 0, 0}), -t.minor * t.minor, 1e-15);
  EXPECT_NEAR(exact_sdf_torus({t.major, 0, 0}), -t.minor, 1e-15);
  EXPECT_NEAR(exact_sdf_torus({0, 0, 0}), t.major - t.minor, 1e-15);
}

TEST(Star, ZeroSetFollowsRadiusFunction) {
  const StarParams s;
  for (int k = 0; k < 16; ++k) {
    const double theta = -3.0 + 0.37 * k;
    const double r = 0.25 + 0.1 * std::cos(s.rays * theta + 2.0);
    const Point<2> on{0.5 + r * std::cos(theta), 0.5 + r * std::sin(theta)};
    EXPECT_NEAR(eval_star(on), 0.0, 1e-14);
    const Point<2> in{0.5 + 0.9 * r * std::cos(theta), 0.5 + 0.9 * r * std::sin(theta)};
    EXPECT_LT(eval_star(in), 0.0);
  }
  EXPECT_LT(eval_star({0.5, 0.5}), 0.0);
  EXPECT_GT(eval_star({0.0, 0.0}), 0.0);
  EXPECT_FALSE(star_case().has_exact());
}

TEST(ArctanNoise, ReproducibleAndSeeded) {
  const NoiseParams a{0.02, 5}, b{0.02, 6};
  const Point<2> p{0.31, 0.77};
  EXPECT_EQ(eval_arctan_noise(p, a), eval_arctan_noise(p, a));
  EXPECT_NE(eval_arctan_noise(p, a), eval_arctan_noise(p, b));
  EXPECT_EQ(eval_arctan_noise(p, {0.0, 5}), std::atan(10.0 * (0.31 - 0.5)));
}

TEST(ArctanNoise, PerturbationLooksGaussian) {
  // Sample statistics of the perturbation over a grid.
  const NoiseParams np{1.0, 42};
  double s = 0.0, s2 = 0.0;
  int n = 0;
  for (int i = 0; i < 200; ++i)
    for (int j = 0; j < 200; ++j) {
      const Point<2> p{i / 199.0, j / 199.0};
      const double xi = eval_arctan_noise(p, np) - std::atan(10.0 * (p[0] - 0.5));
      s += xi;
      s2 += xi * xi;
      ++n;
    }
  const double mean = s / n, var = s2 / n - mean * mean;
  EXPECT_LT(std::abs(mean), 0.03);
  EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(ExactSdf, UnitGradientAwayFromMedialAxis) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double d = 1e-6;
  auto fd_norm2 = [&](auto&& f, const Point<2>& p) {
    const double gx = (f(Point<2>{p[0] + d, p[1]}) - f(Point<2>{p[0] - d, p[1]})) / (2 * d);
    const double gy = (f(Point<2>{p[0], p[1] + d}) - f(Point<2>{p[0], p[1] - d})) / (2 * d);
    return std::hypot(gx, gy);
  };
  for (int k = 0; k < 100; ++k) {
    const Point<2> p{u(rng), u(rng)};
    if (std::hypot(p[0] - 0.5, p[1] - 0.5) < 0.01) continue;
    EXPECT_NEAR(fd_norm2([](const Point<2>& q) { return exact_sdf_circle(q); }, p), 1.0, 1e-6);
  }
  const auto torus = torus_case();
  std::uniform_real_distribution<double> w(-1.25, 1.25);
  for (int k = 0; k < 100; ++k) {
    const Point<3> p{w(rng), w(rng), w(rng)};
    const double rho = std::hypot(p[0], p[1]);
    if (rho < 0.05 || std::hypot(rho - 0.75, p[2]) < 0.01) continue;
    Vec<3> g{};
    for (int i = 0; i < 3; ++i) {
      auto a = p, b = p;
      a[i] += d;
      b[i] -= d;
      g[i] = (torus.exact_sdf(a) - torus.exact_sdf(b)) / (2 * d);
    }
    EXPECT_NEAR(detail::norm<3>(g), 1.0, 1e-6);
  }
}

TEST(SignField, OneDimensionalExample) {
  const auto mesh = build_interval_mesh(0.0, 1.0, 4);
  const auto phi = interpolate(mesh, [](const Point<1>& p) { return p[0] - 0.5; });
  const auto s = sign_field(phi, default_tol_zero(mesh));
  const SignField expect{-1, -1, 0, 1, 1};
  EXPECT_EQ(s, expect);
}

TEST(SignField, ConstantPositive) {
  const auto mesh = build_box_mesh<2>({0, 0}, {1, 1}, {3, 3});
  const auto s = sign_field(interpolate(mesh, [](const Point<2>&) { return 1.0; }), 0.0);
  for (auto v : s) EXPECT_EQ(v, 1);
}

TEST(SignField, CircleAgreesWithAnalyticSign) {
  const auto mesh = build_box_mesh<2>({0, 0}, {1, 1}, {40, 40});
  const auto phi = interpolate(mesh, [](const Point<2>& p) { return eval_circle(p); });
  const double tol = default_tol_zero(mesh);
  const auto s = sign_field(phi, tol);
  for (std::size_t v = 0; v < s.size(); ++v) {
    const auto& p = mesh.vertices()[v];
    const double r = std::hypot(p[0] - 0.5, p[1] - 0.5);
    if (std::abs(phi[v]) <= tol) EXPECT_EQ(s[v], 0);
    else EXPECT_EQ(s[v], r < 0.25 ? -1 : 1) << v;
  }
  EXPECT_THROW(sign_field(phi, -1.0), std::invalid_argument);
}

TEST(IntervalCase, NegativeInsideHalfWidth) {
  const auto ls = interval_case(0.5);
  EXPECT_DOUBLE_EQ(ls.evaluate({0.0}), -0.5);
  EXPECT_DOUBLE_EQ(ls.evaluate({0.5}), 0.0);
  EXPECT_DOUBLE_EQ(ls.evaluate({-1.0}), 0.5);
  EXPECT_TRUE(ls.has_exact());
}

TEST(Cases, EvaluationIsPure) {
  const auto mesh = build_box_mesh<2>({0, 0}, {1, 1}, {12, 12});
  for (const auto& ls : {circle_case(), step_case(), arctan_noise_case(), star_case()}) {
    const auto a = interpolate(mesh, ls.evaluate);
    const auto b = interpolate(mesh, ls.evaluate);
    EXPECT_EQ(a.data(), b.data()) << ls.name;
    const double tol = default_tol_zero(mesh);
    EXPECT_EQ(sign_field(a, tol), sign_field(b, tol));
  }
}
