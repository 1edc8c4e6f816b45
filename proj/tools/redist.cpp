// redist: signed-distance redistancing driver.
//
//   redist run         --config run.json [overrides]
//   redist convergence --case circle --n-list 60,80,120,160
//   redist compare     --case circle --n 80 --variants elliptic:1e4,pc:2e4

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "redist/commands.hpp"

namespace {

// Command-line overrides, collected into the same JSON shape as a config file.
struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> case_name, mode, scheme, stop_rule, out;
  std::optional<int> n, max_iters, quad_degree, iterations, rays;
  std::optional<std::uint64_t> seed;
  std::optional<double> gamma_d, eps_grad, stop_eps, annulus, solver_tol, max_flat_fraction, radius,
      noise_amplitude, major_radius, minor_radius, half_width;
  std::vector<int> n_list;
  std::vector<std::string> variants;
  bool no_predictor = false;
  bool no_vtk = false;

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    auto put = [&](const char* key, const auto& opt) {
      if (opt) j[key] = *opt;
    };
    put("case", case_name);
    put("mode", mode);
    put("scheme", scheme);
    put("stop_rule", stop_rule);
    put("out", out);
    put("n", n);
    put("max_iters", max_iters);
    put("quad_degree", quad_degree);
    put("iterations", iterations);
    put("rays", rays);
    put("seed", seed);
    put("gamma_d", gamma_d);
    put("eps_grad", eps_grad);
    put("stop_eps", stop_eps);
    put("annulus", annulus);
    put("solver_tol", solver_tol);
    put("max_flat_fraction", max_flat_fraction);
    put("radius", radius);
    put("noise_amplitude", noise_amplitude);
    put("major_radius", major_radius);
    put("minor_radius", minor_radius);
    put("half_width", half_width);
    if (!n_list.empty()) j["n_list"] = n_list;
    if (!variants.empty()) j["variants"] = variants;
    if (no_predictor) j["predictor"] = false;
    if (no_vtk) j["export"] = {{"vtk", false}, {"interface", false}};
    return j;
  }
};

void add_options(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON run configuration");
  app->add_option("--case", o.case_name, "circle, step, arctan_noise, star, torus, slopes or interval");
  app->add_option("--n", o.n, "cells per axis");
  app->add_option("--n-list", o.n_list, "resolutions for a sweep")->delimiter(',');
  app->add_option("--gamma-d", o.gamma_d, "Nitsche penalty");
  app->add_option("--scheme", o.scheme, "original, basting or adams");
  app->add_flag("--no-predictor", o.no_predictor, "start the corrector from phi0");
  app->add_option("--annulus", o.annulus, "narrow-band half width in multiples of h");
  app->add_option("--seed", o.seed, "noise seed (arctan_noise)");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--mode", o.mode, "fitted or unfitted");
  app->add_option("--max-iters", o.max_iters, "corrector iteration cap");
  app->add_option("--iterations", o.iterations, "run exactly this many corrector steps");
  app->add_option("--stop-rule", o.stop_rule, "residual or increment");
  app->add_option("--stop-eps", o.stop_eps, "stopping tolerance");
  app->add_option("--eps-grad", o.eps_grad, "gradient floor of the original scheme");
  app->add_option("--quad-degree", o.quad_degree, "interface quadrature degree (1-5)");
  app->add_option("--solver-tol", o.solver_tol, "relative CG tolerance");
  app->add_option("--max-flat-fraction", o.max_flat_fraction, "flat-region limit of the original scheme");
  app->add_option("--radius", o.radius, "circle radius");
  app->add_option("--noise-amplitude", o.noise_amplitude, "arctan_noise perturbation amplitude");
  app->add_option("--rays", o.rays, "star rays");
  app->add_option("--major-radius", o.major_radius, "torus major radius");
  app->add_option("--minor-radius", o.minor_radius, "torus minor radius");
  app->add_option("--half-width", o.half_width, "interval half width");
  app->add_option("--variants", o.variants, "compare entries, e.g. elliptic:1e4,pc:2e4")->delimiter(',');
  app->add_flag("--no-vtk", o.no_vtk, "skip VTK output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictor-corrector redistancing to signed distance functions"};
  app.require_subcommand(1);

  Overrides run_o, conv_o, cmp_o;
  auto* run = app.add_subcommand("run", "redistance one case and write history.csv and VTK fields");
  auto* conv = app.add_subcommand("convergence", "resolution sweep; writes orders.csv");
  auto* cmp = app.add_subcommand("compare", "several schemes on one mesh; writes compare.csv");
  add_options(run, run_o);
  add_options(conv, conv_o);
  add_options(cmp, cmp_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? redist::exit_ok : redist::exit_config;
  }

  const Overrides& o = run->parsed() ? run_o : (conv->parsed() ? conv_o : cmp_o);
  redist::RunSpec spec;
  try {
    std::optional<std::filesystem::path> file;
    if (o.config) file = *o.config;
    spec = redist::load_runspec(file, o.to_json());
  } catch (const redist::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return redist::exit_config;
  }

  if (run->parsed()) return redist::cmd_run(spec);
  if (conv->parsed()) return redist::cmd_convergence(spec);
  return redist::cmd_compare(spec);
}
