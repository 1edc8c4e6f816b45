#pragma once

// The driver subcommands. Each returns a process exit status:
//   0 success, 1 configuration error, 2 numerical failure, 3 non-convergence.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "redist/levelset.hpp"
#include "redist/metrics.hpp"
#include "redist/redistance.hpp"
#include "redist/runspec.hpp"
#include "redist/sparse.hpp"
#include "redist/vtk.hpp"

namespace redist {

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_numerical = 2, exit_not_converged = 3 };

/// A compare entry: "pc", "elliptic", "<scheme>" or "pc-<scheme>", optionally
/// followed by ":<gamma_d>".
struct Variant {
  std::string label;
  Scheme scheme = Scheme::original;
  bool predictor = true;
  std::optional<double> gamma_d;
};

inline Variant parse_variant(const std::string& text) {
  Variant v;
  v.label = text;
  std::string name = text;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    name = text.substr(0, colon);
    const std::string g = text.substr(colon + 1);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(g, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != g.size() || !(value > 0.0))
      throw ConfigError("", "variants", "bad gamma_d '" + g + "' in variant '" + text + "'");
    v.gamma_d = value;
  }
  try {
    if (name == "pc") {
      v.predictor = true;
    } else if (name == "elliptic") {
      v.predictor = false;
    } else if (name.rfind("pc-", 0) == 0) {
      v.scheme = parse_scheme(name.substr(3));
    } else {
      v.scheme = parse_scheme(name);
      v.predictor = false;
    }
  } catch (const std::invalid_argument&) {
    throw ConfigError("", "variants", "unknown variant '" + text + "'");
  }
  return v;
}

namespace detail {

inline std::string fmt6(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

inline std::string fmt_full(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

inline std::string opt_full(const std::optional<double>& v) { return v ? fmt_full(*v) : std::string(); }

inline std::string summary(const ErrorReport& e) {
  std::string s = "eikonal " + fmt6(e.eikonal_error);
  s += "  l2 " + (e.l2_error ? fmt6(*e.l2_error) : std::string("n/a"));
  s += "  interface " + fmt6(e.interface_error);
  return s;
}

inline std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

template <int Dim>
RedistanceReport<Dim> execute(const Mesh<Dim>& mesh, const LevelSet<Dim>& ls, const RedistanceConfig& cfg,
                              std::optional<int> iterations) {
  const auto phi0 = interpolate(mesh, ls.evaluate);
  if (iterations) {
    if (cfg.annulus) throw ConfigError("", "iterations", "a fixed iteration count cannot be combined with annulus");
    return run_fixed(mesh, phi0.values(), cfg, *iterations, ls.exact_sdf);
  }
  return run(mesh, phi0.values(), cfg, ls.exact_sdf);
}

template <int Dim>
bool finished(const RedistanceReport<Dim>& r, std::optional<int> iterations) {
  return iterations.has_value() || r.converged;
}

template <int Dim>
void write_history(const std::filesystem::path& path, const RedistanceReport<Dim>& r) {
  auto out = open_csv(path);
  out << "iter,eikonal_error,l2_error,interface_error\n";
  auto row = [&](int it, const ErrorReport& e) {
    out << it << ',' << fmt_full(e.eikonal_error) << ',' << opt_full(e.l2_error) << ','
        << fmt_full(e.interface_error) << '\n';
  };
  row(0, r.initial);
  for (const auto& rec : r.history) row(rec.iter, rec.errors);
}

template <int Dim>
int cmd_run_dim(const RunSpec& spec, std::ostream& log) {
  const auto cfg = resolve_config(spec);
  const auto iterations = resolve_iterations(spec);
  const auto mesh = case_mesh<Dim>(spec, spec.n);
  const auto ls = case_levelset<Dim>(spec);
  const auto report = execute(mesh, ls, cfg, iterations);

  std::filesystem::create_directories(spec.out);
  if (spec.exports.history) write_history(spec.out / "history.csv", report);
  const Mesh<Dim>& field_mesh = report.band ? report.band->mesh : mesh;
  if (spec.exports.vtk) {
    const auto phi0 = interpolate(field_mesh, ls.evaluate);
    write_vtk(spec.out / "final.vtk", field_mesh,
              {{"phi", report.final_field.values()}, {"phi0", phi0.values()}});
    if (report.predictor) write_vtk(spec.out / "predictor.vtk", field_mesh, {{"phi", report.predictor->values()}});
  }
  if (spec.exports.interface) {
    const auto phi0 = interpolate(field_mesh, ls.evaluate);
    write_interface_vtk(spec.out / "interface.vtk", build_interface(field_mesh, phi0.values(), cfg.quad_degree));
  }

  log << spec.case_name << "  h " << fmt6(mesh.h()) << "  gamma_d " << fmt6(cfg.gamma_d) << "  scheme "
      << to_string(cfg.scheme) << "  predictor " << (cfg.predictor ? "on" : "off") << '\n';
  log << "iterations " << report.iterations << "  converged " << (report.converged ? "yes" : "no") << "  time "
      << fmt6(report.wall_seconds) << " s\n";
  log << "final  " << summary(report.final_errors()) << '\n';
  if (report.predictor && report.predictor_sign_violations > 0)
    log << "warning: predictor changed sign at " << report.predictor_sign_violations << " vertices\n";
  return finished(report, iterations) ? exit_ok : exit_not_converged;
}

template <int Dim>
int cmd_convergence_dim(const RunSpec& spec, std::ostream& log) {
  const auto ns = resolutions(spec);
  if (ns.size() < 2) throw ConfigError("", "n_list", "a convergence study needs at least two resolutions");
  const auto cfg = resolve_config(spec);
  const auto iterations = resolve_iterations(spec);
  const auto ls = case_levelset<Dim>(spec);

  struct Row {
    int n;
    double h;
    int iterations;
    bool converged;
    ErrorReport errors;
  };
  std::vector<Row> rows;
  bool all_done = true;
  for (int n : ns) {
    const auto mesh = case_mesh<Dim>(spec, n);
    const auto report = execute(mesh, ls, cfg, iterations);
    const auto& e = report.final_errors();
    rows.push_back({n, mesh.h(), report.iterations, report.converged, e});
    all_done = all_done && finished(report, iterations);
    log << "n " << n << "  h " << fmt6(mesh.h()) << "  iterations " << report.iterations << "  " << summary(e)
        << '\n';
  }

  auto order_of = [&](auto pick) -> std::optional<double> {
    std::vector<std::pair<double, double>> samples;
    for (const auto& r : rows) {
      const std::optional<double> v = pick(r.errors);
      if (!v || !(*v > 0.0)) return std::nullopt;
      samples.emplace_back(r.h, *v);
    }
    return convergence_order(samples);
  };
  const auto o_eik = order_of([](const ErrorReport& e) { return std::optional<double>(e.eikonal_error); });
  const auto o_l2 = order_of([](const ErrorReport& e) { return e.l2_error; });
  const auto o_if = order_of([](const ErrorReport& e) { return std::optional<double>(e.interface_error); });

  std::filesystem::create_directories(spec.out);
  auto out = open_csv(spec.out / "orders.csv");
  out << "n,h,iterations,converged,eikonal_error,l2_error,interface_error\n";
  for (const auto& r : rows)
    out << r.n << ',' << fmt_full(r.h) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ','
        << fmt_full(r.errors.eikonal_error) << ',' << opt_full(r.errors.l2_error) << ','
        << fmt_full(r.errors.interface_error) << '\n';
  out << "order,,,," << opt_full(o_eik) << ',' << opt_full(o_l2) << ',' << opt_full(o_if) << '\n';

  auto show = [](const std::optional<double>& v) { return v ? fmt6(*v) : std::string("n/a"); };
  log << "orders  eikonal " << show(o_eik) << "  l2 " << show(o_l2) << "  interface " << show(o_if) << '\n';
  return all_done ? exit_ok : exit_not_converged;
}

template <int Dim>
int cmd_compare_dim(const RunSpec& spec, std::ostream& log) {
  if (spec.variants.size() < 2) throw ConfigError("", "variants", "compare needs at least two variants");
  std::vector<Variant> variants;
  for (const auto& v : spec.variants) variants.push_back(parse_variant(v));

  const auto base = resolve_config(spec);
  const auto iterations = resolve_iterations(spec);
  const auto mesh = case_mesh<Dim>(spec, spec.n);
  const auto ls = case_levelset<Dim>(spec);
  const bool slopes = spec.case_name == "slopes";

  std::filesystem::create_directories(spec.out);
  auto out = open_csv(spec.out / "compare.csv");
  out << "variant,scheme,predictor,gamma_d,status,iterations,converged,eikonal_error,l2_error,interface_error";
  if (slopes) out << ",mean_grad_0_1/3,mean_grad_1/3_2/3,mean_grad_2/3_1";
  out << '\n';

  int status = exit_ok;
  for (const auto& v : variants) {
    auto cfg = base;
    cfg.scheme = v.scheme;
    cfg.predictor = v.predictor;
    if (v.gamma_d) cfg.gamma_d = *v.gamma_d;
    out << v.label << ',' << to_string(v.scheme) << ',' << (v.predictor ? 1 : 0) << ',' << fmt_full(cfg.gamma_d)
        << ',';
    try {
      const auto report = execute(mesh, ls, cfg, iterations);
      const auto& e = report.final_errors();
      out << "ok," << report.iterations << ',' << (report.converged ? 1 : 0) << ',' << fmt_full(e.eikonal_error)
          << ',' << opt_full(e.l2_error) << ',' << fmt_full(e.interface_error);
      log << v.label << "  iterations " << report.iterations << "  " << summary(e);
      if constexpr (Dim == 1) {
        if (slopes) {
          const auto phi = report.final_field.values();
          const double g[3] = {mean_gradient_norm(mesh, phi, 0.0, 1.0 / 3.0),
                               mean_gradient_norm(mesh, phi, 1.0 / 3.0, 2.0 / 3.0),
                               mean_gradient_norm(mesh, phi, 2.0 / 3.0, 1.0)};
          for (double x : g) out << ',' << fmt_full(x);
          log << "  mean |grad| " << fmt6(g[0]) << ' ' << fmt6(g[1]) << ' ' << fmt6(g[2]);
        }
      }
      log << '\n';
      if (!finished(report, iterations)) status = std::max<int>(status, exit_not_converged);
    } catch (const NumericalError& e) {
      out << "numerical_failure,,,,,";
      if (slopes) out << ",,,";
      log << v.label << "  failed: " << e.what() << '\n';
      status = exit_numerical;
    } catch (const SolverError& e) {
      out << "numerical_failure,,,,,";
      if (slopes) out << ",,,";
      log << v.label << "  failed: " << e.what() << '\n';
      status = exit_numerical;
    }
    out << '\n';
  }
  return status;
}

template <class F>
int dispatch(const RunSpec& spec, F&& f) {
  switch (find_case(spec.case_name).dim) {
    case 1: return f(std::integral_constant<int, 1>{});
    case 2: return f(std::integral_constant<int, 2>{});
    default: return f(std::integral_constant<int, 3>{});
  }
}

// Maps library exceptions onto exit codes.
template <class F>
int guarded(std::ostream& err, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return exit_config;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const SolverError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  }
}

}  // namespace detail

/// Single run: history.csv, final.vtk, predictor.vtk, interface.vtk.
inline int cmd_run(const RunSpec& spec, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    return detail::dispatch(spec, [&](auto d) { return detail::cmd_run_dim<decltype(d)::value>(spec, log); });
  });
}

/// Resolution sweep: orders.csv with one row per resolution and an order row.
inline int cmd_convergence(const RunSpec& spec, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    return detail::dispatch(spec,
                            [&](auto d) { return detail::cmd_convergence_dim<decltype(d)::value>(spec, log); });
  });
}

/// Variants on one mesh: compare.csv with one row per variant.
inline int cmd_compare(const RunSpec& spec, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    return detail::dispatch(spec, [&](auto d) { return detail::cmd_compare_dim<decltype(d)::value>(spec, log); });
  });
}

}  // namespace redist
