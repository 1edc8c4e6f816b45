#pragma once

// Run configurations for the command-line driver: a JSON document whose keys
// mirror RedistanceConfig plus the benchmark case, resolution and outputs.
// Every key may also be given on the command line; such overrides are merged
// over the file before validation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "redist/diffusion.hpp"
#include "redist/levelset.hpp"
#include "redist/mesh.hpp"
#include "redist/redistance.hpp"

namespace redist {

/// Invalid configuration; `where` is "line N", "command line" or empty.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& where, const std::string& key, const std::string& msg)
      : std::runtime_error(compose(where, key, msg)) {}

 private:
  static std::string compose(const std::string& where, const std::string& key, const std::string& msg) {
    std::string s = "config error";
    if (!where.empty()) s += " (" + where + ")";
    if (!key.empty()) s += ": " + key;
    return s + ": " + msg;
  }
};

struct ExportToggles {
  bool vtk = true;
  bool history = true;
  bool interface = true;
};

struct RunSpec {
  std::string case_name = "circle";
  int n = 40;
  std::vector<int> n_list;

  CircleParams circle;
  NoiseParams noise;
  StarParams star;
  TorusParams torus;
  double half_width = 0.5;

  // Unset fields fall back to the case defaults.
  std::optional<Mode> mode;
  Scheme scheme = Scheme::original;
  std::optional<double> gamma_d;
  double eps_grad = 1e-10;
  StopRule stop_rule = StopRule::increment;
  double stop_eps = 1e-8;
  int max_iters = 500;
  std::optional<double> annulus;
  bool predictor = true;
  int quad_degree = 2;
  double solver_tol = 1e-12;
  double max_flat_fraction = 0.1;
  /// Run exactly this many corrector steps instead of applying the stop rule.
  std::optional<int> iterations;

  std::filesystem::path out = "out";
  ExportToggles exports;
  std::vector<std::string> variants;
};

struct CaseInfo {
  std::string name;
  int dim = 2;
  std::vector<double> lower, upper;
  double gamma_d = 1e4;
  Mode mode = Mode::unfitted;
  std::optional<int> iterations;
};

inline const std::vector<CaseInfo>& case_table() {
  static const std::vector<CaseInfo> cases = {
      {"circle", 2, {0.0, 0.0}, {1.0, 1.0}, 1e4, Mode::unfitted, std::nullopt},
      {"step", 2, {0.0, 0.0}, {1.0, 1.0}, 10.0, Mode::unfitted, std::nullopt},
      {"arctan_noise", 2, {0.0, 0.0}, {1.0, 1.0}, 10.0, Mode::unfitted, std::nullopt},
      {"star", 2, {0.0, 0.0}, {1.0, 1.0}, 1e3, Mode::unfitted, std::nullopt},
      {"torus", 3, {-1.25, -1.25, -1.25}, {1.25, 1.25, 1.25}, 1e4, Mode::unfitted, std::nullopt},
      {"slopes", 1, {0.0}, {1.0}, 1e4, Mode::fitted, 10},
      {"interval", 1, {-1.0}, {1.0}, 1e4, Mode::fitted, std::nullopt},
  };
  return cases;
}

inline const CaseInfo& find_case(const std::string& name) {
  for (const auto& c : case_table())
    if (c.name == name) return c;
  std::string known;
  for (const auto& c : case_table()) known += (known.empty() ? "" : ", ") + c.name;
  throw ConfigError("", "case", "unknown case '" + name + "' (known: " + known + ")");
}

/// RedistanceConfig for a spec, with case defaults applied.
inline RedistanceConfig resolve_config(const RunSpec& s) {
  const auto& info = find_case(s.case_name);
  RedistanceConfig cfg;
  cfg.mode = s.mode.value_or(info.mode);
  cfg.scheme = s.scheme;
  cfg.gamma_d = s.gamma_d.value_or(info.gamma_d);
  cfg.eps_grad = s.eps_grad;
  cfg.stop_rule = s.stop_rule;
  cfg.stop_eps = s.stop_eps;
  cfg.max_iters = s.max_iters;
  cfg.annulus = s.annulus;
  cfg.predictor = s.predictor;
  cfg.quad_degree = s.quad_degree;
  cfg.solver_tol = s.solver_tol;
  cfg.max_flat_fraction = s.max_flat_fraction;
  return cfg;
}

inline std::optional<int> resolve_iterations(const RunSpec& s) {
  return s.iterations ? s.iterations : find_case(s.case_name).iterations;
}

/// Resolutions to run: n_list if given, else n alone.
inline std::vector<int> resolutions(const RunSpec& s) { return s.n_list.empty() ? std::vector<int>{s.n} : s.n_list; }

template <int Dim>
Mesh<Dim> case_mesh(const RunSpec& s, int n) {
  const auto& info = find_case(s.case_name);
  if (info.dim != Dim) throw std::logic_error("case dimension mismatch");
  if constexpr (Dim == 1) {
    return build_interval_mesh(info.lower[0], info.upper[0], n);
  } else {
    Point<Dim> lo{}, hi{};
    std::array<int, Dim> cells{};
    for (int k = 0; k < Dim; ++k) {
      lo[k] = info.lower[k];
      hi[k] = info.upper[k];
      cells[k] = n;
    }
    return build_box_mesh<Dim>(lo, hi, cells);
  }
}

template <int Dim>
LevelSet<Dim> case_levelset(const RunSpec& s) {
  if constexpr (Dim == 1) {
    if (s.case_name == "slopes") return piecewise_affine_1d_case();
    return interval_case(s.half_width);
  } else if constexpr (Dim == 2) {
    if (s.case_name == "circle") return circle_case(s.circle);
    if (s.case_name == "step") return step_case();
    if (s.case_name == "arctan_noise") return arctan_noise_case(s.noise);
    return star_case(s.star);
  } else {
    return torus_case(s.torus);
  }
}

namespace detail {

// Maps a key to where it was set: its line in the file, or the command line.
class KeyLocator {
 public:
  KeyLocator(std::string text, std::set<std::string> overridden)
      : text_(std::move(text)), overridden_(std::move(overridden)) {}

  [[nodiscard]] std::string where(const std::string& key) const {
    if (overridden_.count(key)) return "command line";
    const std::string quoted = "\"" + key + "\"";
    const auto pos = text_.find(quoted);
    if (pos == std::string::npos) return {};
    return "line " + std::to_string(1 + std::count(text_.begin(), text_.begin() + pos, '\n'));
  }

 private:
  std::string text_;
  std::set<std::string> overridden_;
};

template <class T>
T get_as(const nlohmann::json& j, const std::string& key, const KeyLocator& loc, const char* what) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(loc.where(key), key, std::string("expected ") + what);
  }
}

template <class E>
E get_enum(const nlohmann::json& j, const std::string& key, const KeyLocator& loc,
           const std::vector<std::pair<std::string, E>>& names) {
  const auto s = get_as<std::string>(j, key, loc, "a string");
  for (const auto& [n, e] : names)
    if (n == s) return e;
  std::string opts;
  for (const auto& [n, e] : names) opts += (opts.empty() ? "" : ", ") + n;
  throw ConfigError(loc.where(key), key, "'" + s + "' is not one of " + opts);
}

}  // namespace detail

/// Parses a merged JSON document. `text` is the original file contents (used
/// for line numbers) and `overridden` the keys that came from the command line.
inline RunSpec parse_runspec(const nlohmann::json& j, const std::string& text = {},
                             const std::set<std::string>& overridden = {}) {
  using detail::get_as;
  const detail::KeyLocator loc(text, overridden);
  if (!j.is_object()) throw ConfigError("", "", "top level must be a JSON object");

  static const std::set<std::string> known = {
      "case",     "n",         "n_list",    "center",     "radius",        "noise_amplitude", "seed",
      "rays",     "major_radius", "minor_radius", "half_width", "mode",     "scheme",          "gamma_d",
      "eps_grad", "stop_rule", "stop_eps",  "max_iters",  "annulus",       "predictor",       "quad_degree",
      "solver_tol", "max_flat_fraction", "iterations", "out", "export",    "variants"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError(loc.where(key), key, "unknown key");

  RunSpec s;
  if (j.contains("case")) s.case_name = get_as<std::string>(j, "case", loc, "a string");
  try {
    find_case(s.case_name);
  } catch (const ConfigError&) {
    throw ConfigError(loc.where("case"), "case", "unknown case '" + s.case_name + "'");
  }

  if (j.contains("n")) s.n = get_as<int>(j, "n", loc, "an integer");
  if (s.n < 1) throw ConfigError(loc.where("n"), "n", "must be at least 1");
  if (j.contains("n_list")) {
    s.n_list = get_as<std::vector<int>>(j, "n_list", loc, "a list of integers");
    std::set<int> seen;
    for (int n : s.n_list) {
      if (n < 1) throw ConfigError(loc.where("n_list"), "n_list", "entries must be at least 1");
      if (!seen.insert(n).second)
        throw ConfigError(loc.where("n_list"), "n_list", "duplicate resolution " + std::to_string(n));
    }
  }

  if (j.contains("center")) {
    const auto c = get_as<std::vector<double>>(j, "center", loc, "a list of two numbers");
    if (c.size() != 2) throw ConfigError(loc.where("center"), "center", "expected a list of two numbers");
    s.circle.cx = s.star.cx = c[0];
    s.circle.cy = s.star.cy = c[1];
  }
  if (j.contains("radius")) {
    s.circle.radius = get_as<double>(j, "radius", loc, "a number");
    if (!(s.circle.radius > 0.0)) throw ConfigError(loc.where("radius"), "radius", "must be positive");
  }
  if (j.contains("noise_amplitude")) {
    s.noise.amplitude = get_as<double>(j, "noise_amplitude", loc, "a number");
    if (s.noise.amplitude < 0.0)
      throw ConfigError(loc.where("noise_amplitude"), "noise_amplitude", "must be non-negative");
  }
  if (j.contains("seed")) s.noise.seed = get_as<std::uint64_t>(j, "seed", loc, "a non-negative integer");
  if (j.contains("rays")) {
    s.star.rays = get_as<int>(j, "rays", loc, "an integer");
    if (s.star.rays < 1) throw ConfigError(loc.where("rays"), "rays", "must be at least 1");
  }
  if (j.contains("major_radius")) s.torus.major = get_as<double>(j, "major_radius", loc, "a number");
  if (j.contains("minor_radius")) s.torus.minor = get_as<double>(j, "minor_radius", loc, "a number");
  if (!(s.torus.minor > 0.0 && s.torus.major > s.torus.minor))
    throw ConfigError(loc.where(j.contains("minor_radius") ? "minor_radius" : "major_radius"), "minor_radius",
                      "need 0 < minor_radius < major_radius");
  if (j.contains("half_width")) {
    s.half_width = get_as<double>(j, "half_width", loc, "a number");
    if (!(s.half_width > 0.0 && s.half_width < 1.0))
      throw ConfigError(loc.where("half_width"), "half_width", "must lie in (0, 1)");
  }

  if (j.contains("mode"))
    s.mode = detail::get_enum<Mode>(j, "mode", loc, {{"fitted", Mode::fitted}, {"unfitted", Mode::unfitted}});
  if (j.contains("scheme"))
    s.scheme = detail::get_enum<Scheme>(
        j, "scheme", loc, {{"original", Scheme::original}, {"basting", Scheme::basting}, {"adams", Scheme::adams}});
  if (j.contains("stop_rule"))
    s.stop_rule = detail::get_enum<StopRule>(j, "stop_rule", loc,
                                             {{"residual", StopRule::residual}, {"increment", StopRule::increment}});

  auto positive = [&](const char* key, double& field) {
    if (!j.contains(key)) return;
    field = get_as<double>(j, key, loc, "a number");
    if (!(field > 0.0)) throw ConfigError(loc.where(key), key, "must be positive");
  };
  if (j.contains("gamma_d")) {
    double g = 0.0;
    positive("gamma_d", g);
    s.gamma_d = g;
  }
  positive("eps_grad", s.eps_grad);
  positive("stop_eps", s.stop_eps);
  positive("solver_tol", s.solver_tol);
  if (j.contains("max_iters")) {
    s.max_iters = get_as<int>(j, "max_iters", loc, "an integer");
    if (s.max_iters < 1) throw ConfigError(loc.where("max_iters"), "max_iters", "must be at least 1");
  }
  if (j.contains("annulus") && !j.at("annulus").is_null()) {
    double w = 0.0;
    positive("annulus", w);
    s.annulus = w;
  }
  if (j.contains("predictor")) s.predictor = get_as<bool>(j, "predictor", loc, "true or false");
  if (j.contains("quad_degree")) {
    s.quad_degree = get_as<int>(j, "quad_degree", loc, "an integer");
    if (s.quad_degree < 1 || s.quad_degree > 5)
      throw ConfigError(loc.where("quad_degree"), "quad_degree", "must lie in [1, 5]");
  }
  if (j.contains("max_flat_fraction")) {
    s.max_flat_fraction = get_as<double>(j, "max_flat_fraction", loc, "a number");
    if (!(s.max_flat_fraction >= 0.0 && s.max_flat_fraction <= 1.0))
      throw ConfigError(loc.where("max_flat_fraction"), "max_flat_fraction", "must lie in [0, 1]");
  }
  if (j.contains("iterations") && !j.at("iterations").is_null()) {
    s.iterations = get_as<int>(j, "iterations", loc, "an integer");
    if (*s.iterations < 1) throw ConfigError(loc.where("iterations"), "iterations", "must be at least 1");
  }

  if (j.contains("out")) s.out = get_as<std::string>(j, "out", loc, "a path");
  if (j.contains("export")) {
    const auto& e = j.at("export");
    if (!e.is_object()) throw ConfigError(loc.where("export"), "export", "expected an object");
    for (const auto& [key, value] : e.items()) {
      if (!value.is_boolean()) throw ConfigError(loc.where(key), "export." + key, "expected true or false");
      if (key == "vtk") s.exports.vtk = value.get<bool>();
      else if (key == "history") s.exports.history = value.get<bool>();
      else if (key == "interface") s.exports.interface = value.get<bool>();
      else throw ConfigError(loc.where(key), "export." + key, "unknown key");
    }
  }
  if (j.contains("variants")) s.variants = get_as<std::vector<std::string>>(j, "variants", loc, "a list of strings");

  const auto& info = find_case(s.case_name);
  if (s.case_name == "slopes" || s.case_name == "interval") {
    // Both 1D cases need a vertex on every interface point.
    const double span = info.upper[0] - info.lower[0];
    const std::vector<double> roots = s.case_name == "slopes" ? std::vector<double>{0.5}
                                                              : std::vector<double>{-s.half_width, s.half_width};
    for (int n : resolutions(s)) {
      for (double r : roots) {
        const double t = (r - info.lower[0]) / span * n;
        if (std::abs(t - std::round(t)) > 1e-9) {
          const char* key = s.n_list.empty() ? "n" : "n_list";
          throw ConfigError(loc.where(key), key,
                            "resolution " + std::to_string(n) + " puts no vertex on the interface");
        }
      }
    }
  }
  return s;
}

/// Parses a JSON config file merged with command-line overrides.
inline RunSpec load_runspec(const std::optional<std::filesystem::path>& file, const nlohmann::json& overrides) {
  std::string text;
  nlohmann::json doc = nlohmann::json::object();
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("", "", "cannot open config file " + file->string());
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      const auto upto = std::min<std::size_t>(e.byte, text.size());
      const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
      throw ConfigError("line " + std::to_string(line), "", "malformed JSON");
    }
  }
  std::set<std::string> overridden;
  for (const auto& [key, value] : overrides.items()) {
    doc[key] = value;
    overridden.insert(key);
  }
  return parse_runspec(doc, text, overridden);
}

}  // namespace redist
