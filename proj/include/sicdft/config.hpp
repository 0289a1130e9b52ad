#pragma once

// Run configuration: JSON in, fully resolved JSON out.
//
//   {
//     "task": "polarizability",
//     "system": "h-chain(4)" | {"builtin": "h2", "grid": {"spacing": 0.6}} | {inline},
//     "scheme": "GSLAT" | ["LDA", "EXACT_SIC"],
//     "scf": {"step": 0.4, "tol_energy": 1e-11, ...},
//     "polarizability": {"field_strength": 5e-4, "axes": ["z", "x"], "linearity_check": true},
//     "series": {"n_list": [4, 6, 8], "d_list": [4, 8], "mode": "3d", "spacing": 0.7},
//     "output": {"path": "out.csv", "format": "csv"}
//   }
//
// to_json() emits every field with defaults filled in; parse_config() of that
// echo reproduces the same RunConfig.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sicdft/builtins.hpp"
#include "sicdft/errors.hpp"
#include "sicdft/polarizability.hpp"
#include "sicdft/scf.hpp"
#include "sicdft/schemes.hpp"
#include "sicdft/system.hpp"

namespace sicdft {

using Json = nlohmann::ordered_json;

enum class Task { scf, polarizability, chain_series, h4_sweep, compare };
enum class OutputFormat { csv, json };

inline const char* to_string(Task t) {
  switch (t) {
    case Task::scf: return "scf";
    case Task::polarizability: return "polarizability";
    case Task::chain_series: return "chain-series";
    case Task::h4_sweep: return "h4-sweep";
    case Task::compare: return "compare";
  }
  return "?";
}

inline Task parse_task(const std::string& s) {
  for (Task t : {Task::scf, Task::polarizability, Task::chain_series, Task::h4_sweep, Task::compare})
    if (s == to_string(t)) return t;
  throw ConfigurationError("task: unknown task '" + s +
                           "' (expected scf, polarizability, chain-series, h4-sweep or compare)");
}

inline const char* to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw ConfigurationError("output.format: unknown format '" + s + "' (expected csv or json)");
}

struct PolarizabilitySettings {
  double field_strength = kDefaultFieldStrength;
  std::vector<int> axes{2};
  bool linearity_check = true;

  friend bool operator==(const PolarizabilitySettings&, const PolarizabilitySettings&) = default;
};

struct SeriesSettings {
  std::vector<int> n_list{4, 6, 8};
  std::vector<double> d_list{3.0, 4.0, 5.0, 6.0, 8.0};
  GridMode mode = GridMode::full_3d;
  double spacing = kDefaultSpacing;

  friend bool operator==(const SeriesSettings&, const SeriesSettings&) = default;
};

struct OutputSettings {
  std::string path;  ///< empty: standard output
  OutputFormat format = OutputFormat::csv;

  friend bool operator==(const OutputSettings&, const OutputSettings&) = default;
};

struct RunConfig {
  Task task = Task::scf;
  /// Builtin the system was expanded from; empty for inline systems.
  std::string builtin;
  bool has_system = false;
  SystemSpec system;
  std::vector<SchemeId> schemes{SchemeId::lda};
  SCFConfig scf;
  PolarizabilitySettings polarizability;
  SeriesSettings series;
  OutputSettings output;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace config_detail {

inline void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed,
                       std::vector<std::string>& unknown) {
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      unknown.push_back(path.empty() ? key : path + "." + key);
  }
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigurationError(path + ": expected a number");
  return j.get<double>();
}

inline int integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigurationError(path + ": expected an integer");
  return j.get<int>();
}

inline bool boolean(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigurationError(path + ": expected true or false");
  return j.get<bool>();
}

inline std::string text(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigurationError(path + ": expected a string");
  return j.get<std::string>();
}

inline Vec3 vec3(const Json& j, const std::string& path) {
  if (j.is_number()) {
    const double v = j.get<double>();
    return {v, v, v};
  }
  if (!j.is_array() || j.size() != 3) throw ConfigurationError(path + ": expected a number or three numbers");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]"), number(j[2], path + "[2]")};
}

inline Json vec3_json(const Vec3& v) { return Json::array({v[0], v[1], v[2]}); }

inline GridMode parse_mode(const std::string& s, const std::string& path) {
  if (s == "3d") return GridMode::full_3d;
  if (s == "1d") return GridMode::soft_coulomb_1d;
  throw ConfigurationError(path + ": unknown grid mode '" + s + "' (expected 3d or 1d)");
}

inline void parse_grid(const Json& j, GridSpec& g, const std::string& path, std::vector<std::string>& unknown) {
  if (!j.is_object()) throw ConfigurationError(path + ": expected an object");
  check_keys(j, path, {"dims", "spacing", "origin", "mode", "box"}, unknown);
  if (j.contains("mode")) g.mode = parse_mode(text(j["mode"], path + ".mode"), path + ".mode");
  Vec3 box{0.0, 0.0, 0.0};
  for (int a = 0; a < 3; ++a) box[a] = g.extent(a);
  if (j.contains("spacing")) g.spacing = vec3(j["spacing"], path + ".spacing");
  if (j.contains("box")) box = vec3(j["box"], path + ".box");
  if (j.contains("dims")) {
    if (j.contains("box")) throw ConfigurationError(path + ": give either dims or box, not both");
    const auto& d = j["dims"];
    if (!d.is_array() || d.size() != 3) throw ConfigurationError(path + ".dims: expected three integers");
    for (int a = 0; a < 3; ++a) g.dims[a] = integer(d[a], path + ".dims[" + std::to_string(a) + "]");
  } else if (j.contains("box") || j.contains("spacing") || j.contains("mode")) {
    const GridSpec fresh = box_grid(box, 1.0, g.mode);
    for (int a = 0; a < 3; ++a) {
      if (!(g.spacing[a] > 0.0)) throw ConfigurationError(path + ".spacing: must be positive on every axis");
      g.dims[a] = fresh.dims[a] == 1 ? 1 : fft_friendly_size(static_cast<int>(std::ceil(box[a] / g.spacing[a] - 1e-9)));
    }
  }
  if (j.contains("origin")) g.origin = vec3(j["origin"], path + ".origin");
}

inline Ion parse_ion(const Json& j, const std::string& path, std::vector<std::string>& unknown) {
  if (!j.is_object()) throw ConfigurationError(path + ": expected an object");
  check_keys(j, path, {"species", "position", "charge", "pseudo"}, unknown);
  Ion ion;
  if (j.contains("species")) ion.species = text(j["species"], path + ".species");
  if (ion.species == "Na") ion.pseudo.core_width = kSodiumCoreWidth;
  if (!j.contains("position")) throw ConfigurationError(path + ".position: required");
  ion.position = vec3(j["position"], path + ".position");
  if (j.contains("charge")) ion.charge = number(j["charge"], path + ".charge");
  if (j.contains("pseudo")) {
    const auto& p = j["pseudo"];
    const std::string pp = path + ".pseudo";
    if (!p.is_object()) throw ConfigurationError(pp + ": expected an object");
    check_keys(p, pp, {"core_width", "gauss_amplitude", "gauss_width"}, unknown);
    if (p.contains("core_width")) ion.pseudo.core_width = number(p["core_width"], pp + ".core_width");
    if (p.contains("gauss_amplitude")) ion.pseudo.gauss_amplitude = number(p["gauss_amplitude"], pp + ".gauss_amplitude");
    if (p.contains("gauss_width")) ion.pseudo.gauss_width = number(p["gauss_width"], pp + ".gauss_width");
  }
  return ion;
}

inline SystemSpec parse_system(const Json& j, std::string& builtin, std::vector<std::string>& unknown) {
  const std::string path = "system";
  if (j.is_string()) {
    builtin = j.get<std::string>();
    return builtin_system(builtin);
  }
  if (!j.is_object()) throw ConfigurationError("system: expected a builtin name or an object");
  check_keys(j, path, {"builtin", "name", "ions", "electrons", "grid", "xc", "softening"}, unknown);
  SystemSpec s;
  if (j.contains("builtin")) {
    builtin = text(j["builtin"], "system.builtin");
    s = builtin_system(builtin);
  } else {
    builtin.clear();
    for (const char* key : {"ions", "electrons", "grid"})
      if (!j.contains(key)) throw ConfigurationError(std::string("system.") + key + ": required for an inline system");
    s.name = "inline";
  }
  if (j.contains("name")) s.name = text(j["name"], "system.name");
  if (j.contains("ions")) {
    const auto& arr = j["ions"];
    if (!arr.is_array()) throw ConfigurationError("system.ions: expected an array");
    s.ions.ions.clear();
    for (std::size_t k = 0; k < arr.size(); ++k)
      s.ions.ions.push_back(parse_ion(arr[k], "system.ions[" + std::to_string(k) + "]", unknown));
  }
  if (j.contains("electrons")) {
    const auto& e = j["electrons"];
    if (!e.is_object()) throw ConfigurationError("system.electrons: expected {\"up\": n, \"down\": m}");
    check_keys(e, "system.electrons", {"up", "down"}, unknown);
    if (e.contains("up")) s.n_up = integer(e["up"], "system.electrons.up");
    if (e.contains("down")) s.n_down = integer(e["down"], "system.electrons.down");
  }
  if (j.contains("grid")) parse_grid(j["grid"], s.grid, "system.grid", unknown);
  if (j.contains("xc")) {
    const auto& x = j["xc"];
    if (!x.is_object()) throw ConfigurationError("system.xc: expected an object");
    check_keys(x, "system.xc", {"correlation"}, unknown);
    if (x.contains("correlation")) s.xc.correlation = parse_correlation(text(x["correlation"], "system.xc.correlation"));
  }
  if (j.contains("softening")) s.softening = number(j["softening"], "system.softening");
  return s;
}

inline void parse_scf(const Json& j, SCFConfig& c, std::set<std::string>& given, std::vector<std::string>& unknown) {
  if (!j.is_object()) throw ConfigurationError("scf: expected an object");
  check_keys(j, "scf",
             {"step", "kinetic_shift", "max_iter", "tol_variance", "tol_energy", "tol_localize", "localize_every",
              "seed", "ortho"},
             unknown);
  for (const auto& [key, value] : j.items()) given.insert(key);
  if (j.contains("step")) c.step = number(j["step"], "scf.step");
  if (j.contains("kinetic_shift")) c.kinetic_shift = number(j["kinetic_shift"], "scf.kinetic_shift");
  if (j.contains("max_iter")) c.max_iter = integer(j["max_iter"], "scf.max_iter");
  if (j.contains("tol_variance")) c.tol_variance = number(j["tol_variance"], "scf.tol_variance");
  if (j.contains("tol_energy")) c.tol_energy = number(j["tol_energy"], "scf.tol_energy");
  if (j.contains("tol_localize")) c.tol_localize = number(j["tol_localize"], "scf.tol_localize");
  if (j.contains("localize_every")) c.localize_every = integer(j["localize_every"], "scf.localize_every");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigurationError("scf.seed: expected a non-negative integer");
    c.seed = j["seed"].get<std::uint32_t>();
  }
  if (j.contains("ortho")) {
    const std::string o = text(j["ortho"], "scf.ortho");
    if (o == "loewdin")
      c.ortho = OrthoMethod::loewdin;
    else if (o == "gram-schmidt")
      c.ortho = OrthoMethod::gram_schmidt;
    else
      throw ConfigurationError("scf.ortho: unknown method '" + o + "' (expected loewdin or gram-schmidt)");
  }
}

inline bool uses_fields(Task t) { return t != Task::scf; }

inline std::vector<SchemeId> default_schemes(Task t) {
  switch (t) {
    case Task::compare: return {kAllSchemes.begin(), kAllSchemes.end()};
    case Task::chain_series: return {SchemeId::lda, SchemeId::gslat, SchemeId::exact_sic};
    case Task::h4_sweep: return {SchemeId::slater, SchemeId::gslat, SchemeId::exact_sic};
    default: return {SchemeId::lda};
  }
}

}  // namespace config_detail

inline void validate(const RunConfig& cfg) {
  if (cfg.has_system) {
    try {
      cfg.system.validate();
    } catch (const ConfigurationError& e) {
      throw ConfigurationError(std::string("system.") + e.what());
    }
  } else if (cfg.task == Task::scf || cfg.task == Task::polarizability || cfg.task == Task::compare) {
    throw ConfigurationError(std::string("system: required for task ") + to_string(cfg.task));
  }
  if (cfg.schemes.empty()) throw ConfigurationError("scheme: at least one scheme is required");
  cfg.scf.validate();
  const auto& p = cfg.polarizability;
  if (p.axes.empty()) throw ConfigurationError("polarizability.axes: at least one axis is required");
  if (!(p.field_strength > 0.0) || p.field_strength > kMaxFieldStrength)
    throw ConfigurationError("polarizability.field_strength: must lie in (0, 1e-2]");
  if (cfg.task == Task::chain_series) {
    if (cfg.series.n_list.empty()) throw ConfigurationError("series.n_list: at least one chain length is required");
    for (int n : cfg.series.n_list)
      if (n < 2 || n % 2 != 0) throw ConfigurationError("series.n_list: chain lengths must be even and >= 2");
  }
  if (cfg.task == Task::h4_sweep) {
    if (cfg.series.d_list.empty()) throw ConfigurationError("series.d_list: at least one distance is required");
    for (double d : cfg.series.d_list)
      if (!(d > kH2Bond)) throw ConfigurationError("series.d_list: distances must exceed 1.46");
  }
  if (!(cfg.series.spacing > 0.0)) throw ConfigurationError("series.spacing: must be positive");
}

inline RunConfig parse_config(const Json& doc) {
  using namespace config_detail;
  if (!doc.is_object()) throw ConfigurationError("config: top level must be an object");
  std::vector<std::string> unknown;
  check_keys(doc, "", {"task", "system", "scheme", "scf", "polarizability", "series", "output"}, unknown);

  RunConfig cfg;
  if (!doc.contains("task")) throw ConfigurationError("task: required");
  cfg.task = parse_task(text(doc["task"], "task"));

  if (doc.contains("system")) {
    cfg.system = parse_system(doc["system"], cfg.builtin, unknown);
    cfg.has_system = true;
  }

  cfg.schemes = default_schemes(cfg.task);
  if (doc.contains("scheme")) {
    const auto& s = doc["scheme"];
    cfg.schemes.clear();
    if (s.is_string()) {
      cfg.schemes.push_back(parse_scheme(s.get<std::string>()));
    } else if (s.is_array()) {
      for (std::size_t k = 0; k < s.size(); ++k)
        cfg.schemes.push_back(parse_scheme(text(s[k], "scheme[" + std::to_string(k) + "]")));
    } else {
      throw ConfigurationError("scheme: expected a scheme id or a list of ids");
    }
  }

  std::set<std::string> given;
  if (doc.contains("scf")) parse_scf(doc["scf"], cfg.scf, given, unknown);
  if (uses_fields(cfg.task)) {
    if (!given.count("tol_energy")) cfg.scf.tol_energy = polarizability_scf().tol_energy;
    if (!given.count("tol_variance")) cfg.scf.tol_variance = polarizability_scf().tol_variance;
  }

  if (doc.contains("polarizability")) {
    const auto& p = doc["polarizability"];
    if (!p.is_object()) throw ConfigurationError("polarizability: expected an object");
    check_keys(p, "polarizability", {"field_strength", "axes", "linearity_check"}, unknown);
    if (p.contains("field_strength"))
      cfg.polarizability.field_strength = number(p["field_strength"], "polarizability.field_strength");
    if (p.contains("axes")) {
      const auto& a = p["axes"];
      cfg.polarizability.axes.clear();
      if (a.is_string()) {
        for (char c : a.get<std::string>()) cfg.polarizability.axes.push_back(parse_axis(std::string(1, c)));
      } else if (a.is_array()) {
        for (std::size_t k = 0; k < a.size(); ++k)
          cfg.polarizability.axes.push_back(parse_axis(text(a[k], "polarizability.axes[" + std::to_string(k) + "]")));
      } else {
        throw ConfigurationError("polarizability.axes: expected a list of axis names");
      }
    }
    if (p.contains("linearity_check"))
      cfg.polarizability.linearity_check = boolean(p["linearity_check"], "polarizability.linearity_check");
  }

  if (doc.contains("series")) {
    const auto& s = doc["series"];
    if (!s.is_object()) throw ConfigurationError("series: expected an object");
    check_keys(s, "series", {"n_list", "d_list", "mode", "spacing"}, unknown);
    if (s.contains("n_list")) {
      if (!s["n_list"].is_array()) throw ConfigurationError("series.n_list: expected an array");
      cfg.series.n_list.clear();
      for (std::size_t k = 0; k < s["n_list"].size(); ++k)
        cfg.series.n_list.push_back(integer(s["n_list"][k], "series.n_list[" + std::to_string(k) + "]"));
    }
    if (s.contains("d_list")) {
      if (!s["d_list"].is_array()) throw ConfigurationError("series.d_list: expected an array");
      cfg.series.d_list.clear();
      for (std::size_t k = 0; k < s["d_list"].size(); ++k)
        cfg.series.d_list.push_back(number(s["d_list"][k], "series.d_list[" + std::to_string(k) + "]"));
    }
    if (s.contains("mode")) cfg.series.mode = parse_mode(text(s["mode"], "series.mode"), "series.mode");
    if (s.contains("spacing")) cfg.series.spacing = number(s["spacing"], "series.spacing");
  }

  if (doc.contains("output")) {
    const auto& o = doc["output"];
    if (!o.is_object()) throw ConfigurationError("output: expected an object");
    check_keys(o, "output", {"path", "format"}, unknown);
    if (o.contains("path")) cfg.output.path = text(o["path"], "output.path");
    if (o.contains("format")) cfg.output.format = parse_format(text(o["format"], "output.format"));
  }

  if (!unknown.empty()) {
    std::string msg = "unknown keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigurationError(msg);
  }
  validate(cfg);
  return cfg;
}

inline RunConfig parse_config(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigurationError(std::string("config: malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

inline RunConfig parse_config(const char* text) { return parse_config(std::string(text)); }

inline Json to_json(const SystemSpec& s, const std::string& builtin) {
  using config_detail::vec3_json;
  Json j;
  if (!builtin.empty()) j["builtin"] = builtin;
  j["name"] = s.name;
  Json ions = Json::array();
  for (const auto& ion : s.ions.ions) {
    ions.push_back({{"species", ion.species},
                    {"position", vec3_json(ion.position)},
                    {"charge", ion.charge},
                    {"pseudo",
                     {{"core_width", ion.pseudo.core_width},
                      {"gauss_amplitude", ion.pseudo.gauss_amplitude},
                      {"gauss_width", ion.pseudo.gauss_width}}}});
  }
  j["ions"] = ions;
  j["electrons"] = {{"up", s.n_up}, {"down", s.n_down}};
  j["grid"] = {{"dims", Json::array({s.grid.dims[0], s.grid.dims[1], s.grid.dims[2]})},
               {"spacing", vec3_json(s.grid.spacing)},
               {"origin", vec3_json(s.grid.origin)},
               {"mode", to_string(s.grid.mode)}};
  j["xc"] = {{"correlation", to_string(s.xc.correlation)}};
  j["softening"] = s.softening;
  return j;
}

inline Json to_json(const SCFConfig& c) {
  return {{"step", c.step},
          {"kinetic_shift", c.kinetic_shift},
          {"max_iter", c.max_iter},
          {"tol_variance", c.tol_variance},
          {"tol_energy", c.tol_energy},
          {"tol_localize", c.tol_localize},
          {"localize_every", c.localize_every},
          {"seed", c.seed},
          {"ortho", c.ortho == OrthoMethod::loewdin ? "loewdin" : "gram-schmidt"}};
}

/// Fully resolved configuration.
inline Json to_json(const RunConfig& cfg) {
  Json j;
  j["task"] = to_string(cfg.task);
  if (cfg.has_system) j["system"] = to_json(cfg.system, cfg.builtin);
  Json schemes = Json::array();
  for (SchemeId s : cfg.schemes) schemes.push_back(to_string(s));
  j["scheme"] = schemes;
  j["scf"] = to_json(cfg.scf);
  Json axes = Json::array();
  for (int a : cfg.polarizability.axes) axes.push_back(std::string(1, axis_name(a)));
  j["polarizability"] = {{"field_strength", cfg.polarizability.field_strength},
                         {"axes", axes},
                         {"linearity_check", cfg.polarizability.linearity_check}};
  j["series"] = {{"n_list", cfg.series.n_list},
                 {"d_list", cfg.series.d_list},
                 {"mode", to_string(cfg.series.mode)},
                 {"spacing", cfg.series.spacing}};
  j["output"] = {{"path", cfg.output.path}, {"format", to_string(cfg.output.format)}};
  return j;
}

}  // namespace sicdft
