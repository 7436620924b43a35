#pragma once
// Experiment configuration: flat JSON with sections
// {grid, operator, phi, perturbation, time, experiment}. Every field has a
// default; "inf" encodes an infinite Lebesgue index.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlsg/operators.hpp"
#include "nlsg/semigroup.hpp"

namespace nlsg {

using json = nlohmann::json;

class ConfigError : public DomainError {
 public:
  using DomainError::DomainError;
};

struct ExperimentConfig {
  // grid
  int dim = 1;
  int nx = 2001;
  int ny = 41;
  double xlo = -20.0, xhi = 20.0;
  double ylo = -20.0, yhi = 20.0;
  // operator
  double p = 3.0;
  std::string bc = "dirichlet";
  double robin_b = 1.0;
  double eps_reg = 1e-8;
  // phi
  std::string phi = "identity";
  double phi_m = 1.0;
  // perturbation
  std::string perturbation = "none";
  double lipschitz = 0.0;
  // time
  double t_end = 50.0;
  long steps = 5000;
  // experiment
  std::string initial = "bump";  // bump | barenblatt | random
  double center = 0.0;
  double width = 0.5;
  double initial_t = 1.0;        // Barenblatt start time
  bool normalize = true;         // scale u0 to unit mass
  double t_lo = 0.5, t_hi = 50.0;
  std::string norm = "inf";
  double s = 1.0;
  std::optional<double> m0;
  std::optional<double> theta;
  double tol = 0.15;
  double r2_min = 0.98;
  int guard_cells = 5;
  double support_rel = 1e-12;
  double extinction_rel = 1e-12;
  std::uint64_t seed = 20240917;
  int trials = 100;

  Grid make_grid() const {
    if (dim == 1) return Grid::line(nx, xlo, xhi);
    if (dim == 2) return Grid::rectangle(nx, ny, xlo, xhi, ylo, yhi);
    throw ConfigError("grid.dim must be 1 or 2");
  }

  OperatorSpec make_spec() const {
    OperatorSpec spec;
    spec.grid = make_grid();
    spec.p = p;
    if (bc == "dirichlet")
      spec.bc = BoundaryCondition::dirichlet();
    else if (bc == "neumann")
      spec.bc = BoundaryCondition::neumann();
    else if (bc == "robin")
      spec.bc = BoundaryCondition::robin(robin_b);
    else
      throw ConfigError("operator.bc must be dirichlet, neumann or robin, got '" + bc + "'");
    if (phi == "identity")
      spec.phi = PhiSpec::identity();
    else if (phi == "power")
      spec.phi = PhiSpec::power(phi_m);
    else
      throw ConfigError("phi.kind must be identity or power, got '" + phi + "'");
    if (perturbation == "linear")
      spec.perturbation = LipschitzF::linear(lipschitz);
    else if (perturbation == "sine")
      spec.perturbation = LipschitzF::sine(lipschitz);
    else if (perturbation != "none")
      throw ConfigError("perturbation.kind must be none, linear or sine, got '" + perturbation + "'");
    spec.eps_reg = eps_reg;
    spec.validate();
    return spec;
  }

  TimeGrid make_time_grid() const {
    TimeGrid tg{t_end, steps};
    tg.validate();
    return tg;
  }

  BoundaryKind boundary_kind() const { return make_spec().bc.kind; }
  LebesgueIndex norm_index() const { return LebesgueIndex::parse(norm); }
};

namespace detail {
inline json optional_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
}  // namespace detail

inline json to_json(const ExperimentConfig& c) {
  return json{
      {"grid", {{"dim", c.dim}, {"n", c.nx}, {"ny", c.ny}, {"lo", c.xlo}, {"hi", c.xhi}, {"ylo", c.ylo}, {"yhi", c.yhi}}},
      {"operator", {{"p", c.p}, {"bc", c.bc}, {"b", c.robin_b}, {"eps_reg", c.eps_reg}}},
      {"phi", {{"kind", c.phi}, {"m", c.phi_m}}},
      {"perturbation", {{"kind", c.perturbation}, {"L", c.lipschitz}}},
      {"time", {{"t_end", c.t_end}, {"steps", c.steps}}},
      {"experiment",
       {{"initial", c.initial},
        {"center", c.center},
        {"width", c.width},
        {"initial_t", c.initial_t},
        {"normalize", c.normalize},
        {"t_lo", c.t_lo},
        {"t_hi", c.t_hi},
        {"norm", c.norm},
        {"s", c.s},
        {"m0", detail::optional_to_json(c.m0)},
        {"theta", detail::optional_to_json(c.theta)},
        {"tol", c.tol},
        {"r2_min", c.r2_min},
        {"guard_cells", c.guard_cells},
        {"support_rel", c.support_rel},
        {"extinction_rel", c.extinction_rel},
        {"seed", c.seed},
        {"trials", c.trials}}},
  };
}

namespace detail {

template <class T>
void read_field(const json& sec, const char* section, const char* key, T& out) {
  if (!sec.contains(key)) return;
  try {
    out = sec.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(section) + "." + key + ": " + e.what());
  }
}

inline void read_optional(const json& sec, const char* section, const char* key, std::optional<double>& out) {
  if (!sec.contains(key)) return;
  if (sec.at(key).is_null()) {
    out.reset();
    return;
  }
  double v = 0.0;
  read_field(sec, section, key, v);
  out = v;
}

inline void check_keys(const json& sec, const char* section, std::initializer_list<const char*> keys) {
  if (!sec.is_object()) throw ConfigError(std::string("section '") + section + "' must be an object");
  for (auto it = sec.begin(); it != sec.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ConfigError(std::string("unknown key ") + section + "." + it.key());
  }
}

}  // namespace detail

inline ExperimentConfig config_from_json(const json& j, ExperimentConfig c = {}) {
  using detail::check_keys;
  using detail::read_field;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k != "grid" && k != "operator" && k != "phi" && k != "perturbation" && k != "time" && k != "experiment")
      throw ConfigError("unknown config section '" + k + "'");
  }
  const json empty = json::object();
  auto section = [&](const char* name) -> const json& { return j.contains(name) ? j.at(name) : empty; };

  const json& g = section("grid");
  check_keys(g, "grid", {"dim", "n", "ny", "lo", "hi", "ylo", "yhi"});
  read_field(g, "grid", "dim", c.dim);
  read_field(g, "grid", "n", c.nx);
  read_field(g, "grid", "ny", c.ny);
  read_field(g, "grid", "lo", c.xlo);
  read_field(g, "grid", "hi", c.xhi);
  read_field(g, "grid", "ylo", c.ylo);
  read_field(g, "grid", "yhi", c.yhi);

  const json& op = section("operator");
  check_keys(op, "operator", {"p", "bc", "b", "eps_reg"});
  read_field(op, "operator", "p", c.p);
  read_field(op, "operator", "bc", c.bc);
  read_field(op, "operator", "b", c.robin_b);
  read_field(op, "operator", "eps_reg", c.eps_reg);

  const json& ph = section("phi");
  check_keys(ph, "phi", {"kind", "m"});
  read_field(ph, "phi", "kind", c.phi);
  read_field(ph, "phi", "m", c.phi_m);

  const json& pe = section("perturbation");
  check_keys(pe, "perturbation", {"kind", "L"});
  read_field(pe, "perturbation", "kind", c.perturbation);
  read_field(pe, "perturbation", "L", c.lipschitz);

  const json& t = section("time");
  check_keys(t, "time", {"t_end", "steps"});
  read_field(t, "time", "t_end", c.t_end);
  read_field(t, "time", "steps", c.steps);

  const json& e = section("experiment");
  check_keys(e, "experiment",
             {"initial", "center", "width", "initial_t", "normalize", "t_lo", "t_hi", "norm", "s", "m0", "theta", "tol",
              "r2_min", "guard_cells", "support_rel", "extinction_rel", "seed", "trials"});
  read_field(e, "experiment", "initial", c.initial);
  read_field(e, "experiment", "center", c.center);
  read_field(e, "experiment", "width", c.width);
  read_field(e, "experiment", "initial_t", c.initial_t);
  read_field(e, "experiment", "normalize", c.normalize);
  read_field(e, "experiment", "t_lo", c.t_lo);
  read_field(e, "experiment", "t_hi", c.t_hi);
  if (e.contains("norm")) {
    // accept both "inf" and numbers
    c.norm = e.at("norm").is_string() ? e.at("norm").get<std::string>() : LebesgueIndex::finite(e.at("norm").get<double>()).to_string();
  }
  read_field(e, "experiment", "s", c.s);
  detail::read_optional(e, "experiment", "m0", c.m0);
  detail::read_optional(e, "experiment", "theta", c.theta);
  read_field(e, "experiment", "tol", c.tol);
  read_field(e, "experiment", "r2_min", c.r2_min);
  read_field(e, "experiment", "guard_cells", c.guard_cells);
  read_field(e, "experiment", "support_rel", c.support_rel);
  read_field(e, "experiment", "extinction_rel", c.extinction_rel);
  read_field(e, "experiment", "seed", c.seed);
  read_field(e, "experiment", "trials", c.trials);

  if (!(c.t_lo < c.t_hi)) throw ConfigError("experiment.t_lo must be < experiment.t_hi");
  LebesgueIndex::parse(c.norm);
  return c;
}

/// Parses "section.key=value". Values are read as JSON when possible, otherwise as strings.
inline void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ConfigError("override must look like section.key=value, got '" + assignment + "'");
  const std::string section = assignment.substr(0, dot);
  const std::string key = assignment.substr(dot + 1, eq - dot - 1);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  if (!j.contains(section)) j[section] = json::object();
  j[section][key] = value;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j = json::parse(in, nullptr, false, true);
  if (j.is_discarded()) throw ConfigError("config file '" + path + "' is not valid JSON");
  return j;
}

inline ExperimentConfig load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides,
                                    ExperimentConfig defaults = {}) {
  json j = path ? read_json_file(*path) : json::object();
  for (const auto& o : overrides) apply_override(j, o);
  return config_from_json(j, defaults);
}

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
inline std::string config_hash(const json& canonical) {
  const std::string s = canonical.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string config_hash(const ExperimentConfig& c) { return config_hash(to_json(c)); }

}  // namespace nlsg
