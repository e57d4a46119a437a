#include "qwork/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace qwork {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
void read(const json& obj, const char* key, std::optional<T>& out, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
void write_opt(ordered_json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

ModelConfig parse_model(const json& j) {
  check_keys(j, "model", {"sites", "bosons", "u", "U", "K", "Xc", "Xa", "edge_interaction_only", "coupled"});
  ModelConfig m;
  read(j, "sites", m.sites, "model");
  read(j, "bosons", m.bosons, "model");
  read(j, "u", m.u, "model");
  read(j, "U", m.U, "model");
  read(j, "K", m.K, "model");
  read(j, "Xc", m.Xc, "model");
  read(j, "Xa", m.Xa, "model");
  read(j, "edge_interaction_only", m.edge_interaction_only, "model");
  read(j, "coupled", m.coupled, "model");
  if (m.u.has_value() == m.U.has_value()) throw ConfigError("model: give exactly one of u or U");
  return m;
}

AgentConfig parse_agent(const json& j) {
  check_keys(j, "agent", {"omega", "ell", "X0", "n_ph", "n_max"});
  AgentConfig a;
  read(j, "omega", a.omega, "agent");
  read(j, "ell", a.ell, "agent");
  read(j, "X0", a.X0, "agent");
  read(j, "n_ph", a.n_ph, "agent");
  read(j, "n_max", a.n_max, "agent");
  if (a.X0.has_value() == a.n_ph.has_value()) throw ConfigError("agent: give exactly one of X0 or n_ph");
  return a;
}

NumericsConfig parse_numerics(const json& j) {
  check_keys(j, "numerics", {"dt", "driven_dt", "checkpoints", "krylov_dim", "krylov_tol", "leakage_tol",
                             "t_final", "occupation_threshold"});
  NumericsConfig n;
  read(j, "dt", n.dt, "numerics");
  read(j, "driven_dt", n.driven_dt, "numerics");
  read(j, "checkpoints", n.checkpoints, "numerics");
  read(j, "krylov_dim", n.krylov_dim, "numerics");
  read(j, "krylov_tol", n.krylov_tol, "numerics");
  read(j, "leakage_tol", n.leakage_tol, "numerics");
  read(j, "t_final", n.t_final, "numerics");
  read(j, "occupation_threshold", n.occupation_threshold, "numerics");
  return n;
}

DesignSection parse_design(const json& j) {
  check_keys(j, "design", {"W0", "v0", "dv0", "dX0", "dW0", "omega_min", "omega_max", "omega_points",
                           "mass_min", "mass_max", "mass_points", "lw_values", "l2w_values",
                           "strong_threshold", "agents"});
  DesignSection d;
  read(j, "W0", d.W0, "design");
  read(j, "v0", d.v0, "design");
  read(j, "dv0", d.dv0, "design");
  read(j, "dX0", d.dX0, "design");
  read(j, "dW0", d.dW0, "design");
  read(j, "omega_min", d.omega_min, "design");
  read(j, "omega_max", d.omega_max, "design");
  read(j, "omega_points", d.omega_points, "design");
  read(j, "mass_min", d.mass_min, "design");
  read(j, "mass_max", d.mass_max, "design");
  read(j, "mass_points", d.mass_points, "design");
  read(j, "lw_values", d.lw_values, "design");
  read(j, "l2w_values", d.l2w_values, "design");
  read(j, "strong_threshold", d.strong_threshold, "design");
  if (j.contains("agents")) {
    for (const auto& a : j.at("agents")) {
      check_keys(a, "design.agents", {"name", "flavor", "omega", "M", "ell"});
      NamedAgent n;
      read(a, "name", n.name, "design.agents");
      read(a, "flavor", n.flavor, "design.agents");
      read(a, "omega", n.omega, "design.agents");
      read(a, "M", n.M, "design.agents");
      read(a, "ell", n.ell, "design.agents");
      if (n.flavor != "oscillator" && n.flavor != "piston")
        throw ConfigError("design.agents: flavor must be oscillator or piston");
      d.agents.push_back(n);
    }
  }
  return d;
}

SweepX0Section parse_sweep_x0(const json& j) {
  check_keys(j, "sweep_x0", {"x0_factors", "v0_values", "insensitivity_tol", "adiabatic_slowdown"});
  SweepX0Section s;
  read(j, "x0_factors", s.x0_factors, "sweep_x0");
  read(j, "v0_values", s.v0_values, "sweep_x0");
  read(j, "insensitivity_tol", s.insensitivity_tol, "sweep_x0");
  read(j, "adiabatic_slowdown", s.adiabatic_slowdown, "sweep_x0");
  return s;
}

SweepOmegaSection parse_sweep_omega(const json& j) {
  check_keys(j, "sweep_omega", {"path", "omegas", "v0", "reference_omega", "reference_ell", "min_x0_factor"});
  SweepOmegaSection s;
  read(j, "path", s.path, "sweep_omega");
  read(j, "omegas", s.omegas, "sweep_omega");
  read(j, "v0", s.v0, "sweep_omega");
  read(j, "reference_omega", s.reference_omega, "sweep_omega");
  read(j, "reference_ell", s.reference_ell, "sweep_omega");
  read(j, "min_x0_factor", s.min_x0_factor, "sweep_omega");
  if (s.path != "constant_dvbr" && s.path != "constant_dvuc" && s.path != "both")
    throw ConfigError("sweep_omega.path: expected constant_dvbr, constant_dvuc or both");
  return s;
}

InterferenceSection parse_interference(const json& j) {
  check_keys(j, "interference", {"partner", "classical_omega_min", "classical_omega_max",
                                 "classical_omega_points", "quantum_omegas", "ells", "dX0", "dW0", "lz_q",
                                 "lz_window_min", "lz_window_max", "envelope_tol"});
  InterferenceSection s;
  read(j, "partner", s.partner, "interference");
  read(j, "classical_omega_min", s.classical_omega_min, "interference");
  read(j, "classical_omega_max", s.classical_omega_max, "interference");
  read(j, "classical_omega_points", s.classical_omega_points, "interference");
  read(j, "quantum_omegas", s.quantum_omegas, "interference");
  read(j, "ells", s.ells, "interference");
  read(j, "dX0", s.dX0, "interference");
  read(j, "dW0", s.dW0, "interference");
  read(j, "lz_q", s.lz_q, "interference");
  read(j, "lz_window_min", s.lz_window_min, "interference");
  read(j, "lz_window_max", s.lz_window_max, "interference");
  read(j, "envelope_tol", s.envelope_tol, "interference");
  return s;
}

FidelitySection parse_fidelity(const json& j) {
  check_keys(j, "fidelity", {"tau_points", "phi_points"});
  FidelitySection s;
  read(j, "tau_points", s.tau_points, "fidelity");
  read(j, "phi_points", s.phi_points, "fidelity");
  return s;
}

IdealAgentSection parse_ideal_agent(const json& j) {
  check_keys(j, "ideal_agent", {"mass_factors", "tv_tol", "momentum_tol"});
  IdealAgentSection s;
  read(j, "mass_factors", s.mass_factors, "ideal_agent");
  read(j, "tv_tol", s.tv_tol, "ideal_agent");
  read(j, "momentum_tol", s.momentum_tol, "ideal_agent");
  return s;
}

RunConfig parse_document(const json& doc) {
  const json& j = doc.contains("config") && doc.at("config").is_object() ? doc.at("config") : doc;
  check_keys(j, "config", {"name", "model", "agent", "nu0", "protocols", "numerics", "sweep", "design",
                           "sweep_x0", "sweep_omega", "interference", "fidelity", "ideal_agent"});
  RunConfig c;
  read(j, "name", c.name, "config");
  if (j.contains("model")) c.model = parse_model(j.at("model"));
  if (j.contains("agent")) c.agent = parse_agent(j.at("agent"));
  read(j, "nu0", c.nu0, "config");
  if (j.contains("protocols")) {
    c.protocols.clear();
    for (const auto& p : j.at("protocols")) c.protocols.push_back(parse_protocol(p.get<std::string>()));
  }
  if (j.contains("numerics")) c.numerics = parse_numerics(j.at("numerics"));
  if (j.contains("sweep")) {
    check_keys(j.at("sweep"), "sweep", {"parameter", "values"});
    SweepConfig s;
    read(j.at("sweep"), "parameter", s.parameter, "sweep");
    read(j.at("sweep"), "values", s.values, "sweep");
    c.sweep = s;
  }
  if (j.contains("design")) c.design = parse_design(j.at("design"));
  if (j.contains("sweep_x0")) c.sweep_x0 = parse_sweep_x0(j.at("sweep_x0"));
  if (j.contains("sweep_omega")) c.sweep_omega = parse_sweep_omega(j.at("sweep_omega"));
  if (j.contains("interference")) c.interference = parse_interference(j.at("interference"));
  if (j.contains("fidelity")) c.fidelity = parse_fidelity(j.at("fidelity"));
  if (j.contains("ideal_agent")) c.ideal_agent = parse_ideal_agent(j.at("ideal_agent"));
  return c;
}

}  // namespace

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::quantum: return "quantum";
    case Protocol::classical_cosine: return "classical_cosine";
    case Protocol::recorded_qc: return "recorded_qc";
  }
  return "?";
}

Protocol parse_protocol(std::string_view name) {
  if (name == "quantum") return Protocol::quantum;
  if (name == "classical_cosine") return Protocol::classical_cosine;
  if (name == "recorded_qc") return Protocol::recorded_qc;
  throw ConfigError("unknown protocol '" + std::string(name) + "'");
}

ModelParams ModelConfig::params() const {
  ModelParams p = u ? ModelParams::from_u(sites, bosons, *u, K, Xc, Xa)
                    : ModelParams::make(sites, bosons, U.value_or(0.0), K, Xc, Xa);
  p.edge_interaction_only = edge_interaction_only;
  return p;
}

double AgentConfig::launch_X0() const {
  if (X0) return *X0;
  if (n_ph) return ell * std::sqrt(*n_ph);
  throw ConfigError("agent: X0 or n_ph required");
}

bool RunConfig::wants(Protocol p) const {
  for (Protocol q : protocols)
    if (q == p) return true;
  return false;
}

void RunConfig::validate() const {
  if (model.u.has_value() == model.U.has_value()) throw ConfigError("model: give exactly one of u or U");
  try {
    model.params().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  if (!(agent.omega > 0) || !(agent.ell > 0)) throw ConfigError("agent: omega and ell must be positive");
  if (agent.X0.has_value() == agent.n_ph.has_value()) throw ConfigError("agent: give exactly one of X0 or n_ph");
  if (agent.n_ph && !(*agent.n_ph > 0)) throw ConfigError("agent: n_ph must be positive");
  if (agent.n_max && *agent.n_max < 1) throw ConfigError("agent: n_max must be at least 1");
  const auto dim = static_cast<int>(fock_dimension(model.sites, model.bosons));
  if (nu0 < 0 || nu0 >= dim) throw ConfigError("nu0 out of range [0, " + std::to_string(dim) + ")");
  if (!(numerics.dt > 0) || !(numerics.driven_dt > 0)) throw ConfigError("numerics: dt must be positive");
  if (numerics.checkpoints < 1) throw ConfigError("numerics: checkpoints must be at least 1");
  if (numerics.krylov_dim < 2) throw ConfigError("numerics: krylov_dim must be at least 2");
  if (interference && (interference->partner < 0 || interference->partner >= dim || interference->partner == nu0))
    throw ConfigError("interference.partner must be a level other than nu0");
  if (sweep) {
    static const std::set<std::string> known{"omega", "ell", "X0", "nu0", "u", "U"};
    if (!known.count(sweep->parameter)) throw ConfigError("sweep.parameter: unknown '" + sweep->parameter + "'");
  }
}

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_document(doc);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  RunConfig c = parse_config(ss.str());
  return c;
}

std::string to_json(const RunConfig& c) {
  ordered_json j;
  j["name"] = c.name;
  ordered_json m;
  m["sites"] = c.model.sites;
  m["bosons"] = c.model.bosons;
  write_opt(m, "u", c.model.u);
  write_opt(m, "U", c.model.U);
  m["K"] = c.model.K;
  m["Xc"] = c.model.Xc;
  write_opt(m, "Xa", c.model.Xa);
  m["edge_interaction_only"] = c.model.edge_interaction_only;
  m["coupled"] = c.model.coupled;
  j["model"] = m;
  ordered_json a;
  a["omega"] = c.agent.omega;
  a["ell"] = c.agent.ell;
  write_opt(a, "X0", c.agent.X0);
  write_opt(a, "n_ph", c.agent.n_ph);
  write_opt(a, "n_max", c.agent.n_max);
  j["agent"] = a;
  j["nu0"] = c.nu0;
  j["protocols"] = ordered_json::array();
  for (Protocol p : c.protocols) j["protocols"].push_back(std::string(to_string(p)));
  const NumericsConfig& n = c.numerics;
  ordered_json nj;
  nj["dt"] = n.dt;
  nj["driven_dt"] = n.driven_dt;
  nj["checkpoints"] = n.checkpoints;
  nj["krylov_dim"] = n.krylov_dim;
  nj["krylov_tol"] = n.krylov_tol;
  nj["leakage_tol"] = n.leakage_tol;
  write_opt(nj, "t_final", n.t_final);
  nj["occupation_threshold"] = n.occupation_threshold;
  j["numerics"] = nj;
  if (c.sweep) j["sweep"] = {{"parameter", c.sweep->parameter}, {"values", c.sweep->values}};
  if (c.design) {
    const DesignSection& d = *c.design;
    ordered_json dj;
    dj["W0"] = d.W0;
    dj["v0"] = d.v0;
    dj["dv0"] = d.dv0;
    write_opt(dj, "dX0", d.dX0);
    write_opt(dj, "dW0", d.dW0);
    dj["omega_min"] = d.omega_min;
    dj["omega_max"] = d.omega_max;
    dj["omega_points"] = d.omega_points;
    dj["mass_min"] = d.mass_min;
    dj["mass_max"] = d.mass_max;
    dj["mass_points"] = d.mass_points;
    dj["lw_values"] = d.lw_values;
    dj["l2w_values"] = d.l2w_values;
    dj["strong_threshold"] = d.strong_threshold;
    dj["agents"] = ordered_json::array();
    for (const auto& ag : d.agents) {
      ordered_json aj;
      aj["name"] = ag.name;
      aj["flavor"] = ag.flavor;
      if (ag.flavor == "oscillator") aj["omega"] = ag.omega;
      else aj["M"] = ag.M;
      aj["ell"] = ag.ell;
      dj["agents"].push_back(aj);
    }
    j["design"] = dj;
  }
  if (c.sweep_x0) {
    const auto& s = *c.sweep_x0;
    ordered_json sj;
    sj["x0_factors"] = s.x0_factors;
    sj["v0_values"] = s.v0_values;
    sj["insensitivity_tol"] = s.insensitivity_tol;
    sj["adiabatic_slowdown"] = s.adiabatic_slowdown;
    j["sweep_x0"] = sj;
  }
  if (c.sweep_omega) {
    const auto& s = *c.sweep_omega;
    ordered_json sj;
    sj["path"] = s.path;
    sj["omegas"] = s.omegas;
    sj["v0"] = s.v0;
    sj["reference_omega"] = s.reference_omega;
    sj["reference_ell"] = s.reference_ell;
    sj["min_x0_factor"] = s.min_x0_factor;
    j["sweep_omega"] = sj;
  }
  if (c.interference) {
    const auto& s = *c.interference;
    ordered_json sj;
    sj["partner"] = s.partner;
    sj["classical_omega_min"] = s.classical_omega_min;
    sj["classical_omega_max"] = s.classical_omega_max;
    sj["classical_omega_points"] = s.classical_omega_points;
    sj["quantum_omegas"] = s.quantum_omegas;
    sj["ells"] = s.ells;
    sj["dX0"] = s.dX0;
    sj["dW0"] = s.dW0;
    sj["lz_q"] = s.lz_q;
    sj["lz_window_min"] = s.lz_window_min;
    sj["lz_window_max"] = s.lz_window_max;
    sj["envelope_tol"] = s.envelope_tol;
    j["interference"] = sj;
  }
  if (c.fidelity) j["fidelity"] = {{"tau_points", c.fidelity->tau_points}, {"phi_points", c.fidelity->phi_points}};
  if (c.ideal_agent) {
    ordered_json sj;
    sj["mass_factors"] = c.ideal_agent->mass_factors;
    sj["tv_tol"] = c.ideal_agent->tv_tol;
    sj["momentum_tol"] = c.ideal_agent->momentum_tol;
    j["ideal_agent"] = sj;
  }
  return j.dump(2);
}

RunConfig with_parameter(const RunConfig& base, const std::string& parameter, double value) {
  RunConfig c = base;
  c.sweep.reset();
  if (parameter == "omega") c.agent.omega = value;
  else if (parameter == "ell") c.agent.ell = value;
  else if (parameter == "X0") {
    c.agent.X0 = value;
    c.agent.n_ph.reset();
  } else if (parameter == "nu0") c.nu0 = static_cast<int>(std::lround(value));
  else if (parameter == "u") {
    c.model.u = value;
    c.model.U.reset();
  } else if (parameter == "U") {
    c.model.U = value;
    c.model.u.reset();
  } else {
    throw ConfigError("unknown sweep parameter '" + parameter + "'");
  }
  if (parameter != "nu0" && parameter != "u" && parameter != "U") c.agent.n_max.reset();
  return c;
}

}  // namespace qwork
