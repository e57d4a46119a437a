#pragma once

#include "qwork/model.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qwork {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Protocol { quantum, classical_cosine, recorded_qc };

std::string_view to_string(Protocol p);
Protocol parse_protocol(std::string_view name);

struct ModelConfig {
  int sites = 2;
  int bosons = 1;
  // Exactly one of u and U is set.
  std::optional<double> u;
  std::optional<double> U;
  double K = 1.0;
  double Xc = 1.0;
  std::optional<double> Xa;
  bool edge_interaction_only = false;
  bool coupled = true;

  ModelParams params() const;
};

struct AgentConfig {
  double omega = 0.0;
  double ell = 0.0;
  // Exactly one of X0 and n_ph is set.
  std::optional<double> X0;
  std::optional<double> n_ph;
  std::optional<int> n_max;

  double launch_X0() const;
};

struct NumericsConfig {
  double dt = 1.0;
  double driven_dt = 0.0025;
  int checkpoints = 200;
  int krylov_dim = 20;
  double krylov_tol = 1e-12;
  double leakage_tol = 1e-6;
  std::optional<double> t_final;
  double occupation_threshold = 1e-10;
};

struct SweepConfig {
  // One of omega, ell, X0, nu0, u, U.
  std::string parameter;
  std::vector<double> values;
};

struct NamedAgent {
  std::string name;
  std::string flavor = "oscillator";
  double omega = 0.0;
  double M = 0.0;
  double ell = 0.0;
};

struct DesignSection {
  double W0 = 0.5;
  double v0 = 0.0212;
  double dv0 = 0.002;
  std::optional<double> dX0;
  std::optional<double> dW0;
  double omega_min = 1e-3;
  double omega_max = 1.0;
  int omega_points = 61;
  double mass_min = 1.0;
  double mass_max = 1e5;
  int mass_points = 61;
  std::vector<double> lw_values;
  std::vector<double> l2w_values;
  double strong_threshold = 0.1;
  std::vector<NamedAgent> agents;
};

struct SweepX0Section {
  std::vector<double> x0_factors{1.0, 1.5, 2.0};
  std::vector<double> v0_values;
  double insensitivity_tol = 0.01;
  double adiabatic_slowdown = 10.0;
};

struct SweepOmegaSection {
  // constant_dvbr, constant_dvuc or both.
  std::string path = "both";
  std::vector<double> omegas;
  double v0 = 0.0;
  double reference_omega = 0.0;
  double reference_ell = 0.0;
  double min_x0_factor = 1.5;
};

struct InterferenceSection {
  int partner = 0;
  double classical_omega_min = 0.01;
  double classical_omega_max = 0.04;
  int classical_omega_points = 201;
  std::vector<double> quantum_omegas;
  std::vector<double> ells{0.05, 0.1, 0.2};
  double dX0 = 1.0;
  double dW0 = 0.5;
  double lz_q = 2.0;
  double lz_window_min = 0.05;
  double lz_window_max = 0.95;
  double envelope_tol = 0.05;
};

struct FidelitySection {
  int tau_points = 256;
  int phi_points = 33;
};

struct IdealAgentSection {
  std::vector<double> mass_factors{1.0, 4.0, 16.0};
  double tv_tol = 0.01;
  double momentum_tol = 0.05;
};

struct RunConfig {
  std::string name = "run";
  ModelConfig model;
  AgentConfig agent;
  int nu0 = 0;
  std::vector<Protocol> protocols{Protocol::quantum, Protocol::classical_cosine,
                                  Protocol::recorded_qc};
  NumericsConfig numerics;
  std::optional<SweepConfig> sweep;
  std::optional<DesignSection> design;
  std::optional<SweepX0Section> sweep_x0;
  std::optional<SweepOmegaSection> sweep_omega;
  std::optional<InterferenceSection> interference;
  std::optional<FidelitySection> fidelity;
  std::optional<IdealAgentSection> ideal_agent;

  bool wants(Protocol p) const;
  // Checks model and agent preconditions; throws ConfigError.
  void validate() const;
};

// Accepts a config document or a run manifest that embeds one under "config".
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
// Canonical JSON echo; parse_config(to_json(c)) reproduces c.
std::string to_json(const RunConfig& config);

// A copy of `base` with one sweep parameter replaced.
RunConfig with_parameter(const RunConfig& base, const std::string& parameter, double value);

}  // namespace qwork
