#pragma once

#include "qwork/channels.hpp"
#include "qwork/config.hpp"
#include "qwork/output.hpp"
#include "qwork/propagate.hpp"
#include "qwork/workdist.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace qwork {

enum class Scenario { design, simulate, sweep_x0, sweep_omega, interference, fidelity, ideal_agent };

std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view name);

struct RunContext {
  int jobs = 1;
  std::optional<int> checkpoints;
  std::function<void(const std::string&)> log;
};

// Agent truncation and launch point fixed before any evolution.
struct ResolvedAgent {
  double omega = 0.0;
  double ell = 0.0;
  double X0 = 0.0;
  int n_max = 0;
  bool auto_n_max = false;
  double mass() const { return 1.0 / (ell * ell * omega); }
  double v0() const { return omega * X0; }
  double n_ph() const { return (X0 / ell) * (X0 / ell); }
};

// Largest |E_nu(X) - E_nu0(-X0)| over X in [-X0, X0].
double work_span(const SystemModel& model, int nu0, double X0);
// n_max from the coherent launch plus the largest possible energy intake.
int auto_n_max(const SystemModel& model, int nu0, double X0, double omega, double ell);
ResolvedAgent resolve_agent(const RunConfig& config);

struct QuantumRun {
  ResolvedAgent agent;
  Trajectory trajectory;
  // Per checkpoint, channels above the null threshold.
  std::vector<std::vector<ChannelSnapshot>> snapshots;
  std::vector<double> xqc;
  std::vector<double> mean_X;
  std::vector<double> mean_v;
  std::vector<Eigen::VectorXd> occupations;
  std::vector<double> energies;
  Eigen::VectorXd final_probabilities;
  WorkDistribution work;
  WorkDistribution agent_work;
  MeanWork mean;
  double span = 0.0;
  double max_energy_drift = 0.0;
  double max_prob_defect = 0.0;
  double max_occupation_defect = 0.0;
};

struct ClassicalRun {
  Trajectory trajectory;
  double X_end = 0.0;
  // Populations by continued label at the end of the drive.
  Eigen::VectorXd populations;
  WorkDistribution work;
};

QuantumRun run_quantum(const RunConfig& config, const std::function<void(const std::string&)>& log = {});
ClassicalRun run_classical(const RunConfig& config, const DriveProtocol& drive, int checkpoints = 1);

// Total-variation distance between two label-indexed distributions.
double tv_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

RunOutput run_design(const RunConfig& config, const RunContext& ctx);
RunOutput run_simulate(const RunConfig& config, const RunContext& ctx);
RunOutput run_sweep_x0(const RunConfig& config, const RunContext& ctx);
RunOutput run_sweep_omega(const RunConfig& config, const RunContext& ctx);
RunOutput run_interference(const RunConfig& config, const RunContext& ctx);
RunOutput run_fidelity(const RunConfig& config, const RunContext& ctx);
RunOutput run_ideal_agent(const RunConfig& config, const RunContext& ctx);

// Dispatches and converts exceptions into a failed output that keeps partial tables.
RunOutput run_scenario(Scenario s, const RunConfig& config, const RunContext& ctx);

}  // namespace qwork
