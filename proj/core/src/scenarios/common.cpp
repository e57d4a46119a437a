#include "internal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace qwork {

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::design: return "design";
    case Scenario::simulate: return "simulate";
    case Scenario::sweep_x0: return "sweep-x0";
    case Scenario::sweep_omega: return "sweep-omega";
    case Scenario::interference: return "interference";
    case Scenario::fidelity: return "fidelity";
    case Scenario::ideal_agent: return "ideal-agent";
  }
  return "?";
}

Scenario parse_scenario(std::string_view name) {
  for (Scenario s : {Scenario::design, Scenario::simulate, Scenario::sweep_x0, Scenario::sweep_omega,
                     Scenario::interference, Scenario::fidelity, Scenario::ideal_agent}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

double work_span(const SystemModel& model, int nu0, double X0) {
  const double E0 = adiabatic_levels(model, -X0).energies(nu0);
  double span = 0.0;
  const int points = 81;
  for (int i = 0; i < points; ++i) {
    const double X = -X0 + 2.0 * X0 * i / (points - 1);
    const AdiabaticLevels lv = adiabatic_levels(model, X);
    span = std::max({span, lv.energies.maxCoeff() - E0, E0 - lv.energies.minCoeff()});
  }
  return span;
}

int auto_n_max(const SystemModel& model, int nu0, double X0, double omega, double ell) {
  const double alpha_sq = X0 * X0 / (2.0 * ell * ell);
  return required_n_max(alpha_sq + work_span(model, nu0, X0) / omega);
}

ResolvedAgent resolve_agent(const RunConfig& config) {
  ResolvedAgent a;
  a.omega = config.agent.omega;
  a.ell = config.agent.ell;
  a.X0 = config.agent.launch_X0();
  if (config.agent.n_max) {
    a.n_max = *config.agent.n_max;
  } else {
    const SystemModel model(config.model.params(), config.model.coupled);
    a.n_max = auto_n_max(model, config.nu0, a.X0, a.omega, a.ell);
    a.auto_n_max = true;
  }
  return a;
}

double tv_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv_distance: size mismatch");
  return 0.5 * (p - q).cwiseAbs().sum();
}

QuantumRun run_quantum(const RunConfig& config, const std::function<void(const std::string&)>& log) {
  config.validate();
  QuantumRun run;
  run.agent = resolve_agent(config);
  const ResolvedAgent& ag = run.agent;
  const SystemModel model(config.model.params(), config.model.coupled);
  const AgentBasis basis(ag.n_max, ag.omega, ag.ell);
  const auto pos = std::make_shared<const AgentPositionBasis>(basis);
  const CompositeHamiltonian H(model, pos);
  const ChannelFrame frame(model, pos, -ag.X0);
  const AdiabaticLevels anchor = adiabatic_levels(model, -ag.X0);
  const CompositeState psi0 = CompositeState::product(anchor.vectors.col(config.nu0).cast<cplx>(),
                                                      coherent_state(basis, -ag.X0, 0.0));

  AutonomousOptions opts;
  opts.t_final = config.numerics.t_final.value_or(std::numbers::pi / ag.omega);
  opts.dt = config.numerics.dt;
  opts.checkpoints = config.numerics.checkpoints;
  opts.krylov.max_dim = config.numerics.krylov_dim;
  opts.krylov.tol = config.numerics.krylov_tol;
  opts.leakage_tol = config.numerics.leakage_tol;
  if (log) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "quantum run: dim %zu x %zu, omega %.6g, ell %.6g, X0 %.6g, t_final %.6g",
                  model.dim(), basis.dim(), ag.omega, ag.ell, ag.X0, opts.t_final);
    log(buf);
  }
  run.trajectory = evolve_autonomous(H, psi0, opts);

  const auto [lo, hi] = H.spectral_bounds();
  run.span = hi - lo;
  const double e0 = H.energy(psi0.amplitudes());
  for (std::size_t i = 0; i < run.trajectory.states.size(); ++i) {
    const CompositeState st = run.trajectory.composite(i);
    const ChannelDecomposition dec = decompose(st, frame);
    std::vector<ChannelSnapshot> snaps = channel_observables(dec, frame);
    run.xqc.push_back(x_qc(snaps));
    double v = 0.0;
    for (const auto& s : snaps) v += s.p * s.v;
    run.mean_v.push_back(v);
    run.max_prob_defect = std::max(run.max_prob_defect, std::abs(dec.probabilities.sum() - 1.0));
    Eigen::VectorXd occ = agent_occupation(st);
    run.max_occupation_defect = std::max(run.max_occupation_defect, std::abs(occ.sum() - 1.0));
    run.occupations.push_back(std::move(occ));
    const double e = H.energy(st.amplitudes());
    run.energies.push_back(e);
    run.max_energy_drift = std::max(run.max_energy_drift, std::abs(e - e0) / run.span);
    if (i + 1 == run.trajectory.states.size()) run.final_probabilities = dec.probabilities;
    run.snapshots.push_back(std::move(snaps));
  }

  const auto& first = run.snapshots.front();
  const auto it = std::find_if(first.begin(), first.end(), [&](const ChannelSnapshot& s) { return s.nu == config.nu0; });
  if (it == first.end()) throw std::runtime_error("run_quantum: initial channel is empty");
  run.work = work_system(run.snapshots.back(), *it);
  run.agent_work = work_agent(run.occupations.back(), run.occupations.front(), ag.omega);
  run.mean = mean_work(H, psi0, run.trajectory.composite(run.trajectory.states.size() - 1));
  return run;
}

ClassicalRun run_classical(const RunConfig& config, const DriveProtocol& drive, int checkpoints) {
  config.validate();
  const SystemModel model(config.model.params(), config.model.coupled);
  const double X0 = config.agent.launch_X0();
  const AdiabaticLevels anchor = adiabatic_levels(model, -X0);
  DrivenOptions opts;
  opts.t_final = drive.t_end() - drive.t_begin();
  opts.dt = config.numerics.driven_dt;
  opts.checkpoints = checkpoints;
  ClassicalRun run;
  run.trajectory = evolve_driven(model, drive, anchor.vectors.col(config.nu0).cast<cplx>(), opts);
  run.X_end = run.trajectory.drive.back();
  const AdiabaticLevels end = continue_levels(model, anchor, run.X_end);
  run.populations = Eigen::VectorXd::Zero(model.dim());
  for (std::size_t label = 0; label < model.dim(); ++label) {
    const Eigen::VectorXd v = end.vector_of(static_cast<int>(label));
    run.populations(label) = std::norm(v.cast<cplx>().dot(run.trajectory.states.back()));
  }
  const double E0 = anchor.energies(config.nu0);
  for (std::size_t label = 0; label < model.dim(); ++label) {
    const double p = run.populations(label);
    if (p < ChannelDecomposition::null_threshold) continue;
    const double W = end.energy_of(static_cast<int>(label)) - E0;
    run.work.support.push_back(W);
    run.work.probs.push_back(p);
    run.work.mean += p * W;
  }
  return run;
}

namespace detail {

RunOutput guarded(const std::string& scenario, const std::function<void(RunOutput&)>& body) {
  RunOutput out;
  out.scenario = scenario;
  try {
    body(out);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

void log(const RunContext& ctx, const std::string& msg) {
  if (ctx.log) ctx.log(msg);
}

Eigen::VectorXd label_populations(const SystemModel& model, const AdiabaticLevels& anchor, double X,
                                  const Eigen::VectorXcd& state) {
  const AdiabaticLevels lv = continue_levels(model, anchor, X);
  Eigen::VectorXd p(model.dim());
  for (std::size_t label = 0; label < model.dim(); ++label) {
    p(label) = std::norm(lv.vector_of(static_cast<int>(label)).cast<cplx>().dot(state));
  }
  return p;
}

namespace {

struct Limits {
  static constexpr double norm = 1e-10;
  static constexpr double energy = 1e-8;
  static constexpr double sums = 1e-8;
  static constexpr double first_law = 1e-6;
};

}  // namespace

void add_conservation_checks(RunOutput& out, const QuantumRun& run, const std::string& prefix) {
  out.checks.push_back(check_below(prefix + "norm_drift", run.trajectory.max_norm_drift, Limits::norm));
  out.checks.push_back(check_below(prefix + "energy_drift_relative", run.max_energy_drift, Limits::energy));
  out.checks.push_back(check_below(prefix + "channel_probability_sum", run.max_prob_defect, Limits::sums));
  out.checks.push_back(check_below(prefix + "occupation_sum", run.max_occupation_defect, Limits::sums));
  out.checks.push_back(
      check_below(prefix + "first_law_residual_over_span", std::abs(run.mean.residual) / run.span, Limits::first_law));
}

Conservation conservation_of(const QuantumRun& run) {
  return {run.trajectory.max_norm_drift, run.max_energy_drift, run.max_prob_defect, run.max_occupation_defect,
          std::abs(run.mean.residual) / run.span};
}

void add_worst_conservation_checks(RunOutput& out, const std::vector<Conservation>& runs) {
  if (runs.empty()) return;
  Conservation w;
  for (const Conservation& r : runs) {
    w.norm = std::max(w.norm, r.norm);
    w.energy = std::max(w.energy, r.energy);
    w.probability = std::max(w.probability, r.probability);
    w.occupation = std::max(w.occupation, r.occupation);
    w.first_law = std::max(w.first_law, r.first_law);
  }
  out.checks.push_back(check_below("max_norm_drift", w.norm, Limits::norm));
  out.checks.push_back(check_below("max_energy_drift_relative", w.energy, Limits::energy));
  out.checks.push_back(check_below("max_channel_probability_sum", w.probability, Limits::sums));
  out.checks.push_back(check_below("max_occupation_sum", w.occupation, Limits::sums));
  out.checks.push_back(check_below("max_first_law_residual_over_span", w.first_law, Limits::first_law));
}

RunConfig apply_context(const RunConfig& config, const RunContext& ctx) {
  RunConfig c = config;
  if (ctx.checkpoints) c.numerics.checkpoints = *ctx.checkpoints;
  return c;
}

ProtocolMeans protocol_means(const RunConfig& config, Conservation* conservation) {
  QuantumRun q = run_quantum(config);
  ProtocolMeans m;
  m.quantum = q.work.mean;
  const double X0 = q.agent.X0;
  m.classical = run_classical(config, DriveProtocol::classical_cosine(X0, q.agent.omega)).work.mean;
  m.recorded = run_classical(config, DriveProtocol::recorded(q.trajectory.times, q.xqc)).work.mean;
  if (conservation) *conservation = conservation_of(q);
  return m;
}

std::string point_label(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "point_%03zu", i);
  return buf;
}

double first_crossing(const std::vector<double>& x, const std::vector<double>& y, double level) {
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (y[i - 1] < level && y[i] >= level) {
      const double f = (level - y[i - 1]) / (y[i] - y[i - 1]);
      return x[i - 1] + f * (x[i] - x[i - 1]);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

RunOutput run_scenario(Scenario s, const RunConfig& config, const RunContext& ctx) {
  switch (s) {
    case Scenario::design: return run_design(config, ctx);
    case Scenario::simulate: return run_simulate(config, ctx);
    case Scenario::sweep_x0: return run_sweep_x0(config, ctx);
    case Scenario::sweep_omega: return run_sweep_omega(config, ctx);
    case Scenario::interference: return run_interference(config, ctx);
    case Scenario::fidelity: return run_fidelity(config, ctx);
    case Scenario::ideal_agent: return run_ideal_agent(config, ctx);
  }
  throw ConfigError("unknown scenario");
}

}  // namespace qwork
