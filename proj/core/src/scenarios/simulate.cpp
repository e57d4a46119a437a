#include "internal.hpp"

#include "qwork/design.hpp"
#include "qwork/parallel.hpp"

#include <cmath>

namespace qwork {

namespace {

using detail::guarded;

constexpr const char* kTime = "hbar/K";
constexpr const char* kEnergy = "K";
constexpr const char* kLength = "X";
constexpr const char* kMomentum = "hbar/X";
constexpr const char* kVelocity = "X*K/hbar";

void add_work_rows(Table& t, const std::string& protocol, const WorkDistribution& w) {
  for (std::size_t i = 0; i < w.support.size(); ++i) t.add_row({protocol, w.support[i], w.probs[i]});
}

Table spectrum_table(const SystemModel& model, double X0) {
  Table t("spectrum", {{"X", kLength}, {"nu", ""}, {"E", kEnergy}});
  const int points = 201;
  AdiabaticLevels lv = adiabatic_levels(model, -X0);
  for (int i = 0; i < points; ++i) {
    const double X = -X0 + 2.0 * X0 * i / (points - 1);
    if (i > 0) lv = continue_levels(model, lv, X);
    for (std::size_t nu = 0; nu < model.dim(); ++nu) {
      t.add_row({X, static_cast<std::int64_t>(nu), lv.energy_of(static_cast<int>(nu))});
    }
  }
  return t;
}

void simulate_into(const RunConfig& cfg, const RunContext& ctx, RunOutput& out) {
  cfg.validate();
  const SystemModel model(cfg.model.params(), cfg.model.coupled);
  const ModelParams mp = model.params();
  out.derived.emplace_back("U", mp.U);
  out.derived.emplace_back("K", mp.K);
  out.derived.emplace_back("Xc", mp.Xc);
  out.derived.emplace_back("Xa", mp.Xa);

  QuantumRun q = run_quantum(cfg, ctx.log);
  const ResolvedAgent& ag = q.agent;
  out.derived.emplace_back("X0", ag.X0);
  out.derived.emplace_back("n_max", ag.n_max);
  out.derived.emplace_back("M", ag.mass());
  out.derived.emplace_back("v0", ag.v0());
  out.derived.emplace_back("n_ph", ag.n_ph());
  out.derived.emplace_back("t_final", q.trajectory.times.back());
  out.derived.emplace_back("spectral_span", q.span);
  const AgentDesign design = AgentDesign::oscillator(ag.omega, ag.ell);
  out.derived.emplace_back("dv_uc", design.dv_uc());
  const double W0 = cfg.design ? cfg.design->W0 : q.work.width(1e-3);
  out.derived.emplace_back("W0", W0);
  out.derived.emplace_back("dv_br", W0 > 0 ? design.dv_br(W0, ag.v0()) : 0.0);

  Table channels("channels", {{"t", kTime}, {"nu", ""}, {"p", ""}, {"X", kLength}, {"P", kMomentum},
                              {"v", kVelocity}, {"E", kEnergy}});
  for (const auto& snaps : q.snapshots)
    for (const auto& s : snaps) channels.add_row({s.t, static_cast<std::int64_t>(s.nu), s.p, s.X, s.P, s.v, s.E});
  out.tables.push_back(std::move(channels));

  Table occ("occupation", {{"t", kTime}, {"n", ""}, {"E_agent", kEnergy}, {"P_n", ""}});
  for (std::size_t i = 0; i < q.occupations.size(); ++i) {
    const Eigen::VectorXd& P = q.occupations[i];
    for (Eigen::Index n = 0; n < P.size(); ++n) {
      if (P(n) < cfg.numerics.occupation_threshold) continue;
      occ.add_row({q.trajectory.times[i], static_cast<std::int64_t>(n), ag.omega * static_cast<double>(n), P(n)});
    }
  }
  out.tables.push_back(std::move(occ));

  Table traj("trajectory", {{"t", kTime}, {"X_qc", kLength}, {"v_mean", kVelocity}, {"X_cl", kLength},
                            {"v_cl", kVelocity}, {"E_total", kEnergy}, {"norm", ""}});
  for (std::size_t i = 0; i < q.trajectory.times.size(); ++i) {
    const double t = q.trajectory.times[i];
    const double tc = std::min(t, std::numbers::pi / ag.omega);
    traj.add_row({t, q.xqc[i], q.mean_v[i], classical_drive(tc, ag.X0, ag.omega),
                  classical_velocity(tc, ag.X0, ag.omega), q.energies[i], q.trajectory.states[i].norm()});
  }
  out.tables.push_back(std::move(traj));
  out.tables.push_back(spectrum_table(model, ag.X0));

  Table work("work_distribution", {{"protocol", ""}, {"W", kEnergy}, {"P", ""}});
  Table means("mean_work", {{"protocol", ""}, {"W_mean", kEnergy}});
  add_work_rows(work, "quantum", q.work);
  add_work_rows(work, "quantum_agent", q.agent_work);
  means.add_row({std::string("quantum"), q.work.mean});
  means.add_row({std::string("quantum_agent"), q.agent_work.mean});
  means.add_row({std::string("quantum_system_gain"), q.mean.system_gain});
  out.summary.emplace_back("W_quantum", q.work.mean);
  out.summary.emplace_back("W_quantum_agent", q.agent_work.mean);
  out.summary.emplace_back("W_system_gain", q.mean.system_gain);
  out.summary.emplace_back("W_agent_loss", q.mean.agent_loss);
  out.summary.emplace_back("agent_energy_uncertainty", ag.v0() / ag.ell);

  Table classical("classical", {{"protocol", ""}, {"t", kTime}, {"X", kLength}, {"nu", ""}, {"p", ""}});
  const AdiabaticLevels anchor = adiabatic_levels(model, -ag.X0);
  auto classical_run = [&](Protocol p, const DriveProtocol& drive) {
    const std::string name(to_string(p));
    const ClassicalRun c = run_classical(cfg, drive, cfg.numerics.checkpoints);
    AdiabaticLevels lv = anchor;
    for (std::size_t i = 0; i < c.trajectory.states.size(); ++i) {
      const double X = c.trajectory.drive[i];
      lv = continue_levels(model, lv, X);
      for (std::size_t nu = 0; nu < model.dim(); ++nu) {
        const double pr = std::norm(lv.vector_of(static_cast<int>(nu)).cast<cplx>().dot(c.trajectory.states[i]));
        if (pr >= ChannelDecomposition::null_threshold)
          classical.add_row({name, c.trajectory.times[i], X, static_cast<std::int64_t>(nu), pr});
      }
    }
    add_work_rows(work, name, c.work);
    means.add_row({name, c.work.mean});
    out.summary.emplace_back("W_" + name, c.work.mean);
    out.checks.push_back(check_below(name + "_norm_drift", c.trajectory.max_norm_drift, 1e-10));
    const double tv = tv_distance(c.populations, q.final_probabilities);
    out.summary.emplace_back("tv_quantum_vs_" + name, tv);
  };
  if (cfg.wants(Protocol::classical_cosine))
    classical_run(Protocol::classical_cosine, DriveProtocol::classical_cosine(ag.X0, ag.omega));
  if (cfg.wants(Protocol::recorded_qc))
    classical_run(Protocol::recorded_qc, DriveProtocol::recorded(q.trajectory.times, q.xqc));
  out.tables.push_back(std::move(work));
  out.tables.push_back(std::move(means));
  if (classical.size() > 0) out.tables.push_back(std::move(classical));

  detail::add_conservation_checks(out, q);
  out.checks.push_back(check_below("truncation_leakage", q.trajectory.max_leakage, cfg.numerics.leakage_tol));
  // Channel bookkeeping of the mean work against the exact system-energy gain.
  out.checks.push_back(check_below("channel_work_vs_system_gain_over_span",
                                   std::abs(q.work.mean - q.mean.system_gain) / q.span, 0.02, true));
}

RunOutput simulate_sweep(const RunConfig& cfg, const RunContext& ctx) {
  return guarded("simulate", [&](RunOutput& out) {
    cfg.validate();
    const SweepConfig& sw = *cfg.sweep;
    std::vector<RunOutput> points(sw.values.size());
    RunContext inner = ctx;
    parallel_for(points.size(), ctx.jobs, [&](std::size_t i) {
      const RunConfig c = with_parameter(cfg, sw.parameter, sw.values[i]);
      points[i] = guarded("simulate", [&](RunOutput& o) { simulate_into(c, inner, o); });
      points[i].label = detail::point_label(i);
      detail::log(ctx, "sweep point " + std::to_string(i) + " done");
    });
    Table index("sweep", {{"point", ""}, {sw.parameter, ""}, {"W_quantum", kEnergy}, {"W_classical_cosine", kEnergy},
                          {"W_recorded_qc", kEnergy}, {"status", ""}});
    for (std::size_t i = 0; i < points.size(); ++i) {
      const RunOutput& p = points[i];
      const double nan = std::nan("");
      index.add_row({static_cast<std::int64_t>(i), sw.values[i], p.find("W_quantum").value_or(nan),
                     p.find("W_classical_cosine").value_or(nan), p.find("W_recorded_qc").value_or(nan),
                     std::string(p.error.empty() ? (p.failed() ? "checks_failed" : "ok") : "failed")});
      if (!p.error.empty()) out.warnings.push_back(p.label + ": " + p.error);
    }
    out.tables.push_back(std::move(index));
    out.children = std::move(points);
  });
}

}  // namespace

RunOutput run_simulate(const RunConfig& config, const RunContext& ctx) {
  const RunConfig cfg = detail::apply_context(config, ctx);
  if (cfg.sweep) return simulate_sweep(cfg, ctx);
  return guarded("simulate", [&](RunOutput& out) { simulate_into(cfg, ctx, out); });
}

}  // namespace qwork
