#include "internal.hpp"

#include "qwork/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace qwork {

namespace {

using detail::guarded;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMinChannelWeight = 1e-3;

struct Factor {
  double factor = 1.0;
  double ell = 0.0;
  double mass = 0.0;
  int n_max = 0;
  double tv = kNaN;
  double momentum_residual = kNaN;
  std::vector<ChannelSnapshot> channels;
  std::vector<double> dP_measured;
  std::vector<double> dP_predicted;
  detail::Conservation conservation;
  std::string status = "ok";
  std::string error;
};

void ideal_agent_into(const RunConfig& cfg, const RunContext& ctx, RunOutput& out) {
  cfg.validate();
  const IdealAgentSection s = cfg.ideal_agent.value_or(IdealAgentSection{});
  if (s.mass_factors.size() < 3) throw ConfigError("ideal_agent: at least 3 mass factors");
  std::vector<double> factors = s.mass_factors;
  std::sort(factors.begin(), factors.end());
  if (factors.front() <= 0) throw ConfigError("ideal_agent: mass factors must be positive");
  const double X0 = cfg.agent.launch_X0();
  const double omega = cfg.agent.omega;
  const double v0 = omega * X0;

  const ClassicalRun cl = run_classical(cfg, DriveProtocol::classical_cosine(X0, omega));
  out.summary.emplace_back("v0", v0);
  out.summary.emplace_back("tv_classical_vs_itself", tv_distance(cl.populations, cl.populations));

  std::vector<Factor> fs(factors.size());
  parallel_for(fs.size(), ctx.jobs, [&](std::size_t i) {
    Factor& f = fs[i];
    f.factor = factors[i];
    RunConfig c = cfg;
    c.agent.ell = cfg.agent.ell / std::sqrt(f.factor);
    c.agent.X0 = X0;
    c.agent.n_ph.reset();
    if (f.factor != 1.0 || !cfg.agent.n_max) c.agent.n_max.reset();
    f.ell = c.agent.ell;
    try {
      const QuantumRun q = run_quantum(c);
      f.mass = q.agent.mass();
      f.n_max = q.agent.n_max;
      f.tv = tv_distance(q.final_probabilities, cl.populations);
      f.conservation = detail::conservation_of(q);
      const auto& first = q.snapshots.front();
      const auto init = std::find_if(first.begin(), first.end(), [&](const auto& sn) { return sn.nu == cfg.nu0; });
      // Momentum shift read off the phase-space radius, which is insensitive to the turning-point phase.
      double worst = 0.0, scale = 0.0;
      for (const ChannelSnapshot& sn : q.snapshots.back()) {
        if (sn.p < kMinChannelWeight) continue;
        const double R = std::sqrt(sn.X * sn.X / (f.ell * f.ell) + f.ell * f.ell * sn.P * sn.P);
        const double measured = (R - X0 / f.ell) / f.ell;
        const double predicted = -(sn.E - init->E) / v0;
        f.channels.push_back(sn);
        f.dP_measured.push_back(measured);
        f.dP_predicted.push_back(predicted);
        worst = std::max(worst, std::abs(measured - predicted));
        scale = std::max(scale, std::abs(predicted));
      }
      f.momentum_residual = scale > 0 ? worst / scale : worst;
    } catch (const std::exception& e) {
      f.status = "failed";
      f.error = e.what();
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "ideal-agent: factor %.4g ell %.6g n_max %d tv %.3e (%s)", f.factor, f.ell,
                  f.n_max, f.tv, f.status.c_str());
    detail::log(ctx, buf);
  });

  Table t("ideal_agent", {{"mass_factor", ""}, {"ell", "X"}, {"M", "hbar^2/(K*X^2)"}, {"n_max", ""},
                          {"tv_quantum_vs_classical", ""}, {"momentum_residual", ""}, {"status", ""}});
  Table m("momentum_shift", {{"mass_factor", ""}, {"nu", ""}, {"p", ""}, {"W", "K"}, {"dP_measured", "hbar/X"},
                             {"dP_predicted", "hbar/X"}});
  std::vector<detail::Conservation> cons;
  for (const Factor& f : fs) {
    t.add_row({f.factor, f.ell, f.mass, static_cast<std::int64_t>(f.n_max), f.tv, f.momentum_residual, f.status});
    for (std::size_t k = 0; k < f.channels.size(); ++k)
      m.add_row({f.factor, static_cast<std::int64_t>(f.channels[k].nu), f.channels[k].p, -v0 * f.dP_predicted[k],
                 f.dP_measured[k], f.dP_predicted[k]});
    if (f.status == "ok") cons.push_back(f.conservation);
    else out.warnings.push_back("mass factor " + format_number(f.factor) + ": " + f.error);
    out.summary.emplace_back("tv_factor_" + format_number(f.factor), f.tv);
    out.summary.emplace_back("momentum_residual_factor_" + format_number(f.factor), f.momentum_residual);
  }
  out.tables.push_back(std::move(t));
  out.tables.push_back(std::move(m));

  bool decreasing = true;
  double worst_step = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < fs.size(); ++i) {
    const double step = fs[i].tv - fs[i - 1].tv;
    decreasing = decreasing && step < 0;
    worst_step = std::max(worst_step, step);
  }
  out.checks.push_back(check_flag("tv_decreasing_with_mass", decreasing, worst_step, 0.0));
  out.checks.push_back(check_below("tv_at_largest_mass", fs.back().tv, s.tv_tol));
  out.checks.push_back(check_below("momentum_residual_at_largest_mass", fs.back().momentum_residual, s.momentum_tol));
  out.checks.push_back(check_below("classical_norm_drift", cl.trajectory.max_norm_drift, 1e-10));
  detail::add_worst_conservation_checks(out, cons);
}

}  // namespace

RunOutput run_ideal_agent(const RunConfig& config, const RunContext& ctx) {
  const RunConfig cfg = detail::apply_context(config, ctx);
  return guarded("ideal-agent", [&](RunOutput& out) { ideal_agent_into(cfg, ctx, out); });
}

}  // namespace qwork
