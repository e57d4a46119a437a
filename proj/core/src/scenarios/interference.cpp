#include "internal.hpp"

#include "qwork/design.hpp"
#include "qwork/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace qwork {

namespace {

using detail::guarded;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Gap between the tracked pair along [-X0, X0] and the loop it encloses.
struct Loop {
  std::vector<double> X;
  std::vector<double> gap;
  double X1 = kNaN;
  double X2 = kNaN;
  // Integral of gap / sqrt(X0^2 - X^2) between the crossings; delta_phi = I / omega.
  double phase_integral = kNaN;
  double mean_gap = kNaN;
};

Loop trace_loop(const SystemModel& model, const AdiabaticLevels& anchor, int a, int b, double X0) {
  Loop L;
  const int points = 4001;
  AdiabaticLevels lv = anchor;
  for (int i = 0; i < points; ++i) {
    const double X = -X0 + 2.0 * X0 * i / (points - 1);
    if (i > 0) lv = continue_levels(model, lv, X);
    L.X.push_back(X);
    L.gap.push_back(std::abs(lv.energy_of(a) - lv.energy_of(b)));
  }
  // Two deepest interior local minima.
  std::vector<std::pair<double, int>> minima;
  for (int i = 1; i + 1 < points; ++i)
    if (L.gap[i] <= L.gap[i - 1] && L.gap[i] < L.gap[i + 1]) minima.emplace_back(L.gap[i], i);
  if (minima.size() < 2) return L;
  std::sort(minima.begin(), minima.end());
  int i1 = minima[0].second, i2 = minima[1].second;
  if (i1 > i2) std::swap(i1, i2);
  L.X1 = L.X[i1];
  L.X2 = L.X[i2];
  double I = 0.0, G = 0.0;
  for (int i = i1; i < i2; ++i) {
    const double dx = L.X[i + 1] - L.X[i];
    auto f = [&](int k) { return L.gap[k] / std::sqrt(X0 * X0 - L.X[k] * L.X[k]); };
    I += 0.5 * dx * (f(i) + f(i + 1));
    G += 0.5 * dx * (L.gap[i] + L.gap[i + 1]);
  }
  L.phase_integral = I;
  L.mean_gap = G / (L.X2 - L.X1);
  return L;
}

struct ClassicalPoint {
  double omega = 0.0;
  double P_lz = kNaN;
  double pair_mid = kNaN;
  double survival = kNaN;
  double pair_end = kNaN;
  double norm_drift = 0.0;
};

ClassicalPoint classical_point(const RunConfig& cfg, const AdiabaticLevels& mid,
                               const AdiabaticLevels& end, double X0, double omega, int nu0, int partner) {
  ClassicalPoint c;
  c.omega = omega;
  RunConfig rc = cfg;
  rc.agent.omega = omega;
  const ClassicalRun run = run_classical(rc, DriveProtocol::classical_cosine(X0, omega), 2);
  auto pop = [&](const AdiabaticLevels& lv, int label, const Eigen::VectorXcd& s) {
    return std::norm(lv.vector_of(label).cast<cplx>().dot(s));
  };
  const Eigen::VectorXcd& sm = run.trajectory.states[1];
  const Eigen::VectorXcd& se = run.trajectory.states[2];
  const double a = pop(mid, nu0, sm), b = pop(mid, partner, sm);
  c.pair_mid = a + b;
  c.P_lz = b / (a + b);
  const double ae = pop(end, nu0, se), be = pop(end, partner, se);
  c.pair_end = ae + be;
  c.survival = ae / (ae + be);
  c.norm_drift = run.trajectory.max_norm_drift;
  return c;
}

struct QuantumPoint {
  double ell = 0.0;
  double omega = 0.0;
  double survival = kNaN;
  double pair_end = kNaN;
  detail::Conservation conservation;
  std::string status = "ok";
  std::string error;
};

void interference_into(const RunConfig& cfg, const RunContext& ctx, RunOutput& out) {
  cfg.validate();
  if (!cfg.interference) throw ConfigError("interference needs an interference section");
  const InterferenceSection& s = *cfg.interference;
  if (s.classical_omega_points < 3) throw ConfigError("interference: at least 3 classical omega points");
  const SystemModel model(cfg.model.params(), cfg.model.coupled);
  const double X0 = cfg.agent.launch_X0();
  const int nu0 = cfg.nu0, partner = s.partner;
  const AdiabaticLevels anchor = adiabatic_levels(model, -X0);
  const AdiabaticLevels mid = continue_levels(model, anchor, 0.0);
  const AdiabaticLevels end = continue_levels(model, anchor, X0);

  const Loop loop = trace_loop(model, anchor, nu0, partner, X0);
  out.summary.emplace_back("crossing_X1", loop.X1);
  out.summary.emplace_back("crossing_X2", loop.X2);
  out.summary.emplace_back("loop_dX0", loop.X2 - loop.X1);
  out.summary.emplace_back("loop_mean_gap", loop.mean_gap);
  Table gap("pair_gap", {{"X", "X"}, {"gap", "K"}});
  for (std::size_t i = 0; i < loop.X.size(); i += 10) gap.add_row({loop.X[i], loop.gap[i]});
  out.tables.push_back(std::move(gap));
  auto delta_phi = [&](double omega) { return loop.phase_integral / omega; };

  // Classical drive on the fine grid.
  std::vector<ClassicalPoint> cl(static_cast<std::size_t>(s.classical_omega_points));
  parallel_for(cl.size(), ctx.jobs, [&](std::size_t i) {
    const double w = s.classical_omega_min +
                     (s.classical_omega_max - s.classical_omega_min) * static_cast<double>(i) / (cl.size() - 1);
    cl[i] = classical_point(cfg, mid, end, X0, w, nu0, partner);
  });
  detail::log(ctx, "interference: classical grid done");

  Table ct("interference_classical",
           {{"omega", "K/hbar"}, {"v0", "X*K/hbar"}, {"P_LZ", ""}, {"pair_mid", ""}, {"survival", ""},
            {"pair_end", ""}, {"delta_phi", "rad"}, {"coherent", ""}, {"dephased", ""}, {"envelope_low", ""}});
  double worst_outside = 0.0, near_low = std::numeric_limits<double>::infinity(),
         near_high = std::numeric_limits<double>::infinity(), dephased_identity = 0.0, cl_norm = 0.0;
  std::vector<double> v0s, plz;
  for (const auto& c : cl) {
    const double dphi = delta_phi(c.omega);
    const TwoPath tp = two_path_probability(c.P_lz, dphi);
    const double low = (1.0 - 2.0 * c.P_lz) * (1.0 - 2.0 * c.P_lz);
    ct.add_row({c.omega, c.omega * X0, c.P_lz, c.pair_mid, c.survival, c.pair_end, dphi, tp.coherent, tp.dephased, low});
    worst_outside = std::max({worst_outside, low - c.survival, c.survival - 1.0});
    near_low = std::min(near_low, std::abs(c.survival - low));
    near_high = std::min(near_high, std::abs(1.0 - c.survival));
    // Averaging the coherent formula over a full phase period gives the dephased value.
    const int nphi = 64;
    double avg = 0.0;
    for (int k = 0; k < nphi; ++k) avg += two_path_probability(c.P_lz, 2.0 * std::numbers::pi * k / nphi).coherent;
    dephased_identity = std::max(dephased_identity, std::abs(avg / nphi - tp.dephased));
    cl_norm = std::max(cl_norm, c.norm_drift);
    v0s.push_back(c.omega * X0);
    plz.push_back(c.P_lz);
  }
  out.tables.push_back(std::move(ct));

  // First-crossing fit.
  std::vector<LzSample> samples;
  for (const auto& c : cl)
    if (c.P_lz >= s.lz_window_min && c.P_lz <= s.lz_window_max) samples.push_back({c.omega * X0, c.P_lz});
  if (samples.size() < 3) throw std::runtime_error("interference: fewer than 3 first-crossing samples in the fit window");
  const LzFit fit = lz_fit(samples, s.lz_q);
  // Reported next to the configured exponent for comparison.
  const LzFit alt = lz_fit(samples, s.lz_q == 1.0 ? 2.0 : 1.0);
  Table ft("lz_fit", {{"Xdot", "X*K/hbar"}, {"P_LZ", ""}, {"P_fit", ""}, {"P_fit_alt", ""}, {"in_window", ""}});
  for (const auto& c : cl) {
    const double xd = c.omega * X0;
    const bool in = c.P_lz >= s.lz_window_min && c.P_lz <= s.lz_window_max;
    ft.add_row({xd, c.P_lz, fit.predict(xd), alt.predict(xd), static_cast<std::int64_t>(in)});
  }
  out.tables.push_back(std::move(ft));
  const double v50 = detail::first_crossing(v0s, plz, 0.5);
  out.summary.emplace_back("v50_interpolated", v50);
  out.summary.emplace_back("v50_lz_fit", fit.half_velocity());
  out.summary.emplace_back("lz_c", fit.c);
  out.summary.emplace_back("lz_q", fit.q);
  out.summary.emplace_back("lz_fit_samples", static_cast<double>(samples.size()));
  out.summary.emplace_back("lz_max_abs_residual", fit.max_abs_residual);
  out.summary.emplace_back("lz_rms_log_residual", fit.rms_log_residual);
  out.summary.emplace_back("lz_alt_q", alt.q);
  out.summary.emplace_back("lz_alt_c", alt.c);
  out.summary.emplace_back("lz_alt_max_abs_residual", alt.max_abs_residual);
  out.summary.emplace_back("v50_lz_alt_fit", alt.half_velocity());
  out.summary.emplace_back("envelope_worst_outside", worst_outside);
  out.summary.emplace_back("envelope_nearest_low", near_low);
  out.summary.emplace_back("envelope_nearest_high", near_high);
  out.summary.emplace_back("dephased_identity_error", dephased_identity);

  out.checks.push_back(check_below("lz_fit_max_abs_residual", fit.max_abs_residual, 0.02));
  out.checks.push_back(check_flag("classical_survival_within_envelope",
                                  worst_outside <= s.envelope_tol && near_low <= s.envelope_tol &&
                                      near_high <= s.envelope_tol,
                                  std::max({worst_outside, near_low, near_high}), s.envelope_tol));
  out.checks.push_back(check_below("dephased_average_identity", dephased_identity, 1e-10));
  out.checks.push_back(check_below("classical_norm_drift", cl_norm, 1e-10));

  // Resolution requirement at the 50/50 point.
  Table rt("resolution", {{"ell", "X"}, {"omega_50", "K/hbar"}, {"dv_uc", "X*K/hbar"}, {"dv_br", "X*K/hbar"},
                          {"dv0_required", "X*K/hbar"}, {"margin", ""}, {"pass", ""}});
  if (std::isfinite(v50)) {
    const InterferenceResolution ir = interference_resolution(v50, s.dX0, s.dW0);
    out.summary.emplace_back("delta_phi_nominal", ir.delta_phi);
    out.summary.emplace_back("delta_phi_measured", delta_phi(v50 / X0));
    out.summary.emplace_back("dv0_required", ir.dv0_required);
    for (double ell : s.ells) {
      const AgentDesign d = AgentDesign::oscillator(v50 / X0, ell);
      const DesignCheck chk = make_check(d.dv_uc() / ir.dv0_required);
      rt.add_row({ell, v50 / X0, d.dv_uc(), d.dv_br(s.dW0, v50), ir.dv0_required, chk.margin,
                  static_cast<std::int64_t>(chk.pass)});
    }
  }
  out.tables.push_back(std::move(rt));

  // Quantum agent on the coarse grid, with the classical survival at the same omegas.
  std::vector<QuantumPoint> qp;
  for (double ell : s.ells)
    for (double w : s.quantum_omegas) {
      QuantumPoint p;
      p.ell = ell;
      p.omega = w;
      qp.push_back(p);
    }
  std::vector<ClassicalPoint> clq(s.quantum_omegas.size());
  parallel_for(clq.size(), ctx.jobs,
               [&](std::size_t i) { clq[i] = classical_point(cfg, mid, end, X0, s.quantum_omegas[i], nu0, partner); });
  parallel_for(qp.size(), ctx.jobs, [&](std::size_t i) {
    QuantumPoint& p = qp[i];
    RunConfig c = cfg;
    c.agent.ell = p.ell;
    c.agent.omega = p.omega;
    try {
      const QuantumRun run = run_quantum(c);
      const double a = run.final_probabilities(nu0), b = run.final_probabilities(partner);
      p.survival = a / (a + b);
      p.pair_end = a + b;
      p.conservation = detail::conservation_of(run);
    } catch (const std::exception& e) {
      p.status = "failed";
      p.error = e.what();
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "interference: ell %.4g omega %.6g survival %.6f (%s)", p.ell, p.omega,
                  p.survival, p.status.c_str());
    detail::log(ctx, buf);
  });

  Table qt("interference_quantum", {{"ell", "X"}, {"omega", "K/hbar"}, {"v0", "X*K/hbar"}, {"survival", ""},
                                    {"pair_end", ""}, {"classical_survival", ""}, {"status", ""}});
  std::vector<detail::Conservation> cons;
  for (std::size_t i = 0; i < qp.size(); ++i) {
    const QuantumPoint& p = qp[i];
    const std::size_t j = i % s.quantum_omegas.size();
    qt.add_row({p.ell, p.omega, p.omega * X0, p.survival, p.pair_end, clq[j].survival, p.status});
    if (p.status == "ok") cons.push_back(p.conservation);
    else out.warnings.push_back("ell " + format_number(p.ell) + ", omega " + format_number(p.omega) + ": " + p.error);
  }
  out.tables.push_back(std::move(qt));

  Table contrast("contrast", {{"source", ""}, {"ell", "X"}, {"contrast", ""}});
  if (!s.quantum_omegas.empty()) {
    double cmax = -1, cmin = 2;
    for (const auto& c : clq) {
      cmax = std::max(cmax, c.survival);
      cmin = std::min(cmin, c.survival);
    }
    contrast.add_row({std::string("classical"), 0.0, cmax - cmin});
    out.summary.emplace_back("contrast_classical", cmax - cmin);
  }
  std::vector<double> ells = s.ells;
  std::sort(ells.begin(), ells.end());
  std::vector<double> contrasts;
  for (double ell : ells) {
    double cmax = -1, cmin = 2;
    bool complete = true;
    for (const auto& p : qp) {
      if (p.ell != ell) continue;
      if (p.status != "ok") complete = false;
      cmax = std::max(cmax, p.survival);
      cmin = std::min(cmin, p.survival);
    }
    const double c = complete && !s.quantum_omegas.empty() ? cmax - cmin : kNaN;
    contrasts.push_back(c);
    contrast.add_row({std::string("quantum"), ell, c});
    out.summary.emplace_back("contrast_ell_" + format_number(ell), c);
  }
  out.tables.push_back(std::move(contrast));
  if (contrasts.size() >= 2) {
    bool decreasing = true;
    double worst_step = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < contrasts.size(); ++i) {
      const double step = contrasts[i] - contrasts[i - 1];
      decreasing = decreasing && step < 0;
      worst_step = std::max(worst_step, step);
    }
    out.checks.push_back(check_flag("contrast_strictly_decreasing_in_ell", decreasing, worst_step, 0.0));
  }
  detail::add_worst_conservation_checks(out, cons);
}

}  // namespace

RunOutput run_interference(const RunConfig& config, const RunContext& ctx) {
  const RunConfig cfg = detail::apply_context(config, ctx);
  return guarded("interference", [&](RunOutput& out) { interference_into(cfg, ctx, out); });
}

}  // namespace qwork
