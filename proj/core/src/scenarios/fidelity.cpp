#include "internal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace qwork {

namespace {

using detail::guarded;

void fidelity_into(const RunConfig& cfg, const RunContext& ctx, RunOutput& out) {
  cfg.validate();
  const FidelitySection s = cfg.fidelity.value_or(FidelitySection{});
  if (s.tau_points < 2) throw ConfigError("fidelity.tau_points must be at least 2");
  if (s.phi_points < 2) throw ConfigError("fidelity.phi_points must be at least 2");
  const ResolvedAgent ag = resolve_agent(cfg);
  const SystemModel model(cfg.model.params(), cfg.model.coupled);
  const AgentBasis basis(ag.n_max, ag.omega, ag.ell);
  const auto pos = std::make_shared<const AgentPositionBasis>(basis);
  const CompositeHamiltonian H(model, pos);
  const AdiabaticLevels anchor = adiabatic_levels(model, -ag.X0);
  const Eigen::VectorXcd sys0 = anchor.vectors.col(cfg.nu0).cast<cplx>();
  const Eigen::VectorXcd agent0 = coherent_state(basis, -ag.X0, 0.0);
  const CompositeState psi0 = CompositeState::product(sys0, agent0);
  out.derived.emplace_back("X0", ag.X0);
  out.derived.emplace_back("n_max", ag.n_max);
  out.derived.emplace_back("M", ag.mass());
  out.derived.emplace_back("v0", ag.v0());

  AutonomousOptions opts;
  opts.t_final = cfg.numerics.t_final.value_or(std::numbers::pi / ag.omega);
  opts.dt = cfg.numerics.dt;
  opts.checkpoints = 1;
  opts.krylov.max_dim = cfg.numerics.krylov_dim;
  opts.krylov.tol = cfg.numerics.krylov_tol;
  opts.leakage_tol = cfg.numerics.leakage_tol;
  out.derived.emplace_back("t_final", opts.t_final);

  const std::vector<double> taus = default_tau_grid(ag.omega, s.tau_points);
  const FidelitySeries F = fidelity_amplitude(H, psi0, taus, opts, ctx.jobs);
  detail::log(ctx, "fidelity: F(tau) done");
  const SpectralFunction fromF = spectral_from_fidelity(F, ag.omega);
  const SpectralFunction direct = work_spectral(H, sys0, agent0, opts);
  detail::log(ctx, "fidelity: direct spectral function done");

  Table ft("fidelity", {{"tau", "hbar/K"}, {"ReF", ""}, {"ImF", ""}, {"absF", ""}});
  double absmax = 0.0;
  for (std::size_t j = 0; j < taus.size(); ++j) {
    ft.add_row({taus[j], F.values[j].real(), F.values[j].imag(), std::abs(F.values[j])});
    absmax = std::max(absmax, std::abs(F.values[j]));
  }
  out.tables.push_back(std::move(ft));

  // Union of both lattices; a point missing from one side counts as zero.
  std::map<int, std::pair<cplx, cplx>> merged;
  std::map<int, double> tpm;
  for (std::size_t i = 0; i < fromF.m.size(); ++i) merged[fromF.m[i]].first = fromF.values[i];
  for (std::size_t i = 0; i < direct.m.size(); ++i) {
    merged[direct.m[i]].second = direct.values[i];
    tpm[direct.m[i]] = direct.two_point[i];
  }
  Table st("spectral", {{"m", ""}, {"w", "K"}, {"ReQ_fidelity", ""}, {"ImQ_fidelity", ""}, {"ReQ_direct", ""},
                        {"ImQ_direct", ""}, {"P_two_point", ""}});
  double max_dev = 0.0;
  for (const auto& [m, q] : merged) {
    max_dev = std::max(max_dev, std::abs(q.first - q.second));
    if (std::abs(q.first) < 1e-14 && std::abs(q.second) < 1e-14) continue;
    st.add_row({static_cast<std::int64_t>(m), ag.omega * m, q.first.real(), q.first.imag(), q.second.real(),
                q.second.imag(), tpm.count(m) ? tpm[m] : 0.0});
  }
  out.tables.push_back(std::move(st));

  Table at("ancilla", {{"tau", "hbar/K"}, {"phi", "rad"}, {"P_up", ""}});
  for (std::size_t j = 0; j < taus.size(); ++j)
    for (int k = 0; k < s.phi_points; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / (s.phi_points - 1);
      at.add_row({taus[j], phi, ancilla_probability(F.values[j], phi)});
    }
  out.tables.push_back(std::move(at));

  const cplx F0 = F.values.front();
  const double p_same = ancilla_probability(F0, 0.0);
  const double p_half = ancilla_probability(0.0, 0.0);
  const double p_opposite = ancilla_probability(F0, std::numbers::pi);
  out.summary.emplace_back("fourier_vs_direct_max_error", max_dev);
  out.summary.emplace_back("F0_real", F0.real());
  out.summary.emplace_back("F0_imag", F0.imag());
  out.summary.emplace_back("max_abs_F", absmax);
  out.summary.emplace_back("direct_max_imag", direct.max_imag());
  out.summary.emplace_back("direct_min_real", direct.min_real());
  out.summary.emplace_back("W_mean_direct", direct.distribution().mean);
  out.summary.emplace_back("W_mean_two_point", direct.two_point_distribution().mean);

  out.checks.push_back(check_below("fourier_vs_direct_max_error", max_dev, 1e-6));
  out.checks.push_back(check_below("F0_minus_one", std::abs(F0 - 1.0), 1e-10));
  out.checks.push_back(check_below("abs_F_excess", std::max(0.0, absmax - 1.0), 1e-10));
  out.checks.push_back(check_below("ancilla_tau0_phi0_minus_one", std::abs(p_same - 1.0), 1e-10));
  out.checks.push_back(check_below("ancilla_F0_minus_half", std::abs(p_half - 0.5), 1e-12));
  out.checks.push_back(check_below("ancilla_tau0_phipi", std::abs(p_opposite), 1e-10));
}

}  // namespace

RunOutput run_fidelity(const RunConfig& config, const RunContext& ctx) {
  const RunConfig cfg = detail::apply_context(config, ctx);
  return guarded("fidelity", [&](RunOutput& out) { fidelity_into(cfg, ctx, out); });
}

}  // namespace qwork
