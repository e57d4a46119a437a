#include "internal.hpp"

#include "qwork/design.hpp"

#include <limits>

namespace qwork {

namespace {

using detail::guarded;

std::int64_t flag(bool b) { return b ? 1 : 0; }

void design_into(const RunConfig& cfg, RunOutput& out) {
  const DesignSection s = cfg.design.value_or(DesignSection{});
  DesignGoal goal;
  goal.W0 = s.W0;
  goal.v0 = s.v0;
  goal.dv0 = s.dv0;
  goal.dX0 = s.dX0;
  goal.dW0 = s.dW0;

  const std::vector<double> omegas = log_grid(s.omega_min, s.omega_max, s.omega_points);
  const std::vector<double> masses = log_grid(s.mass_min, s.mass_max, s.mass_points);
  const DesignDiagram d = design_diagram(goal, omegas, masses, s.lw_values, s.l2w_values);

  Table borders("design_borders", {{"omega", "K/hbar"}, {"nph_uc", ""}, {"nph_br", ""}, {"nph_res", ""}});
  Table contours("design_contours", {{"omega", "K/hbar"}, {"kind", ""}, {"value", ""}, {"nph", ""}});
  for (const DiagramRow& r : d.oscillator) {
    borders.add_row({r.omega, r.nph_uc, r.nph_br, r.nph_res});
    for (std::size_t i = 0; i < d.lw_values.size(); ++i)
      contours.add_row({r.omega, std::string("ell_omega"), d.lw_values[i], r.nph_const_lw[i]});
    for (std::size_t i = 0; i < d.l2w_values.size(); ++i)
      contours.add_row({r.omega, std::string("ell2_omega"), d.l2w_values[i], r.nph_const_l2w[i]});
  }
  out.tables.push_back(std::move(borders));
  out.tables.push_back(std::move(contours));

  Table piston("design_piston", {{"M", "hbar^2/(K*X^2)"}, {"ell_uc", "X"}, {"ell_res", "X"}, {"M_br", "hbar^2/(K*X^2)"}});
  for (const PistonRow& r : d.piston) piston.add_row({r.M, r.ell_uc, r.ell_res, r.M_br});
  out.tables.push_back(std::move(piston));

  Table reports("design_reports",
                {{"name", ""}, {"flavor", ""}, {"omega", "K/hbar"}, {"M", "hbar^2/(K*X^2)"}, {"ell", "X"},
                 {"n_ph", ""}, {"dv_uc", "X*K/hbar"}, {"dv_br", "X*K/hbar"}, {"uc_margin", ""}, {"uc_pass", ""},
                 {"uc_strong", ""}, {"br_margin", ""}, {"br_pass", ""}, {"br_strong", ""}, {"res_margin", ""},
                 {"res_pass", ""}, {"res_strong", ""}, {"interference_margin", ""}, {"interference_pass", ""}});
  for (const NamedAgent& a : s.agents) {
    const AgentDesign ad = a.flavor == "piston" ? AgentDesign::piston(a.M, a.ell) : AgentDesign::oscillator(a.omega, a.ell);
    const DesignReport r = evaluate_design(ad, goal, s.strong_threshold);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    reports.add_row({a.name, a.flavor, ad.omega, ad.mass(), ad.ell, r.n_ph, r.dv_uc, r.dv_br, r.uc.margin,
                     flag(r.uc.pass), flag(r.uc.strong), r.br.margin, flag(r.br.pass), flag(r.br.strong),
                     r.res.margin, flag(r.res.pass), flag(r.res.strong),
                     r.interference ? r.interference->margin : nan,
                     r.interference ? Cell(flag(r.interference->pass)) : Cell(std::string())});
    out.summary.emplace_back("dv_uc_" + a.name, r.dv_uc);
    out.summary.emplace_back("dv_br_" + a.name, r.dv_br);
  }
  out.tables.push_back(std::move(reports));

  if (goal.dX0 && goal.dW0) {
    const InterferenceResolution ir = interference_resolution(goal.v0, *goal.dX0, *goal.dW0);
    Table t("interference_resolution", {{"v0", "X*K/hbar"}, {"dX0", "X"}, {"dW0", "K"}, {"delta_phi", "rad"},
                                        {"dv0_required", "X*K/hbar"}});
    t.add_row({goal.v0, *goal.dX0, *goal.dW0, ir.delta_phi, ir.dv0_required});
    out.tables.push_back(std::move(t));
    out.summary.emplace_back("delta_phi", ir.delta_phi);
    out.summary.emplace_back("dv0_required", ir.dv0_required);
  }
  out.derived.emplace_back("nph_uc", d.oscillator.empty() ? 0.0 : d.oscillator.front().nph_uc);
  out.derived.emplace_back("M_br", d.piston.empty() ? 0.0 : d.piston.front().M_br);
  out.derived.emplace_back("ell_res_piston", d.piston.empty() ? 0.0 : d.piston.front().ell_res);
}

}  // namespace

RunOutput run_design(const RunConfig& config, const RunContext&) {
  return guarded("design", [&](RunOutput& out) { design_into(config, out); });
}

}  // namespace qwork
