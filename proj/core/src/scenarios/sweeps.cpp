#include "internal.hpp"

#include "qwork/design.hpp"
#include "qwork/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>

namespace qwork {

namespace {

using detail::guarded;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Point {
  double X0 = 0.0;
  double omega = 0.0;
  double ell = 0.0;
  detail::ProtocolMeans means{kNaN, kNaN, kNaN};
  detail::Conservation conservation;
  std::string status = "ok";
  std::string error;
};

void run_point(const RunConfig& base, Point& p, const RunContext& ctx, const std::string& tag) {
  RunConfig c = base;
  c.agent.omega = p.omega;
  c.agent.ell = p.ell;
  c.agent.X0 = p.X0;
  c.agent.n_ph.reset();
  c.agent.n_max.reset();
  try {
    p.means = detail::protocol_means(c, &p.conservation);
  } catch (const std::exception& e) {
    p.status = "failed";
    p.error = e.what();
  }
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%s: omega %.6g ell %.6g X0 %.6g -> W_qm %.6g W_cl0 %.6g W_cl %.6g (%s)",
                tag.c_str(), p.omega, p.ell, p.X0, p.means.quantum, p.means.classical, p.means.recorded,
                p.status.c_str());
  detail::log(ctx, buf);
}

std::vector<detail::Conservation> finished_runs(const std::vector<Point>& pts) {
  std::vector<detail::Conservation> runs;
  for (const auto& p : pts)
    if (p.status == "ok") runs.push_back(p.conservation);
  return runs;
}

void sweep_x0_into(const RunConfig& cfg, const RunContext& ctx, RunOutput& out) {
  cfg.validate();
  if (!cfg.sweep_x0) throw ConfigError("sweep-x0 needs a sweep_x0 section");
  const SweepX0Section& s = *cfg.sweep_x0;
  if (s.v0_values.empty() || s.x0_factors.empty()) throw ConfigError("sweep_x0: empty grid");
  const double Xc = cfg.model.Xc;
  const double ell = cfg.agent.ell;

  std::vector<Point> pts;
  for (double f : s.x0_factors)
    for (double v0 : s.v0_values) {
      Point p;
      p.X0 = f * Xc;
      p.omega = v0 / p.X0;
      p.ell = ell;
      pts.push_back(p);
    }
  parallel_for(pts.size(), ctx.jobs, [&](std::size_t i) { run_point(cfg, pts[i], ctx, "sweep-x0"); });

  Table t("sweep_x0", {{"x0_factor", ""}, {"X0", "X"}, {"v0", "X*K/hbar"}, {"omega", "K/hbar"},
                       {"W_quantum", "K"}, {"W_classical_cosine", "K"}, {"W_recorded_qc", "K"}, {"status", ""}});
  std::size_t k = 0;
  for (double f : s.x0_factors)
    for (double v0 : s.v0_values) {
      const Point& p = pts[k++];
      t.add_row({f, p.X0, v0, p.omega, p.means.quantum, p.means.classical, p.means.recorded, p.status});
      if (!p.error.empty()) out.warnings.push_back("X0 " + format_number(p.X0) + ", v0 " + format_number(v0) + ": " + p.error);
    }
  out.tables.push_back(std::move(t));

  // Curve agreement between successive X0 factors, normalized by the larger curve's peak |<W>|.
  std::vector<double> factors = s.x0_factors;
  std::sort(factors.begin(), factors.end());
  const std::size_t nv = s.v0_values.size();
  auto curve = [&](double f, int which) {
    const auto it = std::find(s.x0_factors.begin(), s.x0_factors.end(), f);
    const std::size_t row = static_cast<std::size_t>(it - s.x0_factors.begin());
    std::vector<double> w(nv);
    for (std::size_t j = 0; j < nv; ++j) {
      const auto& m = pts[row * nv + j].means;
      w[j] = which == 0 ? m.quantum : which == 1 ? m.classical : m.recorded;
    }
    return w;
  };
  Table ins("insensitivity", {{"protocol", ""}, {"x0_factor_a", ""}, {"x0_factor_b", ""},
                              {"max_relative_difference", ""}, {"agree", ""}});
  const char* names[] = {"quantum", "classical_cosine", "recorded_qc"};
  for (int which = 0; which < 3; ++which) {
    std::vector<double> diffs;
    for (std::size_t i = 0; i + 1 < factors.size(); ++i) {
      const auto a = curve(factors[i], which), b = curve(factors[i + 1], which);
      double scale = 0.0, diff = 0.0;
      for (std::size_t j = 0; j < nv; ++j) {
        scale = std::max(scale, std::abs(b[j]));
        diff = std::max(diff, std::abs(a[j] - b[j]));
      }
      const double rel = scale > 0 ? diff / scale : (diff > 0 ? kNaN : 0.0);
      diffs.push_back(rel);
      ins.add_row({std::string(names[which]), factors[i], factors[i + 1], rel,
                   static_cast<std::int64_t>(rel < s.insensitivity_tol)});
      out.summary.emplace_back(std::string("rel_diff_") + names[which] + "_" + format_number(factors[i]) + "_" +
                                   format_number(factors[i + 1]),
                               rel);
    }
    // Smallest factor from which every successive pair agrees.
    double thr = kNaN;
    for (std::size_t i = diffs.size(); i-- > 0;) {
      if (diffs[i] < s.insensitivity_tol) thr = factors[i];
      else break;
    }
    out.summary.emplace_back(std::string("insensitive_from_factor_") + names[which], thr);
  }
  out.tables.push_back(std::move(ins));

  // Adiabatic oracle: classical drive at a much slower sweep rate recovers the level difference.
  const double v_slow = *std::min_element(s.v0_values.begin(), s.v0_values.end()) / s.adiabatic_slowdown;
  const double X0 = factors.back() * Xc;
  RunConfig slow = cfg;
  slow.agent.X0 = X0;
  slow.agent.n_ph.reset();
  slow.agent.omega = v_slow / X0;
  const ClassicalRun c = run_classical(slow, DriveProtocol::classical_cosine(X0, slow.agent.omega));
  const SystemModel model(cfg.model.params(), cfg.model.coupled);
  const AdiabaticLevels a0 = adiabatic_levels(model, -X0);
  const double dE = continue_levels(model, a0, X0).energy_of(cfg.nu0) - a0.energies(cfg.nu0);
  const double span = work_span(model, cfg.nu0, X0);
  out.summary.emplace_back("adiabatic_v0", v_slow);
  out.summary.emplace_back("adiabatic_level_difference", dE);
  out.summary.emplace_back("adiabatic_W_classical", c.work.mean);
  out.checks.push_back(check_below("adiabatic_limit_over_span", std::abs(c.work.mean - dE) / span, 0.01));

  detail::add_worst_conservation_checks(out, finished_runs(pts));
  std::size_t failed = 0;
  for (const auto& p : pts) failed += p.status != "ok";
  out.summary.emplace_back("failed_points", static_cast<double>(failed));
}

void sweep_omega_into(const RunConfig& cfg, const RunContext& ctx, RunOutput& out) {
  cfg.validate();
  if (!cfg.sweep_omega) throw ConfigError("sweep-omega needs a sweep_omega section");
  const SweepOmegaSection& s = *cfg.sweep_omega;
  if (s.omegas.empty()) throw ConfigError("sweep_omega.omegas is empty");
  if (!(s.v0 > 0) || !(s.reference_omega > 0) || !(s.reference_ell > 0))
    throw ConfigError("sweep_omega: v0, reference_omega and reference_ell must be positive");
  std::vector<std::string> paths;
  if (s.path != "constant_dvuc") paths.push_back("constant_dvbr");
  if (s.path != "constant_dvbr") paths.push_back("constant_dvuc");
  const double Xc = cfg.model.Xc;

  std::vector<double> omegas = s.omegas;
  std::sort(omegas.begin(), omegas.end());
  std::vector<Point> pts;
  std::vector<std::string> path_of;
  for (const auto& path : paths)
    for (double w : omegas) {
      Point p;
      p.omega = w;
      p.X0 = s.v0 / w;
      p.ell = path == "constant_dvbr" ? s.reference_ell * std::sqrt(s.reference_omega / w)
                                      : s.reference_ell * s.reference_omega / w;
      if (p.X0 < s.min_x0_factor * Xc) p.status = "skipped";
      pts.push_back(p);
      path_of.push_back(path);
    }
  parallel_for(pts.size(), ctx.jobs, [&](std::size_t i) {
    if (pts[i].status == "ok") run_point(cfg, pts[i], ctx, "sweep-omega " + path_of[i]);
  });

  Table t("sweep_omega", {{"path", ""}, {"omega", "K/hbar"}, {"ell", "X"}, {"X0", "X"}, {"dv_uc", "X*K/hbar"},
                          {"l2w", ""}, {"W_quantum", "K"}, {"W_classical_cosine", "K"}, {"W_recorded_qc", "K"},
                          {"gap_quantum_recorded", "K"}, {"gap_quantum_classical", "K"}, {"status", ""}});
  std::map<std::string, std::vector<std::pair<double, double>>> gaps;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point& p = pts[i];
    const double gap = std::abs(p.means.quantum - p.means.recorded);
    const double gap0 = std::abs(p.means.quantum - p.means.classical);
    t.add_row({path_of[i], p.omega, p.ell, p.X0, p.ell * p.omega, p.ell * p.ell * p.omega, p.means.quantum,
               p.means.classical, p.means.recorded, gap, gap0, p.status});
    if (p.status == "ok") gaps[path_of[i]].emplace_back(p.omega, gap);
    if (p.status == "skipped")
      out.warnings.push_back(path_of[i] + ": omega " + format_number(p.omega) + " skipped, X0 below " +
                             format_number(s.min_x0_factor) + " Xc");
    if (!p.error.empty()) out.warnings.push_back(path_of[i] + ": omega " + format_number(p.omega) + ": " + p.error);
  }
  out.tables.push_back(std::move(t));

  // Both paths: the quantum-classical gap should grow with omega.
  for (const auto& path : paths) {
    const auto& g = gaps[path];
    int violations = 0;
    for (std::size_t i = 1; i < g.size(); ++i) violations += g[i].second < g[i - 1].second;
    out.summary.emplace_back("gap_trend_violations_" + path, violations);
    out.summary.emplace_back("points_" + path, static_cast<double>(g.size()));
    const int allowed = path == "constant_dvbr" ? 1 : 0;
    if (g.size() >= 2)
      out.checks.push_back(check_flag("gap_grows_with_omega_" + path, violations <= allowed, violations, allowed));
  }
  detail::add_worst_conservation_checks(out, finished_runs(pts));
}

}  // namespace

RunOutput run_sweep_x0(const RunConfig& config, const RunContext& ctx) {
  const RunConfig cfg = detail::apply_context(config, ctx);
  return guarded("sweep-x0", [&](RunOutput& out) { sweep_x0_into(cfg, ctx, out); });
}

RunOutput run_sweep_omega(const RunConfig& config, const RunContext& ctx) {
  const RunConfig cfg = detail::apply_context(config, ctx);
  return guarded("sweep-omega", [&](RunOutput& out) { sweep_omega_into(cfg, ctx, out); });
}

}  // namespace qwork
