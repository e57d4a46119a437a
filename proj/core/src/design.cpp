#include "qwork/design.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace qwork {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

AgentDesign AgentDesign::oscillator(double omega, double ell) {
  require_positive(omega, "omega");
  require_positive(ell, "ell");
  AgentDesign d;
  d.flavor = Flavor::oscillator;
  d.omega = omega;
  d.ell = ell;
  d.M = 1.0 / (ell * ell * omega);
  return d;
}

AgentDesign AgentDesign::piston(double M, double ell) {
  require_positive(M, "M");
  require_positive(ell, "ell");
  AgentDesign d;
  d.flavor = Flavor::piston;
  d.M = M;
  d.ell = ell;
  return d;
}

double AgentDesign::mass() const { return M; }

double AgentDesign::dv_uc() const {
  return flavor == Flavor::oscillator ? ell * omega : 1.0 / (M * ell);
}

double AgentDesign::dv_br(double W0, double v0) const {
  require_positive(v0, "v0");
  return flavor == Flavor::oscillator ? (W0 / v0) * ell * ell * omega : W0 / (M * v0);
}

double AgentDesign::X0(double v0) const {
  if (flavor != Flavor::oscillator) throw std::logic_error("AgentDesign::X0: oscillator only");
  return v0 / omega;
}

double AgentDesign::n_ph(double v0) const {
  if (flavor != Flavor::oscillator) throw std::logic_error("AgentDesign::n_ph: oscillator only");
  const double r = v0 / (omega * ell);
  return r * r;
}

double dv_uc_from_nph(double v0, double n_ph) { return v0 / std::sqrt(n_ph); }

double dv_br_from_nph(double W0, double v0, double omega, double n_ph) {
  return v0 * (W0 / omega) / n_ph;
}

DesignCheck make_check(double margin, double strong_threshold) {
  DesignCheck c;
  c.margin = margin;
  c.pass = margin < 1.0;
  c.strong = margin < strong_threshold;
  return c;
}

DesignReport evaluate_design(const AgentDesign& design, const DesignGoal& goal,
                             double strong_threshold) {
  require_positive(goal.W0, "W0");
  require_positive(goal.v0, "v0");
  require_positive(goal.dv0, "dv0");
  DesignReport r;
  r.goal = goal;
  r.dv_uc = design.dv_uc();
  r.dv_br = design.dv_br(goal.W0, goal.v0);
  r.n_ph = design.flavor == Flavor::oscillator ? design.n_ph(goal.v0) : 0.0;
  r.uc = make_check(r.dv_uc / goal.dv0, strong_threshold);
  r.br = make_check(r.dv_br / goal.dv0, strong_threshold);
  r.res = make_check(r.dv_uc / r.dv_br, strong_threshold);
  if (goal.dX0 && goal.dW0) {
    const auto ir = interference_resolution(goal.v0, *goal.dX0, *goal.dW0);
    r.interference = make_check(r.dv_uc / ir.dv0_required, strong_threshold);
  }
  return r;
}

InterferenceResolution interference_resolution(double v0, double dX0, double dW0) {
  require_positive(v0, "v0");
  require_positive(dX0, "dX0");
  if (dW0 < 0.0 || !std::isfinite(dW0)) throw std::invalid_argument("dW0 must be >= 0");
  InterferenceResolution r;
  r.delta_phi = dX0 * dW0 / v0;
  r.dv0_required = dW0 == 0.0 ? std::numeric_limits<double>::infinity() : v0 * v0 / (dX0 * dW0);
  return r;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  require_positive(lo, "grid lower bound");
  require_positive(hi, "grid upper bound");
  if (points < 1) throw std::invalid_argument("log_grid: points >= 1");
  std::vector<double> g(static_cast<std::size_t>(points));
  if (points == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (points - 1));
  return g;
}

DesignDiagram design_diagram(const DesignGoal& goal, std::span<const double> omegas,
                             std::span<const double> masses, std::span<const double> lw_values,
                             std::span<const double> l2w_values) {
  require_positive(goal.W0, "W0");
  require_positive(goal.v0, "v0");
  require_positive(goal.dv0, "dv0");
  DesignDiagram d;
  d.lw_values.assign(lw_values.begin(), lw_values.end());
  d.l2w_values.assign(l2w_values.begin(), l2w_values.end());
  const double r = goal.v0 / goal.dv0;
  for (double w : omegas) {
    require_positive(w, "omega");
    DiagramRow row;
    row.omega = w;
    row.nph_uc = r * r;
    row.nph_br = r * (goal.W0 / w);
    row.nph_res = (goal.W0 / w) * (goal.W0 / w);
    for (double c : lw_values) row.nph_const_lw.push_back((goal.v0 / c) * (goal.v0 / c));
    for (double c : l2w_values) row.nph_const_l2w.push_back(goal.v0 * goal.v0 / (w * c));
    d.oscillator.push_back(std::move(row));
  }
  for (double M : masses) {
    require_positive(M, "M");
    PistonRow row;
    row.M = M;
    row.ell_uc = 1.0 / (M * goal.dv0);
    row.ell_res = goal.v0 / goal.W0;
    row.M_br = goal.W0 / (goal.v0 * goal.dv0);
    d.piston.push_back(row);
  }
  return d;
}

double LzFit::predict(double Xdot) const { return std::exp(-c * std::pow(Xdot, -q)); }

double LzFit::half_velocity() const { return std::pow(c / std::log(2.0), 1.0 / q); }

LzFit lz_fit(std::span<const LzSample> samples, double q) {
  if (samples.size() < 3) throw std::invalid_argument("lz_fit: need at least 3 samples");
  require_positive(q, "q");
  double szz = 0.0, szy = 0.0;
  double xmin = samples[0].Xdot, xmax = samples[0].Xdot;
  for (const auto& s : samples) {
    if (!(s.Xdot > 0.0)) throw std::invalid_argument("lz_fit: Xdot must be positive");
    if (!(s.P > 0.0 && s.P < 1.0)) throw std::invalid_argument("lz_fit: P must lie in (0,1)");
    const double z = std::pow(s.Xdot, -q);
    szz += z * z;
    szy += z * std::log(s.P);
    xmin = std::min(xmin, s.Xdot);
    xmax = std::max(xmax, s.Xdot);
  }
  if (xmax - xmin <= 1e-12 * xmax) throw std::invalid_argument("lz_fit: degenerate Xdot samples");
  LzFit f;
  f.q = q;
  f.c = -szy / szz;
  double ss = 0.0;
  for (const auto& s : samples) {
    const double rlog = std::log(s.P) + f.c * std::pow(s.Xdot, -q);
    ss += rlog * rlog;
    f.max_abs_residual = std::max(f.max_abs_residual, std::abs(f.predict(s.Xdot) - s.P));
  }
  f.rms_log_residual = std::sqrt(ss / double(samples.size()));
  return f;
}

TwoPath two_path_probability(double P, double delta_phi) {
  if (!(P >= 0.0 && P <= 1.0)) throw std::invalid_argument("two_path_probability: P in [0,1]");
  TwoPath t;
  t.coherent = std::norm(std::complex<double>(1.0 - P) + P * std::polar(1.0, delta_phi));
  t.coherent = std::clamp(t.coherent, 0.0, 1.0);
  t.dephased = P * P + (1.0 - P) * (1.0 - P);
  return t;
}

}  // namespace qwork
