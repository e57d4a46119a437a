#pragma once

#include <optional>
#include <span>
#include <vector>

namespace qwork {

enum class Flavor { piston, oscillator };

struct AgentDesign {
  Flavor flavor = Flavor::oscillator;
  double M = 0.0;
  double ell = 0.0;
  // Oscillator frequency; unused for the piston.
  double omega = 0.0;

  static AgentDesign oscillator(double omega, double ell);
  static AgentDesign piston(double M, double ell);

  double mass() const;
  double dv_uc() const;
  double dv_br(double W0, double v0) const;
  // Oscillator only: launch amplitude and photon number for sweep rate v0.
  double X0(double v0) const;
  double n_ph(double v0) const;
};

// Oscillator borders written in terms of n_ph.
double dv_uc_from_nph(double v0, double n_ph);
double dv_br_from_nph(double W0, double v0, double omega, double n_ph);

struct DesignGoal {
  double W0 = 0.0;
  double v0 = 0.0;
  double dv0 = 0.0;
  // Optional interference requirement.
  std::optional<double> dX0;
  std::optional<double> dW0;
};

struct DesignCheck {
  double margin = 0.0;
  bool pass = false;
  bool strong = false;
};

struct DesignReport {
  DesignGoal goal;
  double dv_uc = 0.0;
  double dv_br = 0.0;
  double n_ph = 0.0;
  DesignCheck uc;
  DesignCheck br;
  DesignCheck res;
  std::optional<DesignCheck> interference;
};

DesignCheck make_check(double margin, double strong_threshold = 0.1);

DesignReport evaluate_design(const AgentDesign& design, const DesignGoal& goal,
                             double strong_threshold = 0.1);

struct InterferenceResolution {
  double delta_phi = 0.0;
  double dv0_required = 0.0;
};

InterferenceResolution interference_resolution(double v0, double dX0, double dW0);

// Border n_ph values at one omega of the (omega, n_ph) plane.
struct DiagramRow {
  double omega = 0.0;
  double nph_uc = 0.0;
  double nph_br = 0.0;
  double nph_res = 0.0;
  std::vector<double> nph_const_lw;
  std::vector<double> nph_const_l2w;
};

// Border values at one M of the (M, ell) piston plane.
struct PistonRow {
  double M = 0.0;
  double ell_uc = 0.0;
  double ell_res = 0.0;
  // M at the BR border, independent of ell.
  double M_br = 0.0;
};

struct DesignDiagram {
  std::vector<double> lw_values;
  std::vector<double> l2w_values;
  std::vector<DiagramRow> oscillator;
  std::vector<PistonRow> piston;
};

std::vector<double> log_grid(double lo, double hi, int points);

DesignDiagram design_diagram(const DesignGoal& goal, std::span<const double> omegas,
                             std::span<const double> masses, std::span<const double> lw_values,
                             std::span<const double> l2w_values);

struct LzSample {
  double Xdot = 0.0;
  double P = 0.0;
};

struct LzFit {
  double c = 0.0;
  double q = 2.0;
  double rms_log_residual = 0.0;
  double max_abs_residual = 0.0;

  double predict(double Xdot) const;
  // Xdot at which P = 1/2.
  double half_velocity() const;
};

// Least squares of log P = -c Xdot^(-q).
LzFit lz_fit(std::span<const LzSample> samples, double q = 2.0);

struct TwoPath {
  double coherent = 0.0;
  double dephased = 0.0;
};

TwoPath two_path_probability(double P, double delta_phi);

}  // namespace qwork
