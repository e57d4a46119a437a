#pragma once

#include "qwork/channels.hpp"
#include "qwork/hilbert.hpp"
#include "qwork/model.hpp"
#include "qwork/propagate.hpp"

#include <span>
#include <vector>

namespace qwork {

struct WorkDistribution {
  std::vector<double> support;
  std::vector<double> probs;
  double mean = 0.0;

  double total() const;
  // max - min of the support among points with probability above min_prob.
  double width(double min_prob = 1e-6) const;
};

// W_nu = E_nu(X_nu(t)) - E_nu0(X_nu0(0)).
WorkDistribution work_system(std::span<const ChannelSnapshot> final_snapshots,
                             const ChannelSnapshot& initial);

// Marginal over the system index.
Eigen::VectorXd agent_occupation(const CompositeState& state);
// sum_nu p_nu |<n|psi^(nu)>|^2.
Eigen::VectorXd agent_occupation(const ChannelDecomposition& dec, const ChannelFrame& frame);

// W = -(n - n0) omega with n0 drawn from the preparation distribution.
WorkDistribution work_agent(const Eigen::VectorXd& final_occupation,
                            const Eigen::VectorXd& initial_occupation, double omega);

struct SpectralFunction {
  double omega = 0.0;
  // Lattice index m, w = omega m.
  std::vector<int> m;
  // Quasi-distribution whose Fourier series is F(tau).
  std::vector<cplx> values;
  // Two-point-measurement distribution on the same lattice.
  std::vector<double> two_point;

  WorkDistribution distribution() const;
  WorkDistribution two_point_distribution() const;
  double max_imag() const;
  double min_real() const;
  cplx at(int mm) const;
};

// Propagates each preparation component c_n0 |sys0, n0> separately.
SpectralFunction work_spectral(const CompositeHamiltonian& H, const Eigen::VectorXcd& sys_state,
                               const Eigen::VectorXcd& agent_coeffs,
                               const AutonomousOptions& opts, double weight_cutoff = 1e-16);

struct FidelitySeries {
  std::vector<double> taus;
  std::vector<cplx> values;
};

// 256-point grid over one agent period by default.
std::vector<double> default_tau_grid(double omega, int points = 256);

FidelitySeries fidelity_amplitude(const CompositeHamiltonian& H, const CompositeState& psi0,
                                  std::span<const double> taus, const AutonomousOptions& opts,
                                  int jobs = 1);

// Q(m) = (1/N) sum_j F(tau_j) exp(-i omega m tau_j) on a uniform full-period grid,
// m in [-N/2, N/2).
SpectralFunction spectral_from_fidelity(const FidelitySeries& F, double omega);

double ancilla_probability(cplx F, double phi);

struct MeanWork {
  double system_gain = 0.0;
  double agent_loss = 0.0;
  double residual = 0.0;
};

MeanWork mean_work(const CompositeHamiltonian& H, const CompositeState& initial,
                   const CompositeState& final);

}  // namespace qwork
