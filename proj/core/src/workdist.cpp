#include "qwork/workdist.hpp"

#include "qwork/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace qwork {

namespace {

WorkDistribution from_map(const std::map<double, double>& m) {
  WorkDistribution d;
  for (const auto& [w, p] : m) {
    d.support.push_back(w);
    d.probs.push_back(p);
    d.mean += w * p;
  }
  return d;
}

AutonomousOptions single_shot(const AutonomousOptions& opts) {
  AutonomousOptions o = opts;
  o.checkpoints = 1;
  return o;
}

Eigen::VectorXcd evolve_final(const CompositeHamiltonian& H, const CompositeState& psi,
                              const AutonomousOptions& opts) {
  Trajectory tr = evolve_autonomous(H, psi, single_shot(opts));
  return std::move(tr.states.back());
}

}  // namespace

double WorkDistribution::total() const {
  double s = 0.0;
  for (double p : probs) s += p;
  return s;
}

double WorkDistribution::width(double min_prob) const {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (probs[i] < min_prob) continue;
    if (!any) {
      lo = hi = support[i];
      any = true;
    }
    lo = std::min(lo, support[i]);
    hi = std::max(hi, support[i]);
  }
  return hi - lo;
}

WorkDistribution work_system(std::span<const ChannelSnapshot> final_snapshots,
                             const ChannelSnapshot& initial) {
  WorkDistribution d;
  for (const auto& s : final_snapshots) {
    if (s.p < ChannelDecomposition::null_threshold) continue;
    d.support.push_back(s.E - initial.E);
    d.probs.push_back(s.p);
    d.mean += s.p * (s.E - initial.E);
  }
  return d;
}

Eigen::VectorXd agent_occupation(const CompositeState& state) {
  return state.blocks().cwiseAbs2().rowwise().sum();
}

Eigen::VectorXd agent_occupation(const ChannelDecomposition& dec, const ChannelFrame& frame) {
  const Eigen::MatrixXcd C = frame.positions().vectors() * dec.amplitudes;
  return C.cwiseAbs2().rowwise().sum();
}

WorkDistribution work_agent(const Eigen::VectorXd& final_occupation,
                            const Eigen::VectorXd& initial_occupation, double omega) {
  const Eigen::Index nf = final_occupation.size();
  const Eigen::Index ni = initial_occupation.size();
  std::map<double, double> acc;
  for (Eigen::Index m = -(ni - 1); m <= nf - 1; ++m) {
    double p = 0.0;
    for (Eigen::Index n0 = std::max<Eigen::Index>(0, -m); n0 < ni && n0 + m < nf; ++n0) {
      p += initial_occupation(n0) * final_occupation(n0 + m);
    }
    if (p > 1e-16) acc[-omega * double(m)] += p;
  }
  return from_map(acc);
}

WorkDistribution SpectralFunction::distribution() const {
  std::map<double, double> acc;
  for (std::size_t i = 0; i < m.size(); ++i) acc[omega * m[i]] += values[i].real();
  return from_map(acc);
}

WorkDistribution SpectralFunction::two_point_distribution() const {
  std::map<double, double> acc;
  for (std::size_t i = 0; i < m.size(); ++i) acc[omega * m[i]] += two_point[i];
  return from_map(acc);
}

double SpectralFunction::max_imag() const {
  double r = 0.0;
  for (const auto& v : values) r = std::max(r, std::abs(v.imag()));
  return r;
}

double SpectralFunction::min_real() const {
  double r = 0.0;
  for (const auto& v : values) r = std::min(r, v.real());
  return r;
}

cplx SpectralFunction::at(int mm) const {
  auto it = std::find(m.begin(), m.end(), mm);
  return it == m.end() ? cplx(0.0) : values[static_cast<std::size_t>(it - m.begin())];
}

SpectralFunction work_spectral(const CompositeHamiltonian& H, const Eigen::VectorXcd& sys_state,
                               const Eigen::VectorXcd& agent_coeffs,
                               const AutonomousOptions& opts, double weight_cutoff) {
  const auto A = static_cast<Eigen::Index>(H.agent_dim());
  const auto S = static_cast<Eigen::Index>(H.sys_dim());
  if (agent_coeffs.size() != A || sys_state.size() != S) {
    throw std::invalid_argument("work_spectral: preparation dimension mismatch");
  }
  const CompositeState psi0 = CompositeState::product(sys_state, agent_coeffs);
  const Eigen::VectorXcd Upsi = evolve_final(H, psi0, opts);
  Eigen::Map<const Eigen::MatrixXcd> Ub(Upsi.data(), A, S);

  std::vector<cplx> q(static_cast<std::size_t>(2 * A - 1), 0.0);
  std::vector<double> tpm(q.size(), 0.0);
  for (Eigen::Index n0 = 0; n0 < A; ++n0) {
    const double w0 = std::norm(agent_coeffs(n0));
    if (w0 <= weight_cutoff) continue;
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(A);
    e(n0) = 1.0;
    const Eigen::VectorXcd Uc = evolve_final(H, CompositeState::product(sys_state, e), opts);
    Eigen::Map<const Eigen::MatrixXcd> Cb(Uc.data(), A, S);
    for (Eigen::Index n = 0; n < A; ++n) {
      const auto idx = static_cast<std::size_t>(n - n0 + A - 1);
      q[idx] += Ub.row(n).conjugate().cwiseProduct(Cb.row(n)).sum() * agent_coeffs(n0);
      tpm[idx] += w0 * Cb.row(n).squaredNorm();
    }
  }

  SpectralFunction sf;
  sf.omega = H.agent().omega();
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(q.size()); ++i) {
    sf.m.push_back(static_cast<int>(i - (A - 1)));
    sf.values.push_back(q[static_cast<std::size_t>(i)]);
    sf.two_point.push_back(tpm[static_cast<std::size_t>(i)]);
  }
  return sf;
}

std::vector<double> default_tau_grid(double omega, int points) {
  if (points < 1) throw std::invalid_argument("default_tau_grid: points >= 1");
  std::vector<double> t(static_cast<std::size_t>(points));
  const double period = 2.0 * std::numbers::pi / omega;
  for (int j = 0; j < points; ++j) t[static_cast<std::size_t>(j)] = period * j / points;
  return t;
}

FidelitySeries fidelity_amplitude(const CompositeHamiltonian& H, const CompositeState& psi0,
                                  std::span<const double> taus, const AutonomousOptions& opts,
                                  int jobs) {
  const auto A = static_cast<Eigen::Index>(H.agent_dim());
  const auto S = static_cast<Eigen::Index>(H.sys_dim());
  const double omega = H.agent().omega();
  const Eigen::VectorXcd Upsi = evolve_final(H, psi0, opts);

  auto apply_free = [&](const Eigen::VectorXcd& v, double tau) {
    Eigen::VectorXcd out = v;
    Eigen::Map<Eigen::MatrixXcd> B(out.data(), A, S);
    for (Eigen::Index n = 0; n < A; ++n) B.row(n) *= std::polar(1.0, -omega * double(n) * tau);
    return out;
  };

  FidelitySeries F;
  F.taus.assign(taus.begin(), taus.end());
  F.values.assign(taus.size(), 0.0);
  parallel_for(taus.size(), jobs, [&](std::size_t j) {
    const double tau = taus[j];
    if (tau == 0.0) {
      F.values[j] = Upsi.squaredNorm();
      return;
    }
    const Eigen::VectorXcd a = apply_free(Upsi, tau);
    const CompositeState pre(H.sys_dim(), H.agent_dim(), apply_free(psi0.amplitudes(), tau),
                             psi0.time());
    const Eigen::VectorXcd b = evolve_final(H, pre, opts);
    F.values[j] = a.dot(b);
  });
  return F;
}

SpectralFunction spectral_from_fidelity(const FidelitySeries& F, double omega) {
  const auto N = static_cast<int>(F.taus.size());
  if (N < 2) throw std::invalid_argument("spectral_from_fidelity: need >= 2 samples");
  const double period = 2.0 * std::numbers::pi / omega;
  for (int j = 0; j < N; ++j) {
    const double expect = period * j / N;
    if (std::abs(F.taus[static_cast<std::size_t>(j)] - expect) > 1e-9 * period) {
      throw std::invalid_argument("spectral_from_fidelity: tau grid is not a uniform full period");
    }
  }
  SpectralFunction sf;
  sf.omega = omega;
  for (int m = -N / 2; m < N - N / 2; ++m) {
    cplx acc = 0.0;
    for (int j = 0; j < N; ++j) {
      acc += F.values[static_cast<std::size_t>(j)] *
             std::polar(1.0, -2.0 * std::numbers::pi * double(j) * m / N);
    }
    sf.m.push_back(m);
    sf.values.push_back(acc / double(N));
    sf.two_point.push_back(0.0);
  }
  return sf;
}

double ancilla_probability(cplx F, double phi) {
  if (std::abs(F) > 1.0 + 1e-10) throw std::invalid_argument("ancilla_probability: |F| > 1");
  const double p = 0.5 * (1.0 + (F * std::polar(1.0, phi)).real());
  return std::clamp(p, 0.0, 1.0);
}

MeanWork mean_work(const CompositeHamiltonian& H, const CompositeState& initial,
                   const CompositeState& final) {
  MeanWork w;
  w.system_gain = H.system_energy(final.amplitudes()) - H.system_energy(initial.amplitudes());
  const double dA = H.agent_energy(final.amplitudes()) - H.agent_energy(initial.amplitudes());
  w.agent_loss = -dA;
  w.residual = w.system_gain + dA;
  return w;
}

}  // namespace qwork
