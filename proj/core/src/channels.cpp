#include "qwork/channels.hpp"

#include <algorithm>
#include <cmath>

namespace qwork {

ChannelFrame::ChannelFrame(const SystemModel& model,
                           std::shared_ptr<const AgentPositionBasis> positions, double anchor_X)
    : model_(model), pos_(std::move(positions)) {
  anchor_ = adiabatic_levels(model_, anchor_X);
  const Eigen::VectorXd& x = pos_->positions();
  const auto A = static_cast<std::size_t>(x.size());
  const auto S = static_cast<Eigen::Index>(model_.dim());
  grid_.resize(A);

  // Grid is ascending: walk up from the anchor, then down.
  const auto first_up = static_cast<std::size_t>(
      std::lower_bound(x.data(), x.data() + x.size(), anchor_X) - x.data());
  const AdiabaticLevels* prev = &anchor_;
  for (std::size_t k = first_up; k < A; ++k) {
    grid_[k] = continue_levels(model_, *prev, x(k));
    prev = &grid_[k];
  }
  prev = &anchor_;
  for (std::size_t k = first_up; k-- > 0;) {
    grid_[k] = continue_levels(model_, *prev, x(k));
    prev = &grid_[k];
  }

  L_.resize(A);
  E_.resize(static_cast<Eigen::Index>(A), S);
  for (std::size_t k = 0; k < A; ++k) {
    const AdiabaticLevels& lv = grid_[k];
    if (lv.ambiguous) ++ambiguous_;
    L_[k].resize(S, S);
    for (Eigen::Index j = 0; j < S; ++j) {
      L_[k].col(lv.labels[j]) = lv.vectors.col(j);
      E_(static_cast<Eigen::Index>(k), lv.labels[j]) = lv.energies(j);
    }
  }
}

double ChannelFrame::energy(int nu, double X) const {
  const Eigen::VectorXd& x = pos_->positions();
  Eigen::Index k;
  (x.array() - X).abs().minCoeff(&k);
  const AdiabaticLevels lv = continue_levels(model_, grid_[static_cast<std::size_t>(k)], X);
  return lv.energy_of(nu);
}

ChannelDecomposition decompose(const CompositeState& state, const ChannelFrame& frame) {
  const Eigen::MatrixXd& V = frame.positions().vectors();
  if (state.agent_dim() != static_cast<std::size_t>(V.rows()) ||
      state.sys_dim() != frame.channels()) {
    throw std::invalid_argument("decompose: state does not match the channel frame");
  }
  const Eigen::MatrixXcd Phi = V.transpose() * state.blocks();
  const auto A = Phi.rows();
  const auto S = Phi.cols();
  ChannelDecomposition dec;
  dec.time = state.time();
  dec.amplitudes.resize(A, S);
  for (Eigen::Index k = 0; k < A; ++k) {
    dec.amplitudes.row(k) = Phi.row(k) * frame.levels_at(static_cast<std::size_t>(k));
  }
  dec.probabilities = dec.amplitudes.cwiseAbs2().colwise().sum().transpose();
  return dec;
}

Eigen::VectorXcd channel_wavepacket(const ChannelDecomposition& dec, const ChannelFrame& frame,
                                    int nu) {
  if (dec.is_null(nu)) return {};
  Eigen::VectorXcd c = frame.positions().vectors() * dec.amplitudes.col(nu);
  return c / std::sqrt(dec.probabilities(nu));
}

CompositeState reassemble(const ChannelDecomposition& dec, const ChannelFrame& frame) {
  const auto A = dec.amplitudes.rows();
  const auto S = dec.amplitudes.cols();
  Eigen::MatrixXcd Phi(A, S);
  for (Eigen::Index k = 0; k < A; ++k) {
    Phi.row(k) = dec.amplitudes.row(k) * frame.levels_at(static_cast<std::size_t>(k)).transpose();
  }
  Eigen::MatrixXcd Psi = frame.positions().vectors() * Phi;
  Eigen::VectorXcd v = Eigen::Map<Eigen::VectorXcd>(Psi.data(), Psi.size());
  const double nrm = v.norm();
  if (std::abs(nrm - 1.0) > CompositeState::norm_tolerance) v /= nrm;
  return CompositeState(static_cast<std::size_t>(S), static_cast<std::size_t>(A), std::move(v),
                        dec.time);
}

double momentum_mean(const Eigen::VectorXcd& c, double ell) {
  // <P> = -sqrt(2) Im(sum conj(c_{n+1}) c_n sqrt(n+1)) / ell
  cplx s = 0.0;
  for (Eigen::Index n = 0; n + 1 < c.size(); ++n) {
    s += std::conj(c(n + 1)) * c(n) * std::sqrt(double(n + 1));
  }
  return -std::sqrt(2.0) * s.imag() / ell / c.squaredNorm();
}

std::vector<ChannelSnapshot> channel_observables(const ChannelDecomposition& dec,
                                                 const ChannelFrame& frame) {
  std::vector<ChannelSnapshot> out;
  const Eigen::VectorXd& x = frame.positions().positions();
  const Eigen::MatrixXd& V = frame.positions().vectors();
  const AgentBasis& ag = frame.agent();
  for (Eigen::Index nu = 0; nu < dec.probabilities.size(); ++nu) {
    if (dec.is_null(static_cast<int>(nu))) continue;
    ChannelSnapshot s;
    s.nu = static_cast<int>(nu);
    s.p = dec.probabilities(nu);
    s.t = dec.time;
    const Eigen::VectorXd w = dec.amplitudes.col(nu).cwiseAbs2();
    s.X = x.dot(w) / s.p;
    const Eigen::VectorXcd c = V * dec.amplitudes.col(nu);
    s.P = momentum_mean(c, ag.ell());
    s.v = s.P / ag.mass();
    s.E = frame.energy(s.nu, s.X);
    out.push_back(s);
  }
  return out;
}

double x_qc(std::span<const ChannelSnapshot> snapshots) {
  double acc = 0.0;
  for (const auto& s : snapshots) {
    if (s.p >= ChannelDecomposition::null_threshold) acc += s.p * s.X;
  }
  return acc;
}

}  // namespace qwork
