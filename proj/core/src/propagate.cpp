#include "qwork/propagate.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace qwork {

namespace {

double domain_slack(double T) { return 1e-12 * std::max(1.0, std::abs(T)); }

int steps_for(double interval, double dt) {
  return std::max(1, static_cast<int>(std::ceil(interval / dt - 1e-9)));
}

}  // namespace

double classical_drive(double t, double X0, double omega) {
  const double T = std::numbers::pi / omega;
  if (t < -domain_slack(T) || t > T + domain_slack(T)) {
    throw DriveDomainError("classical_drive: t outside [0, pi/omega]");
  }
  return -X0 * std::cos(omega * t);
}

double classical_velocity(double t, double X0, double omega) {
  const double T = std::numbers::pi / omega;
  if (t < -domain_slack(T) || t > T + domain_slack(T)) {
    throw DriveDomainError("classical_velocity: t outside [0, pi/omega]");
  }
  return X0 * omega * std::sin(omega * t);
}

DriveProtocol DriveProtocol::classical_cosine(double X0, double omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("DriveProtocol: omega must be positive");
  DriveProtocol d;
  d.kind_ = Kind::classical_cosine;
  d.X0_ = X0;
  d.omega_ = omega;
  return d;
}

DriveProtocol DriveProtocol::recorded(std::vector<double> times, std::vector<double> values) {
  if (times.size() != values.size() || times.size() < 2) {
    throw std::invalid_argument("DriveProtocol: recorded table needs >= 2 matching samples");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw std::invalid_argument("DriveProtocol: recorded times must be strictly increasing");
    }
  }
  DriveProtocol d;
  d.kind_ = Kind::recorded_trajectory;
  d.times_ = std::move(times);
  d.values_ = std::move(values);
  d.X0_ = -d.values_.front();
  return d;
}

double DriveProtocol::t_begin() const {
  return kind_ == Kind::classical_cosine ? 0.0 : times_.front();
}

double DriveProtocol::t_end() const {
  return kind_ == Kind::classical_cosine ? std::numbers::pi / omega_ : times_.back();
}

double DriveProtocol::position(double t) const {
  if (kind_ == Kind::classical_cosine) return classical_drive(t, X0_, omega_);
  const double slack = domain_slack(t_end() - t_begin());
  if (t < times_.front() - slack || t > times_.back() + slack) {
    throw DriveDomainError("DriveProtocol: t outside the recorded table");
  }
  t = std::clamp(t, times_.front(), times_.back());
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.end()) return values_.back();
  const auto i = static_cast<std::size_t>(it - times_.begin());
  const double t0 = times_[i - 1], t1 = times_[i];
  const double w = (t - t0) / (t1 - t0);
  return (1.0 - w) * values_[i - 1] + w * values_[i];
}

CompositeState Trajectory::composite(std::size_t i) const {
  return CompositeState(sys_dim, agent_dim, states.at(i), times.at(i));
}

double top_level_population(const Eigen::VectorXcd& psi, std::size_t sys_dim,
                            std::size_t agent_dim, int levels) {
  const auto A = static_cast<Eigen::Index>(agent_dim);
  const auto k = std::min<Eigen::Index>(levels, A);
  Eigen::Map<const Eigen::MatrixXcd> P(psi.data(), A, static_cast<Eigen::Index>(sys_dim));
  return P.bottomRows(k).cwiseAbs2().sum();
}

Trajectory evolve_autonomous(const CompositeHamiltonian& H, const CompositeState& psi0,
                             const AutonomousOptions& opts) {
  if (psi0.sys_dim() != H.sys_dim() || psi0.agent_dim() != H.agent_dim()) {
    throw std::invalid_argument("evolve_autonomous: state/Hamiltonian dimension mismatch");
  }
  if (opts.checkpoints < 1) throw std::invalid_argument("evolve_autonomous: checkpoints >= 1");
  if (!(opts.dt > 0.0)) throw std::invalid_argument("evolve_autonomous: dt must be positive");

  Trajectory tr;
  tr.sys_dim = H.sys_dim();
  tr.agent_dim = H.agent_dim();
  KrylovPropagator prop(opts.krylov);
  LinearMap op = [&H](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) { H.apply(in, out); };

  Eigen::VectorXcd psi = psi0.amplitudes();
  const double t0 = psi0.time();
  const double interval = opts.t_final / opts.checkpoints;

  auto record = [&](double t) {
    const double leak = top_level_population(psi, tr.sys_dim, tr.agent_dim, opts.leakage_levels);
    tr.max_leakage = std::max(tr.max_leakage, leak);
    tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(psi.norm() - 1.0));
    tr.times.push_back(t);
    tr.states.push_back(psi);
    if (leak > opts.leakage_tol) {
      tr.stats = prop.stats();
      throw TruncationError("evolve_autonomous: top-level oscillator population " +
                            std::to_string(leak) + " exceeds tolerance at t=" +
                            std::to_string(t));
    }
  };

  record(t0);
  for (int c = 1; c <= opts.checkpoints; ++c) {
    prop.advance(op, psi, interval, opts.dt);
    record(t0 + c * interval);
  }
  tr.stats = prop.stats();
  return tr;
}

Trajectory evolve_driven(const SystemModel& model, const DriveProtocol& drive,
                         const Eigen::VectorXcd& psi0, const DrivenOptions& opts) {
  if (static_cast<std::size_t>(psi0.size()) != model.dim()) {
    throw std::invalid_argument("evolve_driven: state dimension mismatch");
  }
  if (opts.checkpoints < 1) throw std::invalid_argument("evolve_driven: checkpoints >= 1");
  if (!(opts.dt > 0.0)) throw std::invalid_argument("evolve_driven: dt must be positive");
  const double t0 = drive.t_begin();
  const double slack = domain_slack(opts.t_final);
  if (opts.t_final < 0.0 || t0 + opts.t_final > drive.t_end() + slack) {
    throw DriveDomainError("evolve_driven: drive does not cover [0, t_final]");
  }

  Trajectory tr;
  tr.sys_dim = model.dim();
  tr.agent_dim = 1;
  const double interval = opts.t_final / opts.checkpoints;
  const int nsub = steps_for(interval, opts.dt);
  const double h = interval / nsub;

  Eigen::VectorXcd psi = psi0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  Eigen::VectorXcd tmp;
  auto record = [&](double t) {
    tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(psi.norm() - 1.0));
    tr.times.push_back(t - t0);
    tr.states.push_back(psi);
    tr.drive.push_back(drive.position(t));
  };

  record(t0);
  for (int c = 0; c < opts.checkpoints; ++c) {
    const double tc = t0 + c * interval;
    for (int j = 0; j < nsub; ++j) {
      const double tm = tc + (j + 0.5) * h;
      es.compute(model.hamiltonian(drive.position(tm)));
      const Eigen::MatrixXd& Q = es.eigenvectors();
      tmp = Q.transpose() * psi;
      for (Eigen::Index i = 0; i < tmp.size(); ++i) {
        tmp(i) *= std::polar(1.0, -es.eigenvalues()(i) * h);
      }
      psi = Q * tmp;
    }
    record(t0 + (c + 1) * interval);
  }
  return tr;
}

Trajectory evolve_driven(const SystemModel& model, const DriveProtocol& drive, int nu0,
                         const DrivenOptions& opts) {
  const AdiabaticLevels lv = adiabatic_levels(model, drive.position(drive.t_begin()));
  if (nu0 < 0 || nu0 >= lv.energies.size()) {
    throw std::out_of_range("evolve_driven: nu0 outside the spectrum");
  }
  Eigen::VectorXcd psi0 = lv.vectors.col(nu0).cast<cplx>();
  return evolve_driven(model, drive, psi0, opts);
}

}  // namespace qwork
