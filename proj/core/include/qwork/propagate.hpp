#pragma once

#include "qwork/hilbert.hpp"
#include "qwork/krylov.hpp"
#include "qwork/model.hpp"

#include <stdexcept>
#include <vector>

namespace qwork {

class DriveDomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// X(t) = -X0 cos(omega t), t in [0, pi/omega].
double classical_drive(double t, double X0, double omega);
double classical_velocity(double t, double X0, double omega);

class DriveProtocol {
 public:
  enum class Kind { classical_cosine, recorded_trajectory };

  static DriveProtocol classical_cosine(double X0, double omega);
  // Linear interpolation of a strictly increasing (t, X) table.
  static DriveProtocol recorded(std::vector<double> times, std::vector<double> values);

  Kind kind() const { return kind_; }
  double X0() const { return X0_; }
  double omega() const { return omega_; }
  double t_begin() const;
  double t_end() const;
  double position(double t) const;
  const std::vector<double>& sample_times() const { return times_; }
  const std::vector<double>& sample_values() const { return values_; }

 private:
  Kind kind_ = Kind::classical_cosine;
  double X0_ = 0.0;
  double omega_ = 1.0;
  std::vector<double> times_;
  std::vector<double> values_;
};

struct Trajectory {
  std::size_t sys_dim = 0;
  // 1 for system-only (driven) trajectories.
  std::size_t agent_dim = 1;
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> states;
  // Drive position at each checkpoint (driven runs only).
  std::vector<double> drive;
  double max_norm_drift = 0.0;
  double max_leakage = 0.0;
  KrylovStats stats;

  CompositeState composite(std::size_t i) const;
};

struct AutonomousOptions {
  double t_final = 0.0;
  // Upper bound on a single Krylov substep.
  double dt = 1.0;
  int checkpoints = 200;
  KrylovOptions krylov;
  double leakage_tol = 1e-6;
  int leakage_levels = 5;
};

// Population in the top `levels` oscillator states.
double top_level_population(const Eigen::VectorXcd& psi, std::size_t sys_dim,
                            std::size_t agent_dim, int levels);

// Negative t_final evolves backwards. Throws TruncationError on leakage.
Trajectory evolve_autonomous(const CompositeHamiltonian& H, const CompositeState& psi0,
                             const AutonomousOptions& opts);

struct DrivenOptions {
  double t_final = 0.0;
  double dt = 0.0025;
  int checkpoints = 200;
};

Trajectory evolve_driven(const SystemModel& model, const DriveProtocol& drive,
                         const Eigen::VectorXcd& psi0, const DrivenOptions& opts);

// Starts from the nu0-th level (energy order) of H(X(0)).
Trajectory evolve_driven(const SystemModel& model, const DriveProtocol& drive, int nu0,
                         const DrivenOptions& opts);

}  // namespace qwork
