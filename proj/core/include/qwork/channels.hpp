#pragma once

#include "qwork/hilbert.hpp"
#include "qwork/model.hpp"

#include <memory>
#include <span>
#include <vector>

namespace qwork {

// Adiabatic levels continued across the X_hat eigenvalue grid, labelled by
// energy order at the anchor position.
class ChannelFrame {
 public:
  ChannelFrame(const SystemModel& model, std::shared_ptr<const AgentPositionBasis> positions,
               double anchor_X);

  const SystemModel& model() const { return model_; }
  const AgentPositionBasis& positions() const { return *pos_; }
  const AgentBasis& agent() const { return pos_->basis(); }
  double anchor() const { return anchor_.X; }
  std::size_t channels() const { return model_.dim(); }

  // Column nu is |nu(x_k)>.
  const Eigen::MatrixXd& levels_at(std::size_t k) const { return L_.at(k); }
  double grid_energy(std::size_t k, int nu) const { return E_(k, nu); }
  // E_nu(X) by continuation from the nearest grid point.
  double energy(int nu, double X) const;
  // Number of grid points flagged ambiguous during continuation.
  int ambiguous_points() const { return ambiguous_; }

 private:
  SystemModel model_;
  std::shared_ptr<const AgentPositionBasis> pos_;
  AdiabaticLevels anchor_;
  std::vector<AdiabaticLevels> grid_;
  std::vector<Eigen::MatrixXd> L_;
  Eigen::MatrixXd E_;
  int ambiguous_ = 0;
};

struct ChannelDecomposition {
  double time = 0.0;
  // phi(k, nu) = <nu(x_k)| Psi(x_k)>.
  Eigen::MatrixXcd amplitudes;
  Eigen::VectorXd probabilities;

  static constexpr double null_threshold = 1e-12;
  bool is_null(int nu) const { return probabilities(nu) < null_threshold; }
};

ChannelDecomposition decompose(const CompositeState& state, const ChannelFrame& frame);

// Normalized wavepacket psi^(nu) in the number basis; empty for null channels.
Eigen::VectorXcd channel_wavepacket(const ChannelDecomposition& dec, const ChannelFrame& frame,
                                    int nu);

CompositeState reassemble(const ChannelDecomposition& dec, const ChannelFrame& frame);

struct ChannelSnapshot {
  int nu = 0;
  double p = 0.0;
  double X = 0.0;
  double P = 0.0;
  double v = 0.0;
  double E = 0.0;
  double t = 0.0;
};

// Momentum expectation of an unnormalized number-basis vector, divided by its norm.
double momentum_mean(const Eigen::VectorXcd& c, double ell);

std::vector<ChannelSnapshot> channel_observables(const ChannelDecomposition& dec,
                                                 const ChannelFrame& frame);

// sum_nu p_nu X_nu over channels above the null threshold.
double x_qc(std::span<const ChannelSnapshot> snapshots);

}  // namespace qwork
