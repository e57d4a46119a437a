#pragma once

#include "qwork/hilbert.hpp"

#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace qwork {

struct ModelParams {
  int sites = 2;
  int bosons = 1;
  double U = 0.0;
  double K = 1.0;
  double Xc = 1.0;
  double Xa = 0.0;
  // Restrict the on-site interaction to sites 1 and L.
  bool edge_interaction_only = false;

  // Xa defaults to 0 for the dimer and Xc/4 otherwise.
  static ModelParams make(int sites, int bosons, double U, double K, double Xc,
                          std::optional<double> Xa = std::nullopt);
  // U = u K / N.
  static ModelParams from_u(int sites, int bosons, double u, double K = 1.0,
                            double Xc = 1.0, std::optional<double> Xa = std::nullopt);
  static double default_Xa(int sites, double Xc);

  void validate() const;

  // Bias coefficients multiplying n_1 and n_L.
  double bias_first(double X) const;
  double bias_last(double X) const;
};

class SystemModel {
 public:
  // With coupled = false the bias terms are dropped and H(X) is X-independent.
  explicit SystemModel(ModelParams params, bool coupled = true);

  const ModelParams& params() const { return params_; }
  const SystemBasis& basis() const { return basis_; }
  std::size_t dim() const { return basis_.dim(); }
  bool coupled() const { return coupled_; }

  // Interaction plus hopping, independent of X.
  const Eigen::MatrixXd& static_part() const { return h_static_; }
  const Eigen::VectorXd& first_occupation() const { return n_first_; }
  const Eigen::VectorXd& last_occupation() const { return n_last_; }

  Eigen::MatrixXd hamiltonian(double X) const;
  // X -> sign * infinity limit.
  Eigen::MatrixXd saturated_hamiltonian(int sign) const;

 private:
  ModelParams params_;
  bool coupled_;
  SystemBasis basis_;
  Eigen::MatrixXd h_static_;
  Eigen::VectorXd n_first_;
  Eigen::VectorXd n_last_;
};

// energies ascending; labels[i] is the channel label of the i-th level.
struct AdiabaticLevels {
  double X = 0.0;
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;
  std::vector<int> labels;
  bool ambiguous = false;
  // Smallest assigned overlap against the reference frame (1 when none).
  double min_overlap = 1.0;

  // Position in energy order of the given channel label.
  int index_of_label(int label) const;
  double energy_of(int label) const { return energies(index_of_label(label)); }
  Eigen::VectorXd vector_of(int label) const { return vectors.col(index_of_label(label)); }
};

AdiabaticLevels adiabatic_levels(const SystemModel& model, double X,
                                 const AdiabaticLevels* prev = nullptr);

// Continues prev to X, subdividing the step until every assigned overlap
// exceeds min_overlap.
AdiabaticLevels continue_levels(const SystemModel& model, const AdiabaticLevels& prev,
                                double X, double min_overlap = 0.99);

// Eigendecomposition of the truncated position operator.
class AgentPositionBasis {
 public:
  explicit AgentPositionBasis(const AgentBasis& basis);

  const AgentBasis& basis() const { return basis_; }
  // Ascending eigenvalues x_k.
  const Eigen::VectorXd& positions() const { return x_; }
  // Column k is |x_k> in the number basis, sign fixed by <0|x_k> > 0.
  const Eigen::MatrixXd& vectors() const { return V_; }

  // f(X_hat) = V diag(f(x_k)) V^T.
  template <typename F>
  Eigen::MatrixXd function(F&& f) const {
    Eigen::VectorXd fx = x_.unaryExpr(std::forward<F>(f));
    return V_ * fx.asDiagonal() * V_.transpose();
  }

 private:
  AgentBasis basis_;
  Eigen::VectorXd x_;
  Eigen::MatrixXd V_;
};

Eigen::DiagonalMatrix<double, Eigen::Dynamic> agent_hamiltonian(const AgentBasis& basis);

// H_total = H_sys(X_hat) + omega b^dag b on the composite space.
class CompositeHamiltonian {
 public:
  CompositeHamiltonian(const SystemModel& model, const AgentBasis& agent);
  CompositeHamiltonian(const SystemModel& model,
                       std::shared_ptr<const AgentPositionBasis> positions);

  const SystemModel& model() const { return model_; }
  const AgentBasis& agent() const { return pos_->basis(); }
  const AgentPositionBasis& positions() const { return *pos_; }
  std::shared_ptr<const AgentPositionBasis> shared_positions() const { return pos_; }
  bool coupled() const { return model_.coupled(); }
  std::size_t sys_dim() const { return model_.dim(); }
  std::size_t agent_dim() const { return pos_->basis().dim(); }
  std::size_t dim() const { return sys_dim() * agent_dim(); }

  // out = H in; out must not alias in.
  void apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;
  // System part H_sys(X_hat) only.
  void apply_system(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;

  SparseR assemble() const;

  double energy(const Eigen::VectorXcd& psi) const;
  double system_energy(const Eigen::VectorXcd& psi) const;
  double agent_energy(const Eigen::VectorXcd& psi) const;

  // Extremal eigenvalue estimates from a Lanczos run.
  std::pair<double, double> spectral_bounds(int steps = 80) const;

  // Largest |x_k| available on the grid.
  double max_position() const;

 private:
  void coupling_term(const Eigen::MatrixXd& R, Eigen::MatrixXd& out, bool accumulate) const;

  SystemModel model_;
  std::shared_ptr<const AgentPositionBasis> pos_;
  Eigen::VectorXd f_first_;
  Eigen::VectorXd f_last_;
  Eigen::VectorXd agent_levels_;
};

}  // namespace qwork
