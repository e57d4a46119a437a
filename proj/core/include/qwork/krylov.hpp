#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qwork {

class PropagationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using LinearMap = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

struct KrylovOptions {
  int max_dim = 20;
  // Absolute a posteriori error bound per substep.
  double tol = 1e-12;
  int max_halvings = 40;
};

struct KrylovStats {
  std::size_t matvecs = 0;
  std::size_t substeps = 0;
  std::size_t halvings = 0;
};

// Lanczos approximation of exp(-i H t) psi for Hermitian H.
class KrylovPropagator {
 public:
  explicit KrylovPropagator(KrylovOptions opts = {});

  // Advances psi by exp(-i H dt); substeps never exceed max_step in magnitude.
  void advance(const LinearMap& H, Eigen::VectorXcd& psi, double dt, double max_step);

  const KrylovStats& stats() const { return stats_; }
  const KrylovOptions& options() const { return opts_; }

 private:
  // Builds the Krylov space lazily and returns the step actually taken.
  double substep(const LinearMap& H, Eigen::VectorXcd& psi, double h);

  KrylovOptions opts_;
  KrylovStats stats_;
  double h_next_ = 0.0;
  std::vector<Eigen::VectorXcd> V_;
  Eigen::VectorXcd w_;
};

// exp(-i T h) e_1 for a real symmetric tridiagonal T.
Eigen::VectorXcd tridiagonal_expm_e1(const Eigen::VectorXd& diag,
                                     const Eigen::VectorXd& offdiag, double h);

// Lowest and highest Ritz values after at most `steps` Lanczos iterations
// from a fixed deterministic start vector.
std::pair<double, double> lanczos_extremes(const LinearMap& H, std::size_t dim,
                                           int steps = 80);

}  // namespace qwork
