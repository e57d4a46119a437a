#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qwork {

using cplx = std::complex<double>;
using SparseR = Eigen::SparseMatrix<double>;
using SparseC = Eigen::SparseMatrix<cplx>;
using Occupation = std::vector<int>;

class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fixed-N Fock basis of an L-site boson lattice, lexicographically ordered.
class SystemBasis {
 public:
  SystemBasis() = default;

  int sites() const { return sites_; }
  int bosons() const { return bosons_; }
  std::size_t dim() const { return states_.size(); }

  const Occupation& state(std::size_t i) const { return states_.at(i); }
  const std::vector<Occupation>& states() const { return states_; }
  std::optional<std::size_t> index_of(std::span<const int> occ) const;

  friend SystemBasis enumerate_fock(int sites, int bosons);

 private:
  int sites_ = 0;
  int bosons_ = 0;
  std::vector<Occupation> states_;
  std::map<Occupation, std::size_t> index_;
};

SystemBasis enumerate_fock(int sites, int bosons);

// Binomial C(N+L-1, L-1).
std::size_t fock_dimension(int sites, int bosons);

// a_j maps the N-boson sector onto the (N-1)-boson sector; creation is its
// transpose. number[j] and hop(j) act within the N sector.
struct BoseOperators {
  SystemBasis basis;
  SystemBasis lowered;
  std::vector<SparseR> annihilation;
  std::vector<SparseR> creation;
  std::vector<SparseR> number;

  // a^dag_{j+1} a_j (0-based j).
  SparseR hop(int j) const;
};

BoseOperators bose_operators(const SystemBasis& basis);

// Diagonal occupation n_j(s) for every basis state s.
Eigen::VectorXd site_occupation(const SystemBasis& basis, int site);

class AgentBasis {
 public:
  AgentBasis(int n_max, double omega, double ell);

  int n_max() const { return n_max_; }
  std::size_t dim() const { return static_cast<std::size_t>(n_max_) + 1; }
  double omega() const { return omega_; }
  double ell() const { return ell_; }
  double mass() const { return 1.0 / (ell_ * ell_ * omega_); }

 private:
  int n_max_;
  double omega_;
  double ell_;
};

struct OscillatorOperators {
  SparseR b;
  SparseR bdag;
  SparseR number;
  SparseR X;
  SparseC P;
};

OscillatorOperators oscillator_operators(const AgentBasis& basis);

// alpha = (X0/ell + i ell P0)/sqrt(2)
cplx coherent_alpha(const AgentBasis& basis, double X0, double P0);

// Smallest n_max satisfying n_max >= |alpha|^2 + 10 sqrt(|alpha|^2 + 1).
int required_n_max(double alpha_sq);

// Poisson weight beyond n_max, exp(-|a|^2) sum_{n>n_max} |a|^{2n}/n!.
double coherent_tail(double alpha_sq, int n_max);

// Throws TruncationError when the tail beyond n_max exceeds tail_tol.
Eigen::VectorXcd coherent_state(const AgentBasis& basis, double X0, double P0,
                                double tail_tol = 1e-10);

enum class Factor { system, agent };

// Kronecker product with the agent index fastest: (A (x) B)(s*na+n, s'*na+n').
template <typename Scalar>
Eigen::SparseMatrix<Scalar> kron(const Eigen::SparseMatrix<Scalar>& A,
                                 const Eigen::SparseMatrix<Scalar>& B);

// Embeds a factor operator into the composite space.
template <typename Scalar>
Eigen::SparseMatrix<Scalar> tensor_embed(const Eigen::SparseMatrix<Scalar>& op,
                                         Factor which, std::size_t sys_dim,
                                         std::size_t agent_dim);

// Composite amplitude vector; index = s * agent_dim + n.
class CompositeState {
 public:
  static constexpr double norm_tolerance = 1e-10;

  CompositeState(std::size_t sys_dim, std::size_t agent_dim,
                 Eigen::VectorXcd amplitudes, double time = 0.0);

  static CompositeState product(const Eigen::VectorXcd& sys,
                                const Eigen::VectorXcd& agent,
                                double time = 0.0);

  std::size_t sys_dim() const { return sys_dim_; }
  std::size_t agent_dim() const { return agent_dim_; }
  std::size_t index(std::size_t s, std::size_t n) const {
    return s * agent_dim_ + n;
  }
  double time() const { return time_; }
  const Eigen::VectorXcd& amplitudes() const { return amp_; }
  double norm() const { return amp_.norm(); }

  // Column s holds the agent block of system state s.
  Eigen::Map<const Eigen::MatrixXcd> blocks() const {
    return {amp_.data(), static_cast<Eigen::Index>(agent_dim_),
            static_cast<Eigen::Index>(sys_dim_)};
  }

 private:
  std::size_t sys_dim_;
  std::size_t agent_dim_;
  Eigen::VectorXcd amp_;
  double time_;
};

}  // namespace qwork
