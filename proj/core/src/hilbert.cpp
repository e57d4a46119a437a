#include "qwork/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qwork {

namespace {

void enumerate_rec(int site, int remaining, Occupation& cur,
                   std::vector<Occupation>& out) {
  const int L = static_cast<int>(cur.size());
  if (site == L - 1) {
    cur[site] = remaining;
    out.push_back(cur);
    return;
  }
  for (int n = 0; n <= remaining; ++n) {
    cur[site] = n;
    enumerate_rec(site + 1, remaining - n, cur, out);
  }
}

SparseR from_triplets(Eigen::Index rows, Eigen::Index cols,
                      const std::vector<Eigen::Triplet<double>>& t) {
  SparseR m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace

std::size_t fock_dimension(int sites, int bosons) {
  if (sites < 1 || bosons < 0) {
    throw std::invalid_argument("fock_dimension: need sites >= 1, bosons >= 0");
  }
  // C(N+L-1, L-1) with exact integer steps.
  std::size_t k = static_cast<std::size_t>(sites - 1);
  std::size_t n = static_cast<std::size_t>(bosons) + k;
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

SystemBasis enumerate_fock(int sites, int bosons) {
  if (sites < 1) throw std::invalid_argument("enumerate_fock: sites must be >= 1");
  if (bosons < 0) throw std::invalid_argument("enumerate_fock: bosons must be >= 0");
  SystemBasis b;
  b.sites_ = sites;
  b.bosons_ = bosons;
  Occupation cur(static_cast<std::size_t>(sites), 0);
  enumerate_rec(0, bosons, cur, b.states_);
  for (std::size_t i = 0; i < b.states_.size(); ++i) b.index_.emplace(b.states_[i], i);
  return b;
}

std::optional<std::size_t> SystemBasis::index_of(std::span<const int> occ) const {
  auto it = index_.find(Occupation(occ.begin(), occ.end()));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

BoseOperators bose_operators(const SystemBasis& basis) {
  if (basis.sites() < 1) throw std::invalid_argument("bose_operators: empty basis");
  BoseOperators ops;
  ops.basis = basis;
  const int L = basis.sites();
  const int N = basis.bosons();
  const auto dim = static_cast<Eigen::Index>(basis.dim());
  if (N > 0) ops.lowered = enumerate_fock(L, N - 1);
  const auto dlow = static_cast<Eigen::Index>(ops.lowered.dim());

  for (int j = 0; j < L; ++j) {
    std::vector<Eigen::Triplet<double>> ta, tn;
    for (std::size_t s = 0; s < basis.dim(); ++s) {
      Occupation occ = basis.state(s);
      const int nj = occ[j];
      tn.emplace_back(s, s, nj);
      if (nj == 0) continue;
      occ[j] -= 1;
      auto t = ops.lowered.index_of(occ);
      ta.emplace_back(static_cast<Eigen::Index>(*t), s, std::sqrt(double(nj)));
    }
    SparseR a = from_triplets(dlow, dim, ta);
    SparseR ad = SparseR(a.transpose());
    ops.annihilation.push_back(a);
    ops.creation.push_back(ad);
    ops.number.push_back(from_triplets(dim, dim, tn));
  }
  return ops;
}

SparseR BoseOperators::hop(int j) const {
  if (j < 0 || j + 1 >= static_cast<int>(annihilation.size())) {
    throw std::out_of_range("BoseOperators::hop: site index");
  }
  SparseR h = creation[j + 1] * annihilation[j];
  h.prune(0.0);
  return h;
}

Eigen::VectorXd site_occupation(const SystemBasis& basis, int site) {
  if (site < 0 || site >= basis.sites()) {
    throw std::out_of_range("site_occupation: site index");
  }
  Eigen::VectorXd n(basis.dim());
  for (std::size_t s = 0; s < basis.dim(); ++s) n(s) = basis.state(s)[site];
  return n;
}

AgentBasis::AgentBasis(int n_max, double omega, double ell)
    : n_max_(n_max), omega_(omega), ell_(ell) {
  if (n_max < 1) throw std::invalid_argument("AgentBasis: n_max must be >= 1");
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw std::invalid_argument("AgentBasis: omega must be positive");
  }
  if (!(ell > 0.0) || !std::isfinite(ell)) {
    throw std::invalid_argument("AgentBasis: ell must be positive");
  }
  if (!std::isfinite(mass())) throw std::invalid_argument("AgentBasis: mass not finite");
}

OscillatorOperators oscillator_operators(const AgentBasis& basis) {
  const auto d = static_cast<Eigen::Index>(basis.dim());
  std::vector<Eigen::Triplet<double>> tb, tn;
  for (Eigen::Index n = 1; n < d; ++n) tb.emplace_back(n - 1, n, std::sqrt(double(n)));
  for (Eigen::Index n = 0; n < d; ++n) tn.emplace_back(n, n, double(n));

  OscillatorOperators ops;
  ops.b = from_triplets(d, d, tb);
  ops.bdag = SparseR(ops.b.transpose());
  ops.number = from_triplets(d, d, tn);
  const double ell = basis.ell();
  ops.X = (ell / std::sqrt(2.0)) * (ops.b + ops.bdag);
  SparseR diff = ops.bdag - ops.b;
  ops.P = diff.cast<cplx>() * cplx(0.0, 1.0 / (std::sqrt(2.0) * ell));
  return ops;
}

cplx coherent_alpha(const AgentBasis& basis, double X0, double P0) {
  const double ell = basis.ell();
  return cplx(X0 / ell, ell * P0) / std::sqrt(2.0);
}

int required_n_max(double alpha_sq) {
  return static_cast<int>(std::ceil(alpha_sq + 10.0 * std::sqrt(alpha_sq + 1.0)));
}

double coherent_tail(double alpha_sq, int n_max) {
  if (alpha_sq == 0.0) return 0.0;
  const double la = std::log(alpha_sq);
  double tail = 0.0;
  for (int n = n_max + 1;; ++n) {
    const double lw = -alpha_sq + n * la - std::lgamma(n + 1.0);
    const double w = std::exp(lw);
    tail += w;
    // Terms decrease once n exceeds |alpha|^2.
    if (n > alpha_sq && w < 1e-30 * std::max(tail, 1e-300)) break;
    if (n > n_max + 100000) break;
  }
  return tail;
}

Eigen::VectorXcd coherent_state(const AgentBasis& basis, double X0, double P0,
                                double tail_tol) {
  const cplx alpha = coherent_alpha(basis, X0, P0);
  const double a2 = std::norm(alpha);
  const double tail = coherent_tail(a2, basis.n_max());
  if (tail > tail_tol) {
    throw TruncationError("coherent_state: Poisson tail " + std::to_string(tail) +
                          " beyond n_max=" + std::to_string(basis.n_max()) +
                          " (need n_max >= " + std::to_string(required_n_max(a2)) + ")");
  }
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(basis.dim());
  if (a2 == 0.0) {
    c(0) = 1.0;
    return c;
  }
  const double la = std::log(std::abs(alpha));
  const double ph = std::arg(alpha);
  for (Eigen::Index n = 0; n < c.size(); ++n) {
    const double lm = -0.5 * a2 + n * la - 0.5 * std::lgamma(n + 1.0);
    c(n) = std::polar(std::exp(lm), n * ph);
  }
  c /= c.norm();
  return c;
}

template <typename Scalar>
Eigen::SparseMatrix<Scalar> kron(const Eigen::SparseMatrix<Scalar>& A,
                                 const Eigen::SparseMatrix<Scalar>& B) {
  const Eigen::Index br = B.rows(), bc = B.cols();
  std::vector<Eigen::Triplet<Scalar>> t;
  t.reserve(static_cast<std::size_t>(A.nonZeros() * B.nonZeros()));
  for (int ka = 0; ka < A.outerSize(); ++ka) {
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator ia(A, ka); ia; ++ia) {
      for (int kb = 0; kb < B.outerSize(); ++kb) {
        for (typename Eigen::SparseMatrix<Scalar>::InnerIterator ib(B, kb); ib; ++ib) {
          t.emplace_back(ia.row() * br + ib.row(), ia.col() * bc + ib.col(),
                         ia.value() * ib.value());
        }
      }
    }
  }
  Eigen::SparseMatrix<Scalar> out(A.rows() * br, A.cols() * bc);
  out.setFromTriplets(t.begin(), t.end());
  out.makeCompressed();
  return out;
}

template <typename Scalar>
Eigen::SparseMatrix<Scalar> tensor_embed(const Eigen::SparseMatrix<Scalar>& op,
                                         Factor which, std::size_t sys_dim,
                                         std::size_t agent_dim) {
  const auto expect = static_cast<Eigen::Index>(which == Factor::system ? sys_dim : agent_dim);
  if (op.rows() != expect || op.cols() != expect) {
    throw std::invalid_argument("tensor_embed: operator dimension does not match its factor");
  }
  const auto other = static_cast<Eigen::Index>(which == Factor::system ? agent_dim : sys_dim);
  Eigen::SparseMatrix<Scalar> I(other, other);
  I.setIdentity();
  return which == Factor::system ? kron<Scalar>(op, I) : kron<Scalar>(I, op);
}

template SparseR kron<double>(const SparseR&, const SparseR&);
template SparseC kron<cplx>(const SparseC&, const SparseC&);
template SparseR tensor_embed<double>(const SparseR&, Factor, std::size_t, std::size_t);
template SparseC tensor_embed<cplx>(const SparseC&, Factor, std::size_t, std::size_t);

CompositeState::CompositeState(std::size_t sys_dim, std::size_t agent_dim,
                               Eigen::VectorXcd amplitudes, double time)
    : sys_dim_(sys_dim), agent_dim_(agent_dim), amp_(std::move(amplitudes)), time_(time) {
  if (static_cast<std::size_t>(amp_.size()) != sys_dim * agent_dim) {
    throw std::invalid_argument("CompositeState: amplitude length mismatch");
  }
  if (std::abs(amp_.norm() - 1.0) > norm_tolerance) {
    throw std::invalid_argument("CompositeState: amplitudes not normalized");
  }
}

CompositeState CompositeState::product(const Eigen::VectorXcd& sys,
                                       const Eigen::VectorXcd& agent, double time) {
  const auto S = static_cast<std::size_t>(sys.size());
  const auto A = static_cast<std::size_t>(agent.size());
  Eigen::VectorXcd v(S * A);
  for (std::size_t s = 0; s < S; ++s) {
    v.segment(static_cast<Eigen::Index>(s * A), static_cast<Eigen::Index>(A)) = sys(s) * agent;
  }
  return CompositeState(S, A, std::move(v), time);
}

}  // namespace qwork
