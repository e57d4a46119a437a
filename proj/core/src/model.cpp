#include "qwork/model.hpp"

#include "qwork/krylov.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qwork {

double ModelParams::default_Xa(int sites, double Xc) { return sites == 2 ? 0.0 : Xc / 4.0; }

ModelParams ModelParams::make(int sites, int bosons, double U, double K, double Xc,
                              std::optional<double> Xa) {
  ModelParams p;
  p.sites = sites;
  p.bosons = bosons;
  p.U = U;
  p.K = K;
  p.Xc = Xc;
  p.Xa = Xa.value_or(default_Xa(sites, Xc));
  p.validate();
  return p;
}

ModelParams ModelParams::from_u(int sites, int bosons, double u, double K, double Xc,
                                std::optional<double> Xa) {
  if (bosons < 1) throw std::invalid_argument("ModelParams::from_u: needs N >= 1");
  return make(sites, bosons, u * K / bosons, K, Xc, Xa);
}

void ModelParams::validate() const {
  if (sites < 1) throw std::invalid_argument("ModelParams: sites must be >= 1");
  if (bosons < 0) throw std::invalid_argument("ModelParams: bosons must be >= 0");
  if (!(K > 0.0)) throw std::invalid_argument("ModelParams: K must be positive");
  if (!(Xc > 0.0)) throw std::invalid_argument("ModelParams: Xc must be positive");
  if (!std::isfinite(U) || !std::isfinite(Xa)) {
    throw std::invalid_argument("ModelParams: non-finite U or Xa");
  }
  if (sites == 2 && Xa != 0.0) throw std::invalid_argument("ModelParams: dimer requires Xa = 0");
}

double ModelParams::bias_first(double X) const { return 0.5 * Xc * std::tanh((X - Xa) / Xc); }

double ModelParams::bias_last(double X) const { return -0.5 * Xc * std::tanh((X + Xa) / Xc); }

SystemModel::SystemModel(ModelParams params, bool coupled)
    : params_(params), coupled_(coupled) {
  params_.validate();
  basis_ = enumerate_fock(params_.sites, params_.bosons);
  const int L = params_.sites;
  const auto d = static_cast<Eigen::Index>(basis_.dim());
  h_static_ = Eigen::MatrixXd::Zero(d, d);

  for (std::size_t s = 0; s < basis_.dim(); ++s) {
    const Occupation& occ = basis_.state(s);
    double e = 0.0;
    for (int j = 0; j < L; ++j) {
      const bool edge = (j == 0 || j == L - 1);
      if (params_.edge_interaction_only && !edge) continue;
      e += double(occ[j]) * occ[j];
    }
    h_static_(s, s) = 0.5 * params_.U * e;
  }
  if (L > 1 && params_.bosons > 0) {
    const BoseOperators ops = bose_operators(basis_);
    for (int j = 0; j + 1 < L; ++j) {
      Eigen::MatrixXd hop = Eigen::MatrixXd(ops.hop(j));
      h_static_ -= 0.5 * params_.K * (hop + hop.transpose());
    }
  }
  n_first_ = site_occupation(basis_, 0);
  n_last_ = site_occupation(basis_, L - 1);
}

Eigen::MatrixXd SystemModel::hamiltonian(double X) const {
  Eigen::MatrixXd H = h_static_;
  if (!coupled_) return H;
  H.diagonal() += params_.bias_first(X) * n_first_ + params_.bias_last(X) * n_last_;
  return H;
}

Eigen::MatrixXd SystemModel::saturated_hamiltonian(int sign) const {
  const double s = sign >= 0 ? 1.0 : -1.0;
  Eigen::MatrixXd H = h_static_;
  if (!coupled_) return H;
  H.diagonal() += 0.5 * params_.Xc * s * (n_first_ - n_last_);
  return H;
}

int AdiabaticLevels::index_of_label(int label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw std::out_of_range("AdiabaticLevels: unknown label");
  return static_cast<int>(it - labels.begin());
}

AdiabaticLevels adiabatic_levels(const SystemModel& model, double X,
                                 const AdiabaticLevels* prev) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.hamiltonian(X));
  AdiabaticLevels out;
  out.X = X;
  out.energies = es.eigenvalues();
  out.vectors = es.eigenvectors();
  const auto n = static_cast<int>(out.energies.size());
  out.labels.resize(n);
  std::iota(out.labels.begin(), out.labels.end(), 0);

  if (prev == nullptr) {
    for (int j = 0; j < n; ++j) {
      Eigen::Index imax;
      out.vectors.col(j).cwiseAbs().maxCoeff(&imax);
      if (out.vectors(imax, j) < 0) out.vectors.col(j) *= -1.0;
    }
    return out;
  }

  if (prev->vectors.rows() != out.vectors.rows()) {
    throw std::invalid_argument("adiabatic_levels: reference frame dimension mismatch");
  }
  const Eigen::MatrixXd O = prev->vectors.transpose() * out.vectors;
  const Eigen::MatrixXd A = O.cwiseAbs();

  // Greedy maximal-overlap assignment.
  std::vector<int> match_of_new(n, -1);
  std::vector<bool> row_used(n, false), col_used(n, false);
  double min_ov = 1.0;
  for (int step = 0; step < n; ++step) {
    double best = -1.0;
    int bi = -1, bj = -1;
    for (int i = 0; i < n; ++i) {
      if (row_used[i]) continue;
      for (int j = 0; j < n; ++j) {
        if (col_used[j]) continue;
        if (A(i, j) > best) {
          best = A(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    row_used[bi] = col_used[bj] = true;
    match_of_new[bj] = bi;
    min_ov = std::min(min_ov, best);
  }

  bool ambiguous = false;
  for (int j = 0; j + 1 < n; ++j) {
    const double gap = out.energies(j + 1) - out.energies(j);
    const double scale = std::max(1.0, std::abs(out.energies(j)));
    if (gap < 1e-12 * scale) {
      const double oj = A(match_of_new[j], j), ok = A(match_of_new[j + 1], j + 1);
      if (std::min(oj, ok) < 1.0 - 1e-6) ambiguous = true;
    }
  }

  out.min_overlap = min_ov;
  if (ambiguous) {
    out.ambiguous = true;
    for (int j = 0; j < n; ++j) {
      Eigen::Index imax;
      out.vectors.col(j).cwiseAbs().maxCoeff(&imax);
      if (out.vectors(imax, j) < 0) out.vectors.col(j) *= -1.0;
    }
    return out;
  }
  for (int j = 0; j < n; ++j) {
    const int i = match_of_new[j];
    out.labels[j] = prev->labels[i];
    if (O(i, j) < 0) out.vectors.col(j) *= -1.0;
  }
  return out;
}

AdiabaticLevels continue_levels(const SystemModel& model, const AdiabaticLevels& prev,
                                double X, double min_overlap) {
  AdiabaticLevels next = adiabatic_levels(model, X, &prev);
  if (next.ambiguous || next.min_overlap >= min_overlap) return next;
  if (std::abs(X - prev.X) < 1e-9) return next;
  const AdiabaticLevels mid = continue_levels(model, prev, 0.5 * (prev.X + X), min_overlap);
  if (mid.ambiguous) return adiabatic_levels(model, X, &mid);
  return continue_levels(model, mid, X, min_overlap);
}

AgentPositionBasis::AgentPositionBasis(const AgentBasis& basis) : basis_(basis) {
  const auto d = static_cast<Eigen::Index>(basis.dim());
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd sub(d - 1);
  const double c = basis.ell() / std::sqrt(2.0);
  for (Eigen::Index n = 0; n + 1 < d; ++n) sub(n) = c * std::sqrt(double(n + 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  x_ = es.eigenvalues();
  V_ = es.eigenvectors();
  for (Eigen::Index k = 0; k < d; ++k) {
    if (V_(0, k) < 0) V_.col(k) *= -1.0;
  }
}

Eigen::DiagonalMatrix<double, Eigen::Dynamic> agent_hamiltonian(const AgentBasis& basis) {
  Eigen::VectorXd e(basis.dim());
  for (Eigen::Index n = 0; n < e.size(); ++n) e(n) = basis.omega() * double(n);
  return Eigen::DiagonalMatrix<double, Eigen::Dynamic>(e);
}

CompositeHamiltonian::CompositeHamiltonian(const SystemModel& model, const AgentBasis& agent)
    : CompositeHamiltonian(model, std::make_shared<const AgentPositionBasis>(agent)) {}

CompositeHamiltonian::CompositeHamiltonian(const SystemModel& model,
                                           std::shared_ptr<const AgentPositionBasis> positions)
    : model_(model), pos_(std::move(positions)) {
  const ModelParams& p = model_.params();
  const Eigen::VectorXd& x = pos_->positions();
  f_first_ = x.unaryExpr([&](double v) { return p.bias_first(v); });
  f_last_ = x.unaryExpr([&](double v) { return p.bias_last(v); });
  agent_levels_ = agent_hamiltonian(pos_->basis()).diagonal();
}

void CompositeHamiltonian::coupling_term(const Eigen::MatrixXd& R, Eigen::MatrixXd& out,
                                         bool accumulate) const {
  const Eigen::MatrixXd& V = pos_->vectors();
  const Eigen::Index S = static_cast<Eigen::Index>(sys_dim());
  Eigen::MatrixXd Phi = V.transpose() * R;
  const Eigen::VectorXd& n1 = model_.first_occupation();
  const Eigen::VectorXd& nL = model_.last_occupation();
  for (Eigen::Index s = 0; s < S; ++s) {
    const Eigen::VectorXd g = f_first_ * n1(s) + f_last_ * nL(s);
    Phi.col(s).array() *= g.array();
    Phi.col(s + S).array() *= g.array();
  }
  if (accumulate) {
    out.noalias() += V * Phi;
  } else {
    out.noalias() = V * Phi;
  }
}

void CompositeHamiltonian::apply_system(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
  const auto A = static_cast<Eigen::Index>(agent_dim());
  const auto S = static_cast<Eigen::Index>(sys_dim());
  Eigen::Map<const Eigen::MatrixXcd> Psi(in.data(), A, S);
  Eigen::MatrixXd R(A, 2 * S);
  R.leftCols(S) = Psi.real();
  R.rightCols(S) = Psi.imag();

  Eigen::MatrixXd Out(A, 2 * S);
  const Eigen::MatrixXd& Hs = model_.static_part();
  Out.leftCols(S).noalias() = R.leftCols(S) * Hs;
  Out.rightCols(S).noalias() = R.rightCols(S) * Hs;
  if (coupled()) coupling_term(R, Out, true);

  out.resize(in.size());
  Eigen::Map<Eigen::MatrixXcd> O(out.data(), A, S);
  O.real() = Out.leftCols(S);
  O.imag() = Out.rightCols(S);
}

void CompositeHamiltonian::apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
  apply_system(in, out);
  const auto A = static_cast<Eigen::Index>(agent_dim());
  const auto S = static_cast<Eigen::Index>(sys_dim());
  Eigen::Map<const Eigen::MatrixXcd> Psi(in.data(), A, S);
  Eigen::Map<Eigen::MatrixXcd> O(out.data(), A, S);
  O += agent_levels_.asDiagonal() * Psi;
}

SparseR CompositeHamiltonian::assemble() const {
  const auto A = static_cast<Eigen::Index>(agent_dim());
  const auto S = static_cast<Eigen::Index>(sys_dim());
  const Eigen::MatrixXd& Hs = model_.static_part();
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index s = 0; s < S; ++s) {
    for (Eigen::Index r = 0; r < S; ++r) {
      if (Hs(s, r) == 0.0) continue;
      for (Eigen::Index n = 0; n < A; ++n) t.emplace_back(s * A + n, r * A + n, Hs(s, r));
    }
  }
  for (Eigen::Index s = 0; s < S; ++s) {
    for (Eigen::Index n = 0; n < A; ++n) {
      if (agent_levels_(n) != 0.0) t.emplace_back(s * A + n, s * A + n, agent_levels_(n));
    }
  }
  if (coupled()) {
    const Eigen::MatrixXd& V = pos_->vectors();
    const Eigen::MatrixXd F1 = V * f_first_.asDiagonal() * V.transpose();
    const Eigen::MatrixXd F2 = V * f_last_.asDiagonal() * V.transpose();
    const Eigen::VectorXd& n1 = model_.first_occupation();
    const Eigen::VectorXd& nL = model_.last_occupation();
    for (Eigen::Index s = 0; s < S; ++s) {
      // Symmetrize to remove rounding asymmetry of the dense product.
      const Eigen::MatrixXd G = n1(s) * F1 + nL(s) * F2;
      const Eigen::MatrixXd Gs = 0.5 * (G + G.transpose());
      for (Eigen::Index n = 0; n < A; ++n) {
        for (Eigen::Index m = 0; m < A; ++m) {
          if (Gs(n, m) != 0.0) t.emplace_back(s * A + n, s * A + m, Gs(n, m));
        }
      }
    }
  }
  SparseR H(S * A, S * A);
  H.setFromTriplets(t.begin(), t.end());
  H.makeCompressed();
  return H;
}

double CompositeHamiltonian::energy(const Eigen::VectorXcd& psi) const {
  Eigen::VectorXcd h;
  apply(psi, h);
  return psi.dot(h).real();
}

double CompositeHamiltonian::system_energy(const Eigen::VectorXcd& psi) const {
  Eigen::VectorXcd h;
  apply_system(psi, h);
  return psi.dot(h).real();
}

double CompositeHamiltonian::agent_energy(const Eigen::VectorXcd& psi) const {
  const auto A = static_cast<Eigen::Index>(agent_dim());
  const auto S = static_cast<Eigen::Index>(sys_dim());
  Eigen::Map<const Eigen::MatrixXcd> Psi(psi.data(), A, S);
  return (agent_levels_.transpose() * Psi.cwiseAbs2()).sum();
}

std::pair<double, double> CompositeHamiltonian::spectral_bounds(int steps) const {
  LinearMap op = [this](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) { apply(in, out); };
  return lanczos_extremes(op, dim(), steps);
}

double CompositeHamiltonian::max_position() const {
  return pos_->positions().cwiseAbs().maxCoeff();
}

}  // namespace qwork
