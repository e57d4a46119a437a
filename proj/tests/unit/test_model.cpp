#include "oracles.hpp"

#include <gtest/gtest.h>

#include "qwork/model.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace qwork;

namespace {

// H_total assembled from dense Kronecker products with tanh(X_hat) from expm.
Eigen::MatrixXd dense_total(const SystemModel& m, const AgentBasis& a) {
  const ModelParams& p = m.params();
  const int n_max = a.n_max();
  const Eigen::MatrixXd X = oracle::position(n_max, a.ell());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n_max + 1, n_max + 1);
  const Eigen::MatrixXd Xa = p.Xa * I;
  const Eigen::MatrixXd f1 = 0.5 * p.Xc * oracle::tanh_expm((X - Xa) / p.Xc);
  const Eigen::MatrixXd f2 = -0.5 * p.Xc * oracle::tanh_expm((X + Xa) / p.Xc);
  Eigen::MatrixXd N = Eigen::MatrixXd::Zero(n_max + 1, n_max + 1);
  for (int n = 0; n <= n_max; ++n) N(n, n) = a.omega() * n;
  const Eigen::MatrixXd Is = Eigen::MatrixXd::Identity(m.dim(), m.dim());
  Eigen::MatrixXd H = Eigen::kroneckerProduct(m.static_part(), I);
  H += Eigen::kroneckerProduct(Is, N);
  H += Eigen::kroneckerProduct(Eigen::MatrixXd(m.first_occupation().asDiagonal()), f1);
  H += Eigen::kroneckerProduct(Eigen::MatrixXd(m.last_occupation().asDiagonal()), f2);
  return H;
}

Eigen::MatrixXd matrix_free_dense(const CompositeHamiltonian& H) {
  const auto d = static_cast<Eigen::Index>(H.dim());
  Eigen::MatrixXd M(d, d);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(d), out;
  for (Eigen::Index j = 0; j < d; ++j) {
    e.setZero();
    e(j) = 1.0;
    H.apply(e, out);
    M.col(j) = out.real();
    EXPECT_LT(out.imag().norm(), 1e-15);
  }
  return M;
}

}  // namespace

TEST(ModelParams, DefaultsAndValidation) {
  EXPECT_EQ(ModelParams::make(2, 5, 0.6, 1, 1).Xa, 0.0);
  EXPECT_DOUBLE_EQ(ModelParams::make(3, 4, 0.3, 1, 2).Xa, 0.5);
  EXPECT_DOUBLE_EQ(ModelParams::from_u(2, 5, 3.0).U, 0.6);
  EXPECT_DOUBLE_EQ(ModelParams::from_u(3, 4, 1.2).U, 0.3);
  EXPECT_THROW(ModelParams::make(2, 1, 0, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(ModelParams::make(2, 1, 0, 1, -1), std::invalid_argument);
  EXPECT_THROW(ModelParams::make(2, 1, 0, 1, 1, 0.3), std::invalid_argument);
}

TEST(SystemHamiltonian, SymmetricDimerGapEqualsHopping) {
  for (double K : {0.5, 1.0, 2.0}) {
    const SystemModel m(ModelParams::make(2, 1, 0.7, K, 1.0));
    const AdiabaticLevels lv = adiabatic_levels(m, 0.0);
    EXPECT_NEAR(lv.energies(1) - lv.energies(0), K, 1e-14);
  }
}

TEST(SystemHamiltonian, SaturatedDimerGap) {
  const double K = 1.0, Xc = 1.7;
  const SystemModel m(ModelParams::make(2, 1, 0.0, K, Xc));
  for (double X : {5.0, 20.0, 60.0}) {
    // 2x2 closed form with bias difference b1 - b2.
    const double db = m.params().bias_first(X) - m.params().bias_last(X);
    const AdiabaticLevels lv = adiabatic_levels(m, X);
    EXPECT_NEAR(lv.energies(1) - lv.energies(0), std::sqrt(db * db + K * K), 1e-13);
  }
  const AdiabaticLevels far = adiabatic_levels(m, 60.0);
  EXPECT_NEAR(far.energies(1) - far.energies(0), std::sqrt(Xc * Xc + K * K), 1e-12);
}

TEST(SystemHamiltonian, InteractionDiagonal) {
  const SystemModel m(ModelParams::make(2, 5, 0.6, 1.0, 1.0));
  const std::vector<int> s{5, 0};
  const auto i = *m.basis().index_of(s);
  EXPECT_NEAR(m.static_part()(i, i), 0.5 * 0.6 * 25.0, 1e-15);
  const Eigen::MatrixXd H = m.hamiltonian(0.0);
  EXPECT_LT((H - H.transpose()).norm(), 1e-15);
}

TEST(SystemHamiltonian, InteractionSiteSelection) {
  ModelParams p = ModelParams::make(3, 4, 0.3, 1.0, 1.0);
  const std::vector<int> s{1, 2, 1};
  const SystemModel all(p);
  p.edge_interaction_only = true;
  const SystemModel edge(p);
  const auto i = *all.basis().index_of(s);
  EXPECT_NEAR(all.static_part()(i, i), 0.15 * 6.0, 1e-15);
  EXPECT_NEAR(edge.static_part()(i, i), 0.15 * 2.0, 1e-15);
}

TEST(SystemHamiltonian, SaturationTail) {
  for (auto p : {ModelParams::from_u(2, 5, 3.0), ModelParams::from_u(3, 4, 1.2)}) {
    const SystemModel m(p);
    const double X = 5 * p.Xc + p.Xa;
    EXPECT_LT((m.hamiltonian(X) - m.saturated_hamiltonian(+1)).norm(), 1e-3 * p.Xc);
    EXPECT_LT((m.hamiltonian(-X) - m.saturated_hamiltonian(-1)).norm(), 1e-3 * p.Xc);
  }
}

TEST(AdiabaticLevels, TraceIdentityAndOrthonormality) {
  const SystemModel m(ModelParams::from_u(3, 4, 1.2));
  for (double X : {-3.0, -0.4, 0.0, 0.2, 2.5}) {
    const AdiabaticLevels lv = adiabatic_levels(m, X);
    EXPECT_NEAR(lv.energies.sum(), m.hamiltonian(X).trace(), 1e-12);
    const auto n = lv.vectors.cols();
    EXPECT_LT((lv.vectors.transpose() * lv.vectors - Eigen::MatrixXd::Identity(n, n)).norm(), 1e-10);
    for (Eigen::Index j = 1; j < n; ++j) EXPECT_LE(lv.energies(j - 1), lv.energies(j));
    for (Eigen::Index j = 0; j < n; ++j) {
      Eigen::Index imax;
      lv.vectors.col(j).cwiseAbs().maxCoeff(&imax);
      EXPECT_GT(lv.vectors(imax, j), 0.0);
    }
  }
}

TEST(AdiabaticLevels, DimerSpectrumMatchesGeneralEigensolverAcrossGrid) {
  const SystemModel m(ModelParams::from_u(2, 5, 3.0));
  for (int i = 0; i <= 60; ++i) {
    const double X = -6.0 + 0.2 * i;
    Eigen::EigenSolver<Eigen::MatrixXd> ge(m.hamiltonian(X));
    const Eigen::VectorXd ref = oracle::sorted(ge.eigenvalues().real());
    const AdiabaticLevels lv = adiabatic_levels(m, X);
    EXPECT_LT((lv.energies - ref).cwiseAbs().maxCoeff(), 1e-11) << X;
  }
}

TEST(AdiabaticLevels, AvoidedCrossingStructureOfInteractingDimer) {
  // Minimum gaps along X are nonzero and smaller than the saturated gaps.
  const SystemModel m(ModelParams::from_u(2, 5, 3.0));
  const AdiabaticLevels far = adiabatic_levels(m, -6.0);
  for (int nu = 0; nu + 1 < 6; ++nu) {
    double gmin = 1e9;
    for (int i = 0; i <= 1200; ++i) {
      const AdiabaticLevels lv = adiabatic_levels(m, -6.0 + 0.01 * i);
      gmin = std::min(gmin, lv.energies(nu + 1) - lv.energies(nu));
    }
    EXPECT_GT(gmin, 1e-4);
    EXPECT_LE(gmin, far.energies(nu + 1) - far.energies(nu) + 1e-12);
  }
}

TEST(AdiabaticLevels, ContinuationKeepsConsecutiveOverlapsHigh) {
  const SystemModel m(ModelParams::from_u(3, 4, 1.2));
  AdiabaticLevels prev = adiabatic_levels(m, -3.0);
  for (int i = 1; i <= 600; ++i) {
    const AdiabaticLevels next = continue_levels(m, prev, -3.0 + 0.01 * i);
    ASSERT_FALSE(next.ambiguous);
    for (int nu = 0; nu < 15; ++nu) {
      const double ov = prev.vector_of(nu).dot(next.vector_of(nu));
      EXPECT_GT(ov, 0.99) << "X=" << next.X << " nu=" << nu;
    }
    prev = next;
  }
}

TEST(AgentHamiltonian, Eigenvalues) {
  const AgentBasis a(10, 0.02, 1.0);
  const Eigen::VectorXd d = agent_hamiltonian(a).diagonal();
  EXPECT_EQ(d(0), 0.0);
  EXPECT_NEAR(d(3), 0.06, 1e-16);
  EXPECT_NEAR(d.sum(), 0.02 * 10 * 11 / 2.0, 1e-14);
}

TEST(PositionBasis, MatrixFunctionAgreesWithExpmRoute) {
  const AgentBasis a(14, 0.3, 0.6);
  const AgentPositionBasis pb(a);
  const Eigen::MatrixXd X = oracle::position(14, 0.6);
  const Eigen::MatrixXd viaEig = pb.function([](double x) { return std::tanh((x - 0.25) / 0.8); });
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(15, 15);
  const Eigen::MatrixXd viaExpm = oracle::tanh_expm((X - 0.25 * I) / 0.8);
  EXPECT_LT((viaEig - viaExpm).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((pb.function([](double x) { return x; }) - X).norm(), 1e-12);
}

TEST(CompositeHamiltonian, MatchesDenseKroneckerOracle) {
  const SystemModel m(ModelParams::make(2, 1, 0.4, 1.0, 1.0));
  const AgentBasis a(30, 0.25, 0.5);
  const CompositeHamiltonian H(m, a);
  const Eigen::MatrixXd ref = dense_total(m, a);
  const Eigen::MatrixXd asm_ = Eigen::MatrixXd(H.assemble());
  const Eigen::MatrixXd mf = matrix_free_dense(H);
  EXPECT_LT((asm_ - asm_.transpose()).norm(), 1e-12);
  EXPECT_LT((mf - mf.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((asm_ - ref).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((mf - ref).cwiseAbs().maxCoeff(), 1e-9);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e1(asm_), e2(ref);
  EXPECT_LT((e1.eigenvalues() - e2.eigenvalues()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(CompositeHamiltonian, TrimerMatrixFreeMatchesAssembly) {
  const SystemModel m(ModelParams::from_u(3, 2, 1.2));
  const AgentBasis a(12, 0.1, 0.3);
  const CompositeHamiltonian H(m, a);
  EXPECT_LT((matrix_free_dense(H) - Eigen::MatrixXd(H.assemble())).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((Eigen::MatrixXd(H.assemble()) - dense_total(m, a)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(CompositeHamiltonian, DecoupledSpectrumIsTensorSum) {
  const SystemModel m(ModelParams::make(2, 3, 0.0, 1.3, 1.0), false);
  const AgentBasis a(8, 0.37, 0.5);
  const CompositeHamiltonian H(m, a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(H.assemble()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ss(m.static_part());
  Eigen::VectorXd sums(m.dim() * a.dim());
  Eigen::Index k = 0;
  for (Eigen::Index s = 0; s < ss.eigenvalues().size(); ++s)
    for (int n = 0; n <= 8; ++n) sums(k++) = ss.eigenvalues()(s) + 0.37 * n;
  EXPECT_LT((es.eigenvalues() - oracle::sorted(sums)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CompositeHamiltonian, EnergyPartsAddUp) {
  const SystemModel m(ModelParams::from_u(2, 2, 3.0));
  const AgentBasis a(20, 0.2, 0.4);
  const CompositeHamiltonian H(m, a);
  const Eigen::VectorXcd psi = oracle::random_state(H.dim(), 7);
  const Eigen::MatrixXd D = Eigen::MatrixXd(H.assemble());
  const double ref = psi.dot(D.cast<cplx>() * psi).real();
  EXPECT_NEAR(H.energy(psi), ref, 1e-12);
  EXPECT_NEAR(H.system_energy(psi) + H.agent_energy(psi), ref, 1e-12);
  const auto [lo, hi] = H.spectral_bounds();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
  EXPECT_NEAR(lo, es.eigenvalues()(0), 1e-6);
  EXPECT_NEAR(hi, es.eigenvalues()(D.rows() - 1), 1e-6);
}
