#include "oracles.hpp"

#include <gtest/gtest.h>

#include "qwork/workdist.hpp"

#include <cmath>
#include <numbers>

using namespace qwork;

namespace {

struct Small {
  SystemModel model;
  AgentBasis agent;
  CompositeHamiltonian H;
  Eigen::VectorXcd sys;
  Eigen::VectorXcd coh;
  AutonomousOptions opts;

  Small(bool coupled, double X0 = 3.0)
      : model(ModelParams::make(2, 1, 0.0, 1.0, 1.0), coupled),
        agent(120, 0.25, 0.5),
        H(model, agent),
        sys(adiabatic_levels(model, -X0).vectors.col(0).cast<cplx>()),
        coh(coherent_state(agent, -X0, 0.0)) {
    opts.t_final = std::numbers::pi / agent.omega();
    opts.checkpoints = 1;
  }
};

}  // namespace

TEST(WorkSystem, SingleChannelHasSinglePoint) {
  const ChannelSnapshot init{0, 1.0, -3.0, 0.0, 0.0, -0.7, 0.0};
  const std::vector<ChannelSnapshot> fin{{0, 1.0, 3.0, 0.0, 0.0, -0.7, 10.0}};
  const WorkDistribution w = work_system(fin, init);
  ASSERT_EQ(w.support.size(), 1u);
  EXPECT_NEAR(w.support[0], 0.0, 1e-15);
  EXPECT_NEAR(w.mean, 0.0, 1e-15);
  EXPECT_NEAR(w.total(), 1.0, 1e-15);
}

TEST(AgentOccupation, FreeCoherentStateIsPoissonian) {
  const AgentBasis a(150, 0.2, 0.3);
  const SystemModel m(ModelParams::make(2, 1, 0.0, 1.0, 1.0), false);
  const double X0 = 2.0;
  const CompositeState psi = CompositeState::product(
      adiabatic_levels(m, 0.0).vectors.col(0).cast<cplx>(), coherent_state(a, X0, 0.0));
  const Eigen::VectorXd P = agent_occupation(psi);
  const double lam = X0 * X0 / (2 * 0.09);
  EXPECT_NEAR(P.sum(), 1.0, 1e-10);
  for (int n = 0; n < 100; ++n) {
    const double ref = std::exp(-lam + n * std::log(lam) - std::lgamma(n + 1.0));
    EXPECT_NEAR(P(n), ref, 1e-12);
  }
}

TEST(AgentOccupation, ChannelRouteEqualsMarginalWithoutCoupling) {
  const SystemModel m(ModelParams::from_u(2, 2, 3.0), false);
  const AgentBasis a(40, 0.2, 0.5);
  const auto pos = std::make_shared<const AgentPositionBasis>(a);
  const ChannelFrame frame(m, pos, -1.0);
  const CompositeState psi(m.dim(), a.dim(), oracle::random_state(m.dim() * a.dim(), 5));
  const ChannelDecomposition dec = decompose(psi, frame);
  EXPECT_LT((agent_occupation(dec, frame) - agent_occupation(psi)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(WorkAgent, MeanIsAgentEnergyLoss) {
  Eigen::VectorXd Pi(5), Pf(5);
  Pi << 0.1, 0.4, 0.3, 0.2, 0.0;
  Pf << 0.0, 0.1, 0.2, 0.3, 0.4;
  const double w = 0.5;
  const WorkDistribution d = work_agent(Pf, Pi, w);
  const double ni = Pi.dot(Eigen::VectorXd::LinSpaced(5, 0, 4));
  const double nf = Pf.dot(Eigen::VectorXd::LinSpaced(5, 0, 4));
  EXPECT_NEAR(d.mean, -w * (nf - ni), 1e-14);
  EXPECT_NEAR(d.total(), 1.0, 1e-14);
  for (std::size_t i = 1; i < d.support.size(); ++i) {
    EXPECT_NEAR(std::remainder(d.support[i] - d.support[0], w), 0.0, 1e-12);
  }
}

TEST(WorkSpectral, UncoupledIsDeltaAtZero) {
  Small s(false);
  const SpectralFunction sf = work_spectral(s.H, s.sys, s.coh, s.opts);
  EXPECT_NEAR(std::abs(sf.at(0) - 1.0), 0.0, 1e-9);
  double rest = 0.0;
  for (std::size_t i = 0; i < sf.m.size(); ++i)
    if (sf.m[i] != 0) rest += std::abs(sf.values[i]);
  EXPECT_LT(rest, 1e-9);
}

TEST(Fidelity, UncoupledIsFlat) {
  Small s(false);
  const CompositeState psi0 = CompositeState::product(s.sys, s.coh);
  const auto taus = default_tau_grid(s.agent.omega(), 16);
  const FidelitySeries F = fidelity_amplitude(s.H, psi0, taus, s.opts);
  for (const auto& f : F.values) EXPECT_NEAR(std::abs(f - 1.0), 0.0, 1e-9);
}

TEST(Fidelity, FourierTransformReproducesSpectralFunction) {
  Small s(true);
  const CompositeState psi0 = CompositeState::product(s.sys, s.coh);
  const auto taus = default_tau_grid(s.agent.omega());
  const FidelitySeries F = fidelity_amplitude(s.H, psi0, taus, s.opts);
  EXPECT_NEAR(std::abs(F.values[0] - 1.0), 0.0, 1e-10);
  for (const auto& f : F.values) EXPECT_LE(std::abs(f), 1.0 + 1e-10);

  const SpectralFunction viaF = spectral_from_fidelity(F, s.agent.omega());
  const SpectralFunction direct = work_spectral(s.H, s.sys, s.coh, s.opts);
  double err = 0.0;
  for (std::size_t i = 0; i < viaF.m.size(); ++i) {
    err = std::max(err, std::abs(viaF.values[i] - direct.at(viaF.m[i])));
  }
  EXPECT_LT(err, 1e-6);
  const WorkDistribution d = direct.distribution();
  EXPECT_NEAR(d.total(), 1.0, 1e-8);
  for (std::size_t i = 1; i < d.support.size(); ++i) {
    EXPECT_NEAR(std::remainder(d.support[i] - d.support[0], s.agent.omega()), 0.0, 1e-12);
  }
  EXPECT_NEAR(direct.two_point_distribution().total(), 1.0, 1e-8);
}

TEST(Fidelity, GridMustCoverOnePeriod) {
  FidelitySeries F;
  F.taus = {0.0, 1.0, 2.0};
  F.values = {1.0, 1.0, 1.0};
  EXPECT_THROW(spectral_from_fidelity(F, 0.25), std::invalid_argument);
}

TEST(Ancilla, Endpoints) {
  EXPECT_DOUBLE_EQ(ancilla_probability(1.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(ancilla_probability(0.0, 1.234), 0.5);
  EXPECT_NEAR(ancilla_probability(1.0, std::numbers::pi), 0.0, 1e-15);
  EXPECT_THROW(ancilla_probability(1.1, 0.0), std::invalid_argument);
}

TEST(MeanWork, ZeroForStaticAndConservedOtherwise) {
  Small s(true);
  const CompositeState psi0 = CompositeState::product(s.sys, s.coh);
  const MeanWork none = mean_work(s.H, psi0, psi0);
  EXPECT_EQ(none.system_gain, 0.0);
  EXPECT_EQ(none.residual, 0.0);
  const Trajectory tr = evolve_autonomous(s.H, psi0, s.opts);
  const MeanWork w = mean_work(s.H, psi0, tr.composite(1));
  const auto [lo, hi] = s.H.spectral_bounds();
  EXPECT_LT(std::abs(w.residual), 1e-6 * (hi - lo));
  EXPECT_NEAR(w.system_gain, w.agent_loss, 1e-6 * (hi - lo));
}
