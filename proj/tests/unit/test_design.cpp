#include <gtest/gtest.h>

#include "qwork/design.hpp"

#include <cmath>
#include <numbers>

using namespace qwork;

TEST(Design, OscillatorAndPistonFormulationsAgree) {
  for (double w : {0.01, 0.02, 0.1, 0.5})
    for (double ell : {0.05, 0.1, 0.2, 1.0}) {
      const AgentDesign osc = AgentDesign::oscillator(w, ell);
      const AgentDesign pis = AgentDesign::piston(1.0 / (ell * ell * w), ell);
      EXPECT_NEAR(osc.dv_uc(), pis.dv_uc(), 1e-12 * osc.dv_uc());
      EXPECT_NEAR(osc.dv_br(0.5, 0.03), pis.dv_br(0.5, 0.03), 1e-12 * osc.dv_br(0.5, 0.03));
      const DesignGoal g{0.5, 0.03, 0.002, {}, {}};
      const DesignReport a = evaluate_design(osc, g), b = evaluate_design(pis, g);
      EXPECT_NEAR(a.uc.margin, b.uc.margin, 1e-12 * a.uc.margin);
      EXPECT_NEAR(a.br.margin, b.br.margin, 1e-12 * a.br.margin);
      EXPECT_EQ(a.res.pass, b.res.pass);
    }
}

TEST(Design, PhotonNumberFormsAreIdentical) {
  const double v0 = 0.0212, W0 = 0.5;
  for (double w : {0.012, 0.02, 0.032})
    for (double ell : {0.05, 0.1, 0.2}) {
      const AgentDesign d = AgentDesign::oscillator(w, ell);
      const double nph = d.n_ph(v0);
      EXPECT_NEAR(nph, std::pow(d.X0(v0) / ell, 2), 1e-12 * nph);
      EXPECT_NEAR(dv_uc_from_nph(v0, nph), d.dv_uc(), 1e-12 * d.dv_uc());
      EXPECT_NEAR(dv_br_from_nph(W0, v0, w, nph), d.dv_br(W0, v0), 1e-12 * d.dv_br(W0, v0));
      // Product of the two spreads in the piston form, 1/(M l) * W0/(M v0).
      const double M = 1.0 / (ell * ell * w);
      const double lhs = d.dv_uc() * d.dv_br(W0, v0);
      EXPECT_NEAR(lhs, (1.0 / (M * ell)) * (W0 / (M * v0)), 1e-12 * lhs);
      // Border forms: UC, BR and Res thresholds in n_ph.
      const double dv0 = 0.003;
      EXPECT_EQ(d.dv_uc() < dv0, nph > std::pow(v0 / dv0, 2));
      EXPECT_EQ(d.dv_br(W0, v0) < dv0, nph > (v0 / dv0) * (W0 / w));
      EXPECT_EQ(d.dv_uc() < d.dv_br(W0, v0), nph < std::pow(W0 / w, 2));
    }
}

TEST(Design, PassIffMarginBelowOne) {
  const DesignGoal g{1.0, 0.1, 0.01, {}, {}};
  const AgentDesign d = AgentDesign::oscillator(0.02, 0.3);
  const DesignReport r = evaluate_design(d, g);
  EXPECT_EQ(r.uc.pass, r.uc.margin < 1.0);
  EXPECT_EQ(r.br.pass, r.br.margin < 1.0);
  EXPECT_EQ(r.res.pass, r.res.margin < 1.0);
  EXPECT_NEAR(r.uc.margin, 0.006 / 0.01, 1e-12);
  EXPECT_EQ(make_check(0.05).strong, true);
  EXPECT_EQ(make_check(0.5).strong, false);
  EXPECT_EQ(make_check(1.0).pass, false);
  EXPECT_FALSE(r.interference.has_value());
}

TEST(Design, UcBorderHasUnitMargin) {
  const DesignGoal g{0.5, 0.02, 0.004, {}, {}};
  const double w = 0.02;
  const double ell = g.dv0 / w;
  EXPECT_NEAR(evaluate_design(AgentDesign::oscillator(w, ell), g).uc.margin, 1.0, 1e-12);
  const auto dg = design_diagram(g, std::vector<double>{w}, std::vector<double>{}, {}, {});
  EXPECT_NEAR(AgentDesign::oscillator(w, ell).n_ph(g.v0), dg.oscillator[0].nph_uc, 1e-9);
}

TEST(Design, MonotonicityInPhotonNumber) {
  const DesignGoal g{0.5, 0.02, 0.003, {}, {}};
  const double w = 0.02;
  DesignReport prev{};
  bool first = true;
  for (double nph : {1.0, 10.0, 100.0, 400.0, 1000.0, 1e4, 1e5}) {
    const double ell = g.v0 / (w * std::sqrt(nph));
    const DesignReport r = evaluate_design(AgentDesign::oscillator(w, ell), g);
    if (!first) {
      EXPECT_FALSE(prev.uc.pass && !r.uc.pass);
      EXPECT_FALSE(prev.br.pass && !r.br.pass);
      EXPECT_FALSE(!prev.res.pass && r.res.pass);
    }
    prev = r;
    first = false;
  }
}

TEST(Design, BordersTightenWithSmallerResolution) {
  const std::vector<double> w{0.01, 0.02, 0.05};
  const auto loose = design_diagram({0.5, 0.02, 0.004, {}, {}}, w, std::vector<double>{10.0}, {}, {});
  const auto tight = design_diagram({0.5, 0.02, 0.002, {}, {}}, w, std::vector<double>{10.0}, {}, {});
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_GT(tight.oscillator[i].nph_uc, loose.oscillator[i].nph_uc);
    EXPECT_GT(tight.oscillator[i].nph_br, loose.oscillator[i].nph_br);
    EXPECT_EQ(tight.oscillator[i].nph_res, loose.oscillator[i].nph_res);
  }
  EXPECT_GT(tight.piston[0].M_br, loose.piston[0].M_br);
  EXPECT_GT(tight.piston[0].ell_uc, loose.piston[0].ell_uc);
}

TEST(Design, ConstantContoursMatchDirectEvaluation) {
  const DesignGoal g{0.5, 0.02, 0.003, {}, {}};
  const std::vector<double> w{0.01, 0.03};
  const auto dg = design_diagram(g, w, std::vector<double>{}, std::vector<double>{0.004},
                                 std::vector<double>{0.0008});
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double ell_lw = 0.004 / w[i];
    const double ell_l2w = std::sqrt(0.0008 / w[i]);
    EXPECT_NEAR(dg.oscillator[i].nph_const_lw[0], AgentDesign::oscillator(w[i], ell_lw).n_ph(g.v0), 1e-9);
    EXPECT_NEAR(dg.oscillator[i].nph_const_l2w[0], AgentDesign::oscillator(w[i], ell_l2w).n_ph(g.v0), 1e-9);
  }
}

TEST(Interference, ScalingAndLimits) {
  const auto a = interference_resolution(0.03, 1.0, 0.5);
  const auto b = interference_resolution(0.06, 1.0, 0.5);
  EXPECT_NEAR(b.dv0_required, 4 * a.dv0_required, 1e-15);
  EXPECT_NEAR(b.delta_phi, a.delta_phi / 2, 1e-12);
  const auto z = interference_resolution(0.03, 1.0, 0.0);
  EXPECT_EQ(z.delta_phi, 0.0);
  EXPECT_TRUE(std::isinf(z.dv0_required));
  const auto tiny = interference_resolution(0.03, 1.0, 1e-12);
  EXPECT_LT(tiny.delta_phi, 1e-10);
  EXPECT_GT(tiny.dv0_required, 1e8);
}

TEST(LzFit, RecoversSyntheticConstant) {
  for (double q : {2.0, 1.0}) {
    const double c = q == 2.0 ? 3.1e-4 : 0.0147;
    std::vector<LzSample> s;
    for (int i = 0; i < 9; ++i) {
      const double xd = 0.012 + 0.003 * i;
      s.push_back({xd, std::exp(-c * std::pow(xd, -q))});
    }
    const LzFit f = lz_fit(s, q);
    EXPECT_NEAR(f.c, c, 1e-6 * c);
    EXPECT_LT(f.max_abs_residual, 1e-12);
    EXPECT_NEAR(f.predict(f.half_velocity()), 0.5, 1e-12);
  }
}

TEST(LzFit, RejectsDegenerateInput) {
  std::vector<LzSample> two{{0.1, 0.5}, {0.2, 0.6}};
  EXPECT_THROW(lz_fit(two), std::invalid_argument);
  std::vector<LzSample> same{{0.1, 0.5}, {0.1, 0.6}, {0.1, 0.4}};
  EXPECT_THROW(lz_fit(same), std::invalid_argument);
  std::vector<LzSample> bad{{0.1, 0.5}, {0.2, 1.0}, {0.3, 0.4}};
  EXPECT_THROW(lz_fit(bad), std::invalid_argument);
}

TEST(TwoPath, TrivialCasesAndDephasedAverage) {
  EXPECT_NEAR(two_path_probability(0.5, 4 * std::numbers::pi).coherent, 1.0, 1e-15);
  EXPECT_NEAR(two_path_probability(0.5, std::numbers::pi).coherent, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(two_path_probability(0.5, 0.3).dephased, 0.5);
  for (double P : {0.0, 0.13, 0.5, 0.77, 1.0}) {
    const int N = 64;
    double avg = 0.0;
    for (int k = 0; k < N; ++k) avg += two_path_probability(P, 2 * std::numbers::pi * k / N).coherent;
    avg /= N;
    EXPECT_NEAR(avg, two_path_probability(P, 0.0).dephased, 1e-10);
  }
}
