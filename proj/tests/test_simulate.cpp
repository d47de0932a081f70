//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pcmforge/errors.hpp"
#include "pcmforge/scenario.hpp"
#include "pcmforge/simulate.hpp"

using namespace pcmforge;
using namespace pcmforge::simulate;

namespace {
scenario::Scenario flat_scenario(double G, double T_inf, double dt = 60.0,
                                 double duration = 3600.0) {
  auto s = scenario::default_case_study();
  s.profile = scenario::synth_profile({duration, dt, G, G, 0, 0, T_inf});
  return s;
}

/// Random admissible controls: Q_hx is zero whenever v2 = 1.
ControlSequence random_controls(std::mt19937_64 &rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ControlSequence c;
  for (std::size_t k = 0; k < n; ++k) {
    const double v2 = u(rng) < 0.1 ? 1.0 : 0.95 * u(rng);
    c.v1.push_back(u(rng));
    c.v2.push_back(v2);
    c.Q_hx.push_back(v2 == 1.0 ? 0.0 : 100.0 * u(rng));
  }
  return c;
}
} // namespace

TEST(Step, EquilibriumLeavesDeviceEnergyUnchanged) {
  const auto s = scenario::default_case_study();
  const State x{160300.0, 2.5e5};
  const auto next = step(s, {5e5, 35.0}, x, {0.0, 0.0, 1.0}, {0.0, 35.0});
  EXPECT_NEAR(next.E_d, x.E_d, 1e-6);
  EXPECT_NEAR(next.E_pcm, x.E_pcm, 1e-6);
}

TEST(Step, HotDeviceChargesPcm) {
  const auto s = scenario::default_case_study();
  const State x{4580.0 * 50.0, 2.5e5};
  const auto next = step(s, {5e5, 30.0}, x, {0.0, 0.0, 1.0}, {0.0, 50.0});
  EXPECT_NEAR(next.E_pcm - x.E_pcm, 60.0 * 213.27, 1.0);
  EXPECT_NEAR(next.E_pcm - x.E_pcm, 12796.0, 1.0);
}

TEST(Step, IrradianceHeatsDevice) {
  const auto s = scenario::default_case_study();
  const State x{160300.0, 2.5e5};
  const auto next = step(s, {5e5, 35.0}, x, {0.0, 0.0, 1.0}, {1000.0, 25.0});
  EXPECT_NEAR(next.E_d - x.E_d, 60.0 * 340.88, 1e-6);
  EXPECT_NEAR(next.E_pcm, x.E_pcm, 1e-6);
}

TEST(Step, InfeasibleHeatRejectionPropagates) {
  const auto s = scenario::default_case_study();
  EXPECT_THROW(step(s, {5e5, 35.0}, {160300.0, 2.5e5}, {10.0, 0.3, 1.0},
                    {900.0, 30.0}),
               InfeasibleError);
}

TEST(Rollout, EquilibriumIsConstant) {
  auto s = flat_scenario(0.0, 35.0);
  const auto traj =
      rollout(s, {5e5, 35.0}, ControlSequence::constant(60, 0.0, 0.0, 0.0));
  ASSERT_EQ(traj.size(), 61u);
  for (const auto &r : traj.knots) {
    EXPECT_EQ(r.E_d, 160300.0);
    EXPECT_EQ(r.E_pcm, 2.5e5);
    EXPECT_EQ(r.s_d, 0.0);
    EXPECT_EQ(r.s_pcm, 0.0);
  }
  EXPECT_EQ(traj.horizon(), 3600.0);
}

TEST(Rollout, PassiveLowCapacityMeltsThrough) {
  const auto s = scenario::default_case_study();
  const auto traj = rollout(s, {5e5, 44.3}, policy_controls(s));
  double max_slack = 0.0;
  for (const auto &r : traj.knots)
    max_slack = std::max(max_slack, r.s_pcm);
  EXPECT_GT(max_slack, 0.0);
}

TEST(Rollout, CoolantConservationAtEveryKnot) {
  const auto s = scenario::default_case_study();
  std::mt19937_64 rng(11);
  const auto traj = rollout(s, {1.2e6, 38.0}, random_controls(rng, 60));
  for (const auto &r : traj.knots) {
    EXPECT_LE(std::abs(r.P_d - r.P_pcm - r.Q_hx),
              1e-9 * std::max(1.0, std::abs(r.P_d)));
  }
}

TEST(Rollout, DiscreteEnergyConservation) {
  const auto s = scenario::default_case_study();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> C(5e5, 6e6), Tm(20.0, 50.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto controls = random_controls(rng, 60);
    const plant::PcmDesign d{C(rng), Tm(rng)};
    const auto traj = rollout(s, d, controls);
    double net = 0.0;
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
      const auto &a = traj.knots[k];
      const auto &b = traj.knots[k + 1];
      const double step_change = (b.E_d + b.E_pcm) - (a.E_d + a.E_pcm);
      const double step_net = traj.dt * (a.Q_in - a.Q_out - a.Q_hx);
      ASSERT_NEAR(step_change, step_net,
                  1e-10 * (std::abs(a.E_d) + std::abs(a.E_pcm)));
      net += step_net;
    }
    const auto &first = traj.knots.front();
    const auto &last = traj.knots.back();
    const double change = (last.E_d + last.E_pcm) - (first.E_d + first.E_pcm);
    ASSERT_LE(std::abs(change - net),
              1e-8 * std::max(std::abs(change), std::abs(net)) + 1e-8)
        << "trial " << trial;
  }
}

TEST(Rollout, SlacksEqualBoundViolation) {
  auto s = scenario::default_case_study();
  s.bounds.E_d_ub = 165000.0;
  s.bounds.E_pcm_ub_frac = 0.6;
  s.bounds.E_pcm_lb_frac = 0.45;
  const plant::PcmDesign d{5e5, 42.0};
  const auto traj = rollout(s, d, ControlSequence::constant(60, 0, 0.3, 0.4));
  bool saw_d = false;
  for (const auto &r : traj.knots) {
    double vd = 0.0;
    if (r.E_d > 165000.0)
      vd = r.E_d - 165000.0;
    else if (r.E_d < 45800.0)
      vd = 45800.0 - r.E_d;
    double vp = 0.0;
    if (r.E_pcm > 0.6 * 5e5)
      vp = r.E_pcm - 0.6 * 5e5;
    else if (r.E_pcm < 0.45 * 5e5)
      vp = 0.45 * 5e5 - r.E_pcm;
    EXPECT_EQ(r.s_d, vd);
    EXPECT_EQ(r.s_pcm, vp);
    saw_d = saw_d || vd > 0.0;
  }
  EXPECT_TRUE(saw_d);
}

TEST(Rollout, StatesAreNotClamped) {
  auto s = scenario::default_case_study();
  s.initial.soc = 0.99;
  const auto traj = rollout(s, {5e5, 20.0}, policy_controls(s));
  EXPECT_GT(traj.knots.back().soc, 1.0);
  const auto clamped =
      rollout(s, {5e5, 20.0}, policy_controls(s), {.clamp_soc = true});
  EXPECT_LE(clamped.knots.back().soc, 1.0);
}

TEST(Rollout, ForwardEulerIsFirstOrder) {
  // The device settles in a few minutes and Euler reproduces the steady
  // state exactly, so the error is measured inside the transient.
  double E[3];
  const double dts[3] = {10.0, 5.0, 2.5};
  for (int i = 0; i < 3; ++i) {
    const auto s = flat_scenario(900.0, 30.0, dts[i], 300.0);
    const std::size_t n = s.profile.knots() - 1;
    E[i] = rollout(s, {8e5, 30.0}, ControlSequence::constant(n, 0, 0, 1))
               .knots.back()
               .E_d;
  }
  const double ratio = (E[0] - E[1]) / (E[1] - E[2]);
  EXPECT_NEAR(ratio, 2.0, 0.1);
}

TEST(Rollout, RejectsBadControls) {
  const auto s = scenario::default_case_study();
  EXPECT_THROW(rollout(s, {5e5, 30.0}, ControlSequence::constant(59, 0, 0, 1)),
               DomainError);
  EXPECT_THROW(
      rollout(s, {5e5, 30.0}, ControlSequence::constant(60, 0, 1.5, 0.2)),
      DomainError);
  EXPECT_THROW(
      rollout(s, {5e5, 30.0}, ControlSequence::constant(60, 150, 0.5, 0.2)),
      DomainError);
}

TEST(TrajectoryCsv, HeaderAndRows) {
  const auto s = scenario::default_case_study();
  const auto traj = rollout(s, {5e5, 35.0}, policy_controls(s));
  const auto csv = format_trajectory_csv(traj);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "t_s,E_d_J,E_pcm_J,T_d_C,SOC,P_d_W,P_pcm_W,Q_hx_W,Q_in_W,Q_out_W,"
            "s_d_J,s_pcm_J,T_c_j1_C,T_c_d_C,T_c_hx_C,T_c_j2_C,T_c_pcm_C,v1,v2");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 62);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
}
