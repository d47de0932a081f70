//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pcmforge/errors.hpp"
#include "pcmforge/objective.hpp"
#include "pcmforge/scenario.hpp"
#include "pcmforge/simulate.hpp"

using namespace pcmforge;
using namespace pcmforge::objective;

namespace {
/// A hand-made trajectory of 61 knots at 60 s with constant records.
simulate::Trajectory constant_trajectory(double Q_hx, double P_d, double s_d,
                                         double s_pcm) {
  simulate::Trajectory t;
  t.dt = 60.0;
  t.design = {5e5, 35.0};
  for (int k = 0; k < 61; ++k) {
    simulate::KnotRecord r;
    r.t = 60.0 * k;
    r.Q_hx = Q_hx;
    r.P_d = P_d;
    r.s_d = s_d;
    r.s_pcm = s_pcm;
    t.knots.push_back(r);
  }
  return t;
}

scenario::Weights unit_weights() {
  scenario::Weights w;
  w.w_nom = 0.0;
  return w;
}

double rel(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}
} // namespace

TEST(DynamicObjectives, ZeroIntegrands) {
  const auto d =
      dynamic_objectives(constant_trajectory(0, 0, 0, 0), unit_weights());
  EXPECT_EQ(d.J_ie, 0.0);
  EXPECT_EQ(d.J_ce, 0.0);
  EXPECT_EQ(d.J_cv_d, 0.0);
  EXPECT_EQ(d.J_cv_pcm, 0.0);
  EXPECT_EQ(d.J_d, 0.0);
}

TEST(DynamicObjectives, ConstantHeatRejection) {
  const auto d =
      dynamic_objectives(constant_trajectory(100, 0, 0, 0), unit_weights());
  EXPECT_DOUBLE_EQ(d.J_ie, 3.6e5);
}

TEST(DynamicObjectives, ConstantSlackAverages) {
  const auto d =
      dynamic_objectives(constant_trajectory(0, 0, 250, 1000), unit_weights());
  EXPECT_DOUBLE_EQ(d.J_cv_pcm, 1000.0);
  EXPECT_DOUBLE_EQ(d.J_cv_d, 250.0);
}

TEST(DynamicObjectives, CoolingEffectivenessSign) {
  const auto d =
      dynamic_objectives(constant_trajectory(0, 50, 0, 0), unit_weights());
  EXPECT_DOUBLE_EQ(d.J_ce, -50.0 * 3600.0);
  EXPECT_LE(d.J_ce, 0.0);
}

TEST(DynamicObjectives, LeftRectangleIgnoresLastKnot) {
  auto t = constant_trajectory(0, 0, 0, 0);
  t.knots.back().Q_hx = 1e6;
  t.knots.back().s_pcm = 1e6;
  t.knots.front().Q_hx = 10.0;
  const auto d = dynamic_objectives(t, unit_weights());
  EXPECT_DOUBLE_EQ(d.J_ie, 600.0);
  EXPECT_EQ(d.J_cv_pcm, 0.0);
}

TEST(DynamicObjectives, WeightedSum) {
  auto w = unit_weights();
  w.w_ie = 2.0;
  w.w_ce = 0.5;
  w.w_cv_d = 3.0;
  w.w_cv_p = 4.0;
  const auto d = dynamic_objectives(constant_trajectory(10, 20, 30, 40), w);
  EXPECT_DOUBLE_EQ(d.J_d, 2.0 * d.J_ie + 0.5 * d.J_ce + 3.0 * d.J_cv_d +
                              4.0 * d.J_cv_pcm);
}

TEST(StaticObjectives, Examples) {
  const auto w = unit_weights();
  const auto a = static_objectives({5e5, 35.0}, w, 0.0, 0.0);
  EXPECT_EQ(a.J_m, 5e5);
  EXPECT_EQ(a.J_s, 5e5);
  const auto b = static_objectives({1.96e6, 35.0}, w, 0.0, 0.0);
  EXPECT_EQ(b.J_s, 1.96e6);
  auto wn = w;
  wn.w_nom = 1.0;
  const auto c = static_objectives({5e5, 35.0}, wn, 0.0, 600.0);
  EXPECT_EQ(c.J_nom, 0.0);
  EXPECT_FALSE(std::signbit(c.J_nom));
  const auto d = static_objectives({5e5, 35.0}, wn, 100.0, 600.0);
  EXPECT_EQ(d.J_nom, -6e4);
  EXPECT_EQ(d.J_s, 5e5 - 6e4);
}

TEST(TotalObjective, PublishedCaseStudyRow) {
  scenario::Weights w = unit_weights();
  w.w_d = 1.0;
  w.w_s = 100.0;
  const double J_d = 9.70e-16 - 5.10e5 + 3.92e4 + 8.04e4;
  EXPECT_NEAR(J_d, -3.904e5, 1e-6);
  const double J_s = 5.00e5;
  const double J_tot = total_objective(J_d, J_s, w);
  EXPECT_NEAR(J_tot, 4.96096e7, 1.0);
  EXPECT_LE(std::abs(J_tot - 4.97e7) / 4.97e7, 0.01);
}

TEST(TotalObjective, DegenerateCases) {
  auto w = unit_weights();
  EXPECT_EQ(total_objective(0.0, 0.0, w), 0.0);
  w.w_d = 0.0;
  w.w_s = 3.0;
  EXPECT_EQ(total_objective(-1e9, 2.0, w), 6.0);
  EXPECT_EQ(total_objective(1e9, 2.0, w), 6.0);
}

TEST(TotalObjective, CompromiseExponent) {
  auto w = unit_weights();
  w.n = 2.0;
  w.w_d = 1.0;
  w.w_s = 2.0;
  EXPECT_DOUBLE_EQ(total_objective(3.0, 4.0, w), 9.0 + 32.0);
  EXPECT_THROW(total_objective(-1.0, 4.0, w), DomainError);
  EXPECT_THROW(total_objective(1.0, -4.0, w), DomainError);
}

TEST(Evaluate, ReconstructsAggregates) {
  auto s = scenario::default_case_study();
  s.weights.w_d = 1.0;
  s.weights.w_s = 100.0;
  s.weights.w_ce = 0.7;
  s.weights.w_cv_p = 3.0;
  const auto traj = simulate::rollout(s, {6e5, 40.0},
                                      simulate::policy_controls(s));
  const auto b = evaluate(traj, s);
  const auto &w = s.weights;
  const double J_d = w.w_ie * b.J_ie + w.w_ce * b.J_ce + w.w_cv_d * b.J_cv_d +
                     w.w_cv_p * b.J_cv_pcm;
  const double J_s = w.w_m * b.J_m + w.w_nom * b.J_nom;
  EXPECT_LE(rel(b.J_d, J_d), 1e-12);
  EXPECT_LE(rel(b.J_s, J_s), 1e-12);
  EXPECT_LE(rel(b.J_tot, w.w_d * J_d + w.w_s * J_s), 1e-12);
  EXPECT_EQ(b.J_m, 6e5);
}

TEST(Evaluate, BreakdownInvariants) {
  const auto s = scenario::default_case_study();
  const auto traj =
      simulate::rollout(s, {5e5, 30.0}, simulate::policy_controls(s));
  const auto b = evaluate(traj, s);
  EXPECT_GE(b.J_ie, 0.0);
  EXPECT_GE(b.J_cv_d, 0.0);
  EXPECT_GE(b.J_cv_pcm, 0.0);
  EXPECT_GT(b.J_m, 0.0);
  bool P_d_nonnegative = true;
  for (const auto &r : traj.knots)
    P_d_nonnegative = P_d_nonnegative && r.P_d >= 0.0;
  if (P_d_nonnegative)
    EXPECT_LE(b.J_ce, 0.0);
}

TEST(Evaluate, HeatRejectionIsLinear) {
  auto s = scenario::default_case_study();
  s.policy = {scenario::PolicyKind::kFixedValves, 1.0, 0.5, 0.0};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  auto c = simulate::policy_controls(s);
  for (auto &q : c.Q_hx)
    q = u(rng);
  auto c2 = c;
  for (auto &q : c2.Q_hx)
    q *= 2.0;
  const plant::PcmDesign d{1e6, 35.0};
  const auto a = evaluate(simulate::rollout(s, d, c), s);
  const auto b = evaluate(simulate::rollout(s, d, c2), s);
  EXPECT_EQ(b.J_ie, 2.0 * a.J_ie);
}

TEST(BreakdownJson, RoundTrip) {
  const auto s = scenario::default_case_study();
  const auto b = evaluate(
      simulate::rollout(s, {7e5, 33.3}, simulate::policy_controls(s)), s);
  const auto text = to_json(b, s.weights);
  EXPECT_NE(text.find("\"weights\""), std::string::npos);
  const auto r = from_json(text);
  EXPECT_EQ(r.J_ie, b.J_ie);
  EXPECT_EQ(r.J_ce, b.J_ce);
  EXPECT_EQ(r.J_cv_d, b.J_cv_d);
  EXPECT_EQ(r.J_cv_pcm, b.J_cv_pcm);
  EXPECT_EQ(r.J_m, b.J_m);
  EXPECT_EQ(r.J_nom, b.J_nom);
  EXPECT_EQ(r.J_d, b.J_d);
  EXPECT_EQ(r.J_s, b.J_s);
  EXPECT_EQ(r.J_tot, b.J_tot);
}

TEST(BreakdownJson, Malformed) {
  EXPECT_THROW(from_json("{\"J_ie\": 1}"), ParseError);
  EXPECT_THROW(from_json("not json"), ParseError);
}
