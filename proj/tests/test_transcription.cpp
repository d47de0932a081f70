//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>
#include <json.hpp>

#include "oracles.hpp"
#include "pcmforge/errors.hpp"
#include "pcmforge/objective.hpp"
#include "pcmforge/scenario.hpp"
#include "pcmforge/simulate.hpp"
#include "pcmforge/transcription.hpp"

using namespace pcmforge;
using transcription::NlpProblem;

namespace {
scenario::Scenario fully_optimized(double duration = 3600.0) {
  auto s = scenario::default_case_study();
  s.policy.kind = scenario::PolicyKind::kFullyOptimized;
  s.profile = scenario::synth_profile(
      {duration, 60, 950, 350, duration * 5 / 6, duration, 33});
  return s;
}

simulate::ControlSequence random_controls(std::mt19937_64 &rng,
                                          std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  simulate::ControlSequence c;
  for (std::size_t k = 0; k < n; ++k) {
    c.v1.push_back(u(rng));
    c.v2.push_back(0.95 * u(rng));
    c.Q_hx.push_back(100.0 * u(rng));
  }
  return c;
}

double max_abs(const Eigen::VectorXd &v) {
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}
} // namespace

TEST(Assemble, VariableCounts) {
  const auto full = NlpProblem::assemble(fully_optimized());
  EXPECT_EQ(full.num_variables(), 2 + 3 * 60 + 2 * 61 + 2 * 61);
  EXPECT_EQ(full.num_variables(), 426);
  EXPECT_EQ(full.num_equalities(), 122);
  EXPECT_EQ(full.num_inequalities(), 244);

  const auto passive = NlpProblem::assemble(scenario::default_case_study());
  EXPECT_EQ(passive.layout().Q_hx, -1);
  EXPECT_EQ(passive.layout().v1, -1);
  EXPECT_EQ(passive.num_variables(), 246);

  auto s = scenario::default_case_study();
  s.policy = {scenario::PolicyKind::kFixedValves, 1.0, 0.5, 0.0};
  EXPECT_EQ(NlpProblem::assemble(s).num_variables(), 306);
}

TEST(Assemble, LayoutIsBijection) {
  const auto p = NlpProblem::assemble(fully_optimized());
  std::vector<int> hits(p.num_variables(), 0);
  for (const auto &b : p.layout().blocks())
    for (int i = b.offset; i < b.offset + b.length; ++i)
      ++hits[i];
  for (int h : hits)
    EXPECT_EQ(h, 1);
  EXPECT_EQ(p.layout().variable_name(0), "C_pcm");
  EXPECT_EQ(p.layout().variable_name(p.layout().E_d + 12), "E_d[12]");
  EXPECT_THROW(p.layout().variable_name(p.num_variables()), DomainError);
}

TEST(Assemble, BoundsAndScaling) {
  const auto p = NlpProblem::assemble(fully_optimized());
  for (int i = 0; i < p.num_variables(); ++i)
    EXPECT_LE(p.lower()[i], p.upper()[i]);
  const auto &l = p.layout();
  EXPECT_DOUBLE_EQ(p.lower()[l.C_pcm] / p.scale()[l.C_pcm], 5e5);
  EXPECT_DOUBLE_EQ(p.upper()[l.T_m] / p.scale()[l.T_m], 50.0);
  EXPECT_DOUBLE_EQ(p.upper()[l.Q_hx] / p.scale()[l.Q_hx], 100.0);
  EXPECT_EQ(p.lower()[l.s_d], 0.0);
  EXPECT_TRUE(std::isinf(p.upper()[l.E_d]));
  // scaled nominal magnitudes are O(1)
  const auto z = p.initial_point(1, 0);
  for (int i = 0; i < p.num_variables(); ++i)
    EXPECT_LE(std::abs(z[i]), 100.0) << p.layout().variable_name(i);
}

TEST(Assemble, RejectsInconsistentPolicy) {
  auto s = scenario::default_case_study();
  s.policy.v1 = 1.5;
  EXPECT_THROW(NlpProblem::assemble(s), DomainError);
  s = scenario::default_case_study();
  s.policy.Q_hx = 50.0; // with v2 = 1 the heat exchanger carries no flow
  EXPECT_THROW(NlpProblem::assemble(s), DomainError);
}

TEST(Evaluate, RolloutHasZeroResiduals) {
  const auto p = NlpProblem::assemble(fully_optimized());
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> C(5e5, 6e6), Tm(20.0, 50.0);
  for (int trial = 0; trial < 20; ++trial) {
    const plant::PcmDesign d{C(rng), Tm(rng)};
    const auto u = random_controls(rng, 60);
    const auto traj = simulate::rollout(p.scenario(), d, u);
    nlp::EvalPoint ep;
    p.evaluate(p.encode(d, u, traj), ep, false);
    // rows as the solver sees them, then per row in joules relative to the
    // stored energy (the scaled encoding costs one rounding per variable)
    EXPECT_LE(ep.eq.norm(), 1e-9);
    for (int r = 0; r < p.num_equalities(); ++r)
      EXPECT_LE(std::abs(ep.eq[r]) / p.constraint_scale(),
                1e-14 * (traj.knots.front().E_d + d.C_pcm));
    EXPECT_GE(ep.ineq.minCoeff(), -1e-12);
    const auto b = objective::evaluate(traj, p.scenario());
    EXPECT_LE(std::abs(ep.objective / p.objective_scale() - b.J_tot),
              1e-9 * std::max(1.0, std::abs(b.J_tot)));
  }
}

TEST(Evaluate, DecodedTrajectoryResimulates) {
  const auto p = NlpProblem::assemble(fully_optimized());
  const auto z = p.initial_point(9, 3);
  const auto dec = p.decode(z);
  const auto sim = simulate::rollout(p.scenario(), dec.design, dec.controls);
  ASSERT_EQ(sim.size(), dec.trajectory.size());
  for (std::size_t k = 0; k < sim.size(); ++k) {
    const auto &a = sim.knots[k];
    const auto &b = dec.trajectory.knots[k];
    EXPECT_NEAR(a.E_d, b.E_d, 1e-9 * std::abs(a.E_d));
    EXPECT_NEAR(a.E_pcm, b.E_pcm, 1e-9 * std::max(1.0, std::abs(a.E_pcm)));
    EXPECT_NEAR(a.P_d, b.P_d, 1e-9 * std::max(1.0, std::abs(a.P_d)));
    EXPECT_EQ(a.s_d, b.s_d);
  }
  const auto br = p.breakdown(z);
  const auto bs = objective::evaluate(sim, p.scenario());
  EXPECT_LE(std::abs(br.J_tot - bs.J_tot), 1e-9 * std::abs(bs.J_tot));
}

TEST(Evaluate, EncodeDecodeRoundTrip) {
  const auto p = NlpProblem::assemble(fully_optimized());
  const auto z = p.initial_point(4, 1);
  const auto d = p.decode(z);
  const auto z2 = p.encode(d.design, d.controls, d.trajectory);
  EXPECT_LE(max_abs(z - z2), 1e-15 * max_abs(z));
}

TEST(Evaluate, StateEntersOnlyNeighbouringDefects) {
  const auto p = NlpProblem::assemble(fully_optimized());
  const auto &l = p.layout();
  const auto z = p.initial_point(2, 0);
  nlp::EvalPoint base, moved;
  p.evaluate(z, base, false);
  for (int k : {0, 1, 30, 60}) {
    Eigen::VectorXd zp = z;
    zp[l.E_d + k] += 1e-3;
    p.evaluate(zp, moved, false);
    std::set<int> changed;
    for (int r = 0; r < p.num_equalities(); ++r)
      if (moved.eq[r] != base.eq[r])
        changed.insert(r);
    std::set<int> expected;
    if (k == 0)
      expected.insert(0);
    if (k > 0)
      expected.insert(2 + 2 * (k - 1)); // device defect arriving at k
    if (k < l.intervals) {
      expected.insert(2 + 2 * k); // device defect leaving k
      expected.insert(3 + 2 * k); // PCM defect leaving k, through T_d
    }
    EXPECT_EQ(changed, expected) << "k = " << k;
  }
}

TEST(Evaluate, GradientMatchesFiniteDifferences) {
  const auto p = NlpProblem::assemble(fully_optimized(600.0));
  ASSERT_EQ(p.layout().knots, 11);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd z = p.initial_point(100 + i, i);
    // move off the dynamics manifold and give the slacks some weight
    for (int k = 0; k < p.layout().knots; ++k) {
      z[p.layout().E_d + k] *= 1.0 + 0.01 * (u(rng) - 0.5);
      z[p.layout().s_d + k] += 0.05 * u(rng);
      z[p.layout().s_pcm + k] += 0.05 * u(rng);
    }
    nlp::EvalPoint ep;
    p.evaluate(z, ep, true);
    const Eigen::VectorXd fd = oracle::fd_gradient(p, z, 1e-6);
    const double err = max_abs(ep.gradient - fd) / max_abs(fd);
    worst = std::max(worst, err);

    const Eigen::MatrixXd J =
        nlp::to_dense(ep.jac_eq, p.num_equalities(), p.num_variables());
    const Eigen::MatrixXd Jfd = oracle::fd_jacobian_eq(p, z, 1e-6);
    EXPECT_LE((J - Jfd).cwiseAbs().maxCoeff() / Jfd.cwiseAbs().maxCoeff(),
              1e-5);
  }
  EXPECT_LE(worst, 1e-5);
}

TEST(Evaluate, FiniteDifferenceModeAgrees) {
  auto s = fully_optimized(600.0);
  const auto a = NlpProblem::assemble(s);
  const auto b = NlpProblem::assemble(
      s, {transcription::DerivativeMode::kFiniteDifference});
  const auto z = a.initial_point(5, 0);
  nlp::EvalPoint ea, eb;
  a.evaluate(z, ea, true);
  b.evaluate(z, eb, true);
  EXPECT_EQ(ea.objective, eb.objective);
  EXPECT_LE(max_abs(ea.gradient - eb.gradient) / max_abs(ea.gradient), 1e-5);
}

TEST(Evaluate, SparsityIsBanded) {
  const auto p = NlpProblem::assemble(fully_optimized(240.0));
  const auto &l = p.layout();
  ASSERT_EQ(l.knots, 5);
  const auto z = p.initial_point(8, 0);
  nlp::EvalPoint ep;
  p.evaluate(z, ep, true);
  const Eigen::MatrixXd J =
      nlp::to_dense(ep.jac_eq, p.num_equalities(), p.num_variables());
  const Eigen::MatrixXd Jfd = oracle::fd_jacobian_eq(p, z, 1e-6);
  const double tiny = 1e-9 * Jfd.cwiseAbs().maxCoeff();
  for (int r = 0; r < J.rows(); ++r) {
    for (int c = 0; c < J.cols(); ++c) {
      const bool fd_nz = std::abs(Jfd(r, c)) > tiny;
      const bool an_nz = J(r, c) != 0.0;
      if (fd_nz)
        EXPECT_TRUE(an_nz) << r << "," << l.variable_name(c);
      if (r < 2 || !an_nz)
        continue;
      // a defect of interval k touches only knots k, k + 1, controls k and
      // the design
      const int k = (r - 2) / 2;
      const std::string name = l.variable_name(c);
      const bool allowed =
          c == l.C_pcm || c == l.T_m ||
          name == "E_d[" + std::to_string(k) + "]" ||
          name == "E_d[" + std::to_string(k + 1) + "]" ||
          name == "E_pcm[" + std::to_string(k) + "]" ||
          name == "E_pcm[" + std::to_string(k + 1) + "]" ||
          name == "Q_hx[" + std::to_string(k) + "]" ||
          name == "v1[" + std::to_string(k) + "]" ||
          name == "v2[" + std::to_string(k) + "]";
      EXPECT_TRUE(allowed) << "row " << r << " col " << name;
    }
  }
}

TEST(Evaluate, HeatRejectionWithoutFlowFails) {
  const auto p = NlpProblem::assemble(fully_optimized());
  Eigen::VectorXd z = p.initial_point(1, 0);
  z[p.layout().v2 + 7] = 1.0;
  z[p.layout().Q_hx + 7] = 0.5; // 50 W, scaled
  nlp::EvalPoint ep;
  try {
    p.evaluate(z, ep, false);
    FAIL() << "expected EvalFailure";
  } catch (const nlp::EvalFailure &e) {
    EXPECT_NE(std::string(e.what()).find("interval 7"), std::string::npos);
  }
}

TEST(Evaluate, WrongLengthRejected) {
  const auto p = NlpProblem::assemble(scenario::default_case_study());
  nlp::EvalPoint ep;
  EXPECT_THROW(p.evaluate(Eigen::VectorXd::Zero(3), ep, false), DomainError);
}

TEST(TightenSlacks, ExactViolations) {
  const auto p = NlpProblem::assemble(scenario::default_case_study());
  const auto &l = p.layout();
  Eigen::VectorXd z = p.initial_point(3, 0);
  for (int k = 0; k < l.knots; ++k) {
    z[l.s_d + k] += 0.3;
    z[l.s_pcm + k] += 0.7;
  }
  const auto t = p.tighten_slacks(z);
  nlp::EvalPoint a, b;
  p.evaluate(z, a, false);
  p.evaluate(t, b, false);
  EXPECT_LE(b.objective, a.objective);
  EXPECT_GE(b.ineq.minCoeff(), -1e-15);
  const auto d = p.decode(t);
  const auto &bd = p.scenario().bounds;
  for (const auto &r : d.trajectory.knots) {
    EXPECT_NEAR(r.s_d, simulate::violation(r.E_d, bd.E_d_lb, bd.E_d_ub),
                1e-9);
    EXPECT_NEAR(r.s_pcm,
                simulate::violation(r.E_pcm, 0.0, d.design.C_pcm), 1e-9);
  }
}

TEST(DumpJson, DescribesLayout) {
  const auto p = NlpProblem::assemble(fully_optimized());
  const auto j = nlohmann::json::parse(p.dump_json());
  EXPECT_EQ(j.at("n_vars").get<int>(), 426);
  EXPECT_EQ(j.at("n_eq").get<int>(), 122);
  EXPECT_EQ(j.at("n_ineq").get<int>(), 244);
  EXPECT_EQ(j.at("blocks").size(), 9u);
  EXPECT_EQ(j.at("blocks")[0].at("name"), "C_pcm");
  EXPECT_DOUBLE_EQ(j.at("blocks")[0].at("lower").get<double>(), 5e5);
  EXPECT_TRUE(j.at("blocks")[5].at("upper").is_null());
}
