//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "pcmforge/transcription.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <json.hpp>

#include "pcmforge/errors.hpp"

namespace pcmforge::transcription {
namespace {
  constexpr double kEnergyScale = 1e-5;
  constexpr double kPowerScale = 1e-2;
  constexpr double kTemperatureScale = 1e-1;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  struct Controls {
    double Q_hx, v1, v2;
  };
} // namespace

std::vector<Layout::Block> Layout::blocks() const {
  std::vector<Block> out;
  out.push_back({"C_pcm", C_pcm, 1});
  out.push_back({"T_m", T_m, 1});
  if (Q_hx >= 0)
    out.push_back({"Q_hx", Q_hx, intervals});
  if (v1 >= 0)
    out.push_back({"v1", v1, intervals});
  if (v2 >= 0)
    out.push_back({"v2", v2, intervals});
  out.push_back({"E_d", E_d, knots});
  out.push_back({"E_pcm", E_pcm, knots});
  out.push_back({"s_d", s_d, knots});
  out.push_back({"s_pcm", s_pcm, knots});
  return out;
}

std::string Layout::variable_name(int index) const {
  for (const auto &b : blocks()) {
    if (index >= b.offset && index < b.offset + b.length) {
      if (b.length == 1 && (b.name == "C_pcm" || b.name == "T_m"))
        return b.name;
      return b.name + "[" + std::to_string(index - b.offset) + "]";
    }
  }
  throw DomainError("variable index " + std::to_string(index) +
                    " out of range");
}

NlpProblem NlpProblem::assemble(const scenario::Scenario &s,
                                const Options &options) {
  s.validate();
  NlpProblem p;
  p.scenario_ = s;
  p.options_ = options;

  Layout &l = p.layout_;
  l.knots = static_cast<int>(s.profile.knots());
  l.intervals = l.knots - 1;
  int next = 2;
  if (s.policy.optimizes_q_hx()) {
    l.Q_hx = next;
    next += l.intervals;
  }
  if (s.policy.optimizes_valves()) {
    l.v1 = next;
    next += l.intervals;
    l.v2 = next;
    next += l.intervals;
  }
  l.E_d = next;
  next += l.knots;
  l.E_pcm = next;
  next += l.knots;
  l.s_d = next;
  next += l.knots;
  l.s_pcm = next;
  next += l.knots;
  l.n_vars = next;

  const auto &b = s.bounds;
  Eigen::VectorXd lo(l.n_vars), hi(l.n_vars);
  p.scale_.resize(l.n_vars);
  auto fill = [&](int off, int len, double a, double c, double sc) {
    for (int i = off; i < off + len; ++i) {
      lo[i] = a;
      hi[i] = c;
      p.scale_[i] = sc;
    }
  };
  fill(l.C_pcm, 1, b.C_pcm_lb, b.C_pcm_ub, kEnergyScale);
  fill(l.T_m, 1, b.T_m_lb, b.T_m_ub, kTemperatureScale);
  if (l.Q_hx >= 0)
    fill(l.Q_hx, l.intervals, b.Q_hx_lb, b.Q_hx_ub, kPowerScale);
  if (l.v1 >= 0) {
    fill(l.v1, l.intervals, b.v_lb, b.v_ub, 1.0);
    fill(l.v2, l.intervals, b.v_lb, b.v_ub, 1.0);
  }
  fill(l.E_d, l.knots, -kInf, kInf, kEnergyScale);
  fill(l.E_pcm, l.knots, -kInf, kInf, kEnergyScale);
  fill(l.s_d, l.knots, 0.0, kInf, kEnergyScale);
  fill(l.s_pcm, l.knots, 0.0, kInf, kEnergyScale);
  p.lower_ = lo.cwiseProduct(p.scale_);
  p.upper_ = hi.cwiseProduct(p.scale_);
  p.constraint_scale_ = kEnergyScale;

  // Objective scale: unit max-norm gradient at a nominal rollout.
  plant::PcmDesign nominal = s.design;
  nominal.C_pcm = std::clamp(nominal.C_pcm, b.C_pcm_lb, b.C_pcm_ub);
  nominal.T_m = std::clamp(nominal.T_m, b.T_m_lb, b.T_m_ub);
  simulate::ControlSequence u = simulate::ControlSequence::constant(
      l.intervals, std::clamp(s.policy.Q_hx, b.Q_hx_lb, b.Q_hx_ub),
      std::clamp(s.policy.v1, b.v_lb, b.v_ub),
      std::clamp(s.policy.v2, b.v_lb, b.v_ub));
  p.objective_scale_ = 1.0;
  try {
    if (s.policy.optimizes_q_hx() && u.v2[0] == 1.0)
      u.Q_hx.assign(l.intervals, 0.0);
    const auto traj = simulate::rollout(s, nominal, u);
    nlp::EvalPoint ep;
    p.evaluate(p.encode(nominal, u, traj), ep, true);
    const double g = ep.gradient.cwiseAbs().maxCoeff();
    p.objective_scale_ = g > 0.0 ? 1.0 / g : 1.0;
  } catch (const std::exception &) {
    p.objective_scale_ = 1e-5;
  }
  return p;
}

void NlpProblem::evaluate(const Eigen::VectorXd &z, nlp::EvalPoint &out,
                          bool derivatives) const {
  if (z.size() != layout_.n_vars)
    throw DomainError("decision vector has length " +
                      std::to_string(z.size()) + ", expected " +
                      std::to_string(layout_.n_vars));
  if (options_.derivatives == DerivativeMode::kAnalytic || !derivatives) {
    evaluate_analytic(z, out, derivatives);
    return;
  }
  evaluate_analytic(z, out, false);
  const auto fd = nlp::finite_difference(*this, z, 1e-7);
  out.gradient = fd.gradient;
  out.jac_eq.clear();
  out.jac_ineq.clear();
  for (int j = 0; j < layout_.n_vars; ++j) {
    for (int i = 0; i < fd.jac_eq.rows(); ++i) {
      if (fd.jac_eq(i, j) != 0.0)
        out.jac_eq.push_back({i, j, fd.jac_eq(i, j)});
    }
    for (int i = 0; i < fd.jac_ineq.rows(); ++i) {
      if (fd.jac_ineq(i, j) != 0.0)
        out.jac_ineq.push_back({i, j, fd.jac_ineq(i, j)});
    }
  }
}

void NlpProblem::evaluate_analytic(const Eigen::VectorXd &z,
                                   nlp::EvalPoint &out,
                                   bool derivatives) const {
  const auto &s = scenario_;
  const auto &l = layout_;
  const auto &w = s.weights;
  const auto &prm = s.params;
  const int M = l.intervals;
  const int N = l.knots;
  const double dt = s.profile.dt;
  const double t_f = s.profile.horizon();
  const double cs = constraint_scale_;

  auto raw = [&](int i) { return z[i] / scale_[i]; };
  auto control = [&](int k) -> Controls {
    return {l.Q_hx >= 0 ? raw(l.Q_hx + k) : s.policy.Q_hx,
            l.v1 >= 0 ? raw(l.v1 + k) : s.policy.v1,
            l.v2 >= 0 ? raw(l.v2 + k) : s.policy.v2};
  };

  const plant::PcmDesign design{raw(l.C_pcm), raw(l.T_m)};

  out.x = z;
  out.eq.resize(2 * N);
  out.ineq.resize(4 * N);
  Eigen::VectorXd grad_d;
  if (derivatives) {
    grad_d = Eigen::VectorXd::Zero(l.n_vars);
    out.jac_eq.clear();
    out.jac_ineq.clear();
    out.jac_eq.reserve(2 + 14 * M);
    out.jac_ineq.reserve(11 * N);
  }
  // Scaled Jacobian entry from a physical partial derivative.
  auto jac = [&](std::vector<nlp::Triplet> &j, int row, int col,
                 double d_raw) {
    j.push_back({row, col, cs * d_raw / scale_[col]});
  };

  out.eq[0] = cs * (raw(l.E_d) - s.initial.E_d);
  out.eq[1] = cs * (raw(l.E_pcm) - s.initial.soc * design.C_pcm);
  if (derivatives) {
    jac(out.jac_eq, 0, l.E_d, 1.0);
    jac(out.jac_eq, 1, l.E_pcm, 1.0);
    jac(out.jac_eq, 1, l.C_pcm, -s.initial.soc);
  }

  double J_ie = 0.0, J_ce = 0.0, sum_sd = 0.0, sum_spcm = 0.0;
  const double dQout_dEd = plant::pv_boundary_dTd(prm) / prm.C_d;

  for (int k = 0; k < M; ++k) {
    const double E_d = raw(l.E_d + k);
    const double E_pcm = raw(l.E_pcm + k);
    const double T_d = plant::device_temperature(prm, E_d);
    const Controls u = control(k);
    const plant::ValveCommand v{u.v1, u.v2};

    plant::PowerSensitivity sens;
    plant::HeatFlows f;
    try {
      if (derivatives) {
        sens = plant::coolant_sensitivity(prm, design, T_d, v, u.Q_hx);
        f = sens.solution.flows;
      } else {
        f = plant::solve_coolant(prm, design, T_d, v, u.Q_hx).flows;
      }
      const auto bd = plant::pv_boundary(prm, s.profile.G[k],
                                         s.profile.T_inf[k], T_d);
      f.Q_in = bd.Q_in;
      f.Q_out = bd.Q_out;
    } catch (const std::exception &e) {
      throw nlp::EvalFailure("interval " + std::to_string(k) + ": " +
                             e.what());
    }

    const int rd = 2 + 2 * k;
    const int rp = rd + 1;
    out.eq[rd] =
        cs * (raw(l.E_d + k + 1) - simulate::advance_device(E_d, dt, f));
    out.eq[rp] =
        cs * (raw(l.E_pcm + k + 1) - simulate::advance_pcm(E_pcm, dt, f));

    J_ie += u.Q_hx * dt;
    J_ce -= f.P_d * dt;
    sum_sd += raw(l.s_d + k) * dt;
    sum_spcm += raw(l.s_pcm + k) * dt;

    if (!derivatives)
      continue;

    const auto &dPd = sens.dP_d;
    const auto &dPp = sens.dP_pcm;
    const double dPd_dEd = dPd[plant::kTd] / prm.C_d;
    const double dPp_dEd = dPp[plant::kTd] / prm.C_d;

    jac(out.jac_eq, rd, l.E_d + k + 1, 1.0);
    jac(out.jac_eq, rd, l.E_d + k, -1.0 + dt * (dQout_dEd + dPd_dEd));
    jac(out.jac_eq, rd, l.T_m, dt * dPd[plant::kTm]);
    jac(out.jac_eq, rp, l.E_pcm + k + 1, 1.0);
    jac(out.jac_eq, rp, l.E_pcm + k, -1.0);
    jac(out.jac_eq, rp, l.E_d + k, -dt * dPp_dEd);
    jac(out.jac_eq, rp, l.T_m, -dt * dPp[plant::kTm]);

    grad_d[l.E_d + k] += w.w_ce * (-dt * dPd_dEd);
    grad_d[l.T_m] += w.w_ce * (-dt * dPd[plant::kTm]);
    grad_d[l.s_d + k] += w.w_cv_d * dt / t_f;
    grad_d[l.s_pcm + k] += w.w_cv_p * dt / t_f;

    if (l.Q_hx >= 0) {
      const int c = l.Q_hx + k;
      jac(out.jac_eq, rd, c, dt * dPd[plant::kQhx]);
      jac(out.jac_eq, rp, c, -dt * dPp[plant::kQhx]);
      grad_d[c] += w.w_ie * dt + w.w_ce * (-dt * dPd[plant::kQhx]);
    }
    if (l.v1 >= 0) {
      for (auto [c, idx] : {std::pair{l.v1 + k, plant::kV1},
                            std::pair{l.v2 + k, plant::kV2}}) {
        jac(out.jac_eq, rd, c, dt * dPd[idx]);
        jac(out.jac_eq, rp, c, -dt * dPp[idx]);
        grad_d[c] += w.w_ce * (-dt * dPd[idx]);
      }
    }
  }

  const auto &b = s.bounds;
  for (int k = 0; k < N; ++k) {
    const double E_d = raw(l.E_d + k);
    const double E_pcm = raw(l.E_pcm + k);
    const double sd = raw(l.s_d + k);
    const double sp = raw(l.s_pcm + k);
    out.ineq[4 * k + 0] = cs * (E_d - b.E_d_lb + sd);
    out.ineq[4 * k + 1] = cs * (b.E_d_ub + sd - E_d);
    out.ineq[4 * k + 2] = cs * (E_pcm - b.E_pcm_lb_frac * design.C_pcm + sp);
    out.ineq[4 * k + 3] = cs * (b.E_pcm_ub_frac * design.C_pcm + sp - E_pcm);
    if (derivatives) {
      jac(out.jac_ineq, 4 * k + 0, l.E_d + k, 1.0);
      jac(out.jac_ineq, 4 * k + 0, l.s_d + k, 1.0);
      jac(out.jac_ineq, 4 * k + 1, l.E_d + k, -1.0);
      jac(out.jac_ineq, 4 * k + 1, l.s_d + k, 1.0);
      jac(out.jac_ineq, 4 * k + 2, l.E_pcm + k, 1.0);
      jac(out.jac_ineq, 4 * k + 2, l.C_pcm, -b.E_pcm_lb_frac);
      jac(out.jac_ineq, 4 * k + 2, l.s_pcm + k, 1.0);
      jac(out.jac_ineq, 4 * k + 3, l.E_pcm + k, -1.0);
      jac(out.jac_ineq, 4 * k + 3, l.C_pcm, b.E_pcm_ub_frac);
      jac(out.jac_ineq, 4 * k + 3, l.s_pcm + k, 1.0);
    }
  }

  const double J_cv_d = sum_sd / t_f;
  const double J_cv_pcm = sum_spcm / t_f;
  const double J_d =
      w.w_ie * J_ie + w.w_ce * J_ce + w.w_cv_d * J_cv_d + w.w_cv_p * J_cv_pcm;
  const auto st = objective::static_objectives(design, w, s.nominal.P_pcm_nom,
                                               s.nominal.t_nom);
  double J_tot = 0.0;
  try {
    J_tot = objective::total_objective(J_d, st.J_s, w);
  } catch (const DomainError &e) {
    throw nlp::EvalFailure(e.what());
  }
  out.objective = objective_scale_ * J_tot;

  if (derivatives) {
    const double dJ_dJd =
        w.n == 1.0 ? w.w_d : w.w_d * w.n * std::pow(J_d, w.n - 1.0);
    const double dJ_dJs =
        w.n == 1.0 ? w.w_s : w.w_s * w.n * std::pow(st.J_s, w.n - 1.0);
    Eigen::VectorXd g = dJ_dJd * grad_d;
    g[l.C_pcm] += dJ_dJs * w.w_m;
    out.gradient = objective_scale_ * g.cwiseQuotient(scale_);
  }
}

Eigen::VectorXd NlpProblem::initial_point(std::uint64_t seed,
                                          int start) const {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(start)};
  std::mt19937_64 rng(seq);
  const auto &b = scenario_.bounds;
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * nlp::unit_uniform(rng);
  };

  for (int attempt = 0;; ++attempt) {
    plant::PcmDesign d{uniform(b.C_pcm_lb, b.C_pcm_ub),
                       uniform(b.T_m_lb, b.T_m_ub)};
    simulate::ControlSequence u = simulate::policy_controls(scenario_);
    for (int k = 0; k < layout_.intervals; ++k) {
      if (layout_.Q_hx >= 0)
        u.Q_hx[k] = uniform(b.Q_hx_lb, b.Q_hx_ub);
      if (layout_.v1 >= 0) {
        u.v1[k] = uniform(b.v_lb, b.v_ub);
        u.v2[k] = uniform(b.v_lb, b.v_ub);
      }
    }
    try {
      return encode(d, u, simulate::rollout(scenario_, d, u));
    } catch (const std::exception &) {
      if (attempt >= 16)
        throw;
    }
  }
}

Eigen::VectorXd NlpProblem::encode(const plant::PcmDesign &design,
                                   const simulate::ControlSequence &controls,
                                   const simulate::Trajectory &traj) const {
  const auto &l = layout_;
  if (static_cast<int>(traj.size()) != l.knots ||
      static_cast<int>(controls.intervals()) != l.intervals)
    throw DomainError("trajectory or controls do not match the horizon");
  Eigen::VectorXd z(l.n_vars);
  z[l.C_pcm] = design.C_pcm;
  z[l.T_m] = design.T_m;
  for (int k = 0; k < l.intervals; ++k) {
    if (l.Q_hx >= 0)
      z[l.Q_hx + k] = controls.Q_hx[k];
    if (l.v1 >= 0) {
      z[l.v1 + k] = controls.v1[k];
      z[l.v2 + k] = controls.v2[k];
    }
  }
  for (int k = 0; k < l.knots; ++k) {
    const auto &r = traj.knots[k];
    z[l.E_d + k] = r.E_d;
    z[l.E_pcm + k] = r.E_pcm;
    z[l.s_d + k] = r.s_d;
    z[l.s_pcm + k] = r.s_pcm;
  }
  return z.cwiseProduct(scale_);
}

Decoded NlpProblem::decode(const Eigen::VectorXd &z) const {
  const auto &s = scenario_;
  const auto &l = layout_;
  const Eigen::VectorXd x = z.cwiseQuotient(scale_);

  Decoded d;
  d.design = {x[l.C_pcm], x[l.T_m]};
  d.controls = simulate::policy_controls(s);
  for (int k = 0; k < l.intervals; ++k) {
    if (l.Q_hx >= 0)
      d.controls.Q_hx[k] = x[l.Q_hx + k];
    if (l.v1 >= 0) {
      d.controls.v1[k] = x[l.v1 + k];
      d.controls.v2[k] = x[l.v2 + k];
    }
  }

  auto &traj = d.trajectory;
  traj.dt = s.profile.dt;
  traj.design = d.design;
  traj.knots.resize(l.knots);
  for (int k = 0; k < l.knots; ++k) {
    const int ku = std::min(k, l.intervals - 1);
    const simulate::KnotControl u{d.controls.Q_hx[ku], d.controls.v1[ku],
                                  d.controls.v2[ku]};
    const simulate::KnotDisturbance w{s.profile.G[ku], s.profile.T_inf[ku]};
    auto &r = traj.knots[k];
    r.t = s.profile.dt * k;
    r.E_d = x[l.E_d + k];
    r.E_pcm = x[l.E_pcm + k];
    r.T_d = plant::device_temperature(s.params, r.E_d);
    r.soc = plant::state_of_charge(d.design, r.E_pcm);
    const auto f = simulate::evaluate_knot(s.params, d.design, r.E_d, u, w);
    r.P_d = f.flows.P_d;
    r.P_pcm = f.flows.P_pcm;
    r.Q_hx = f.flows.Q_hx;
    r.Q_in = f.flows.Q_in;
    r.Q_out = f.flows.Q_out;
    r.coolant = f.coolant;
    r.s_d = x[l.s_d + k];
    r.s_pcm = x[l.s_pcm + k];
    r.v1 = u.v1;
    r.v2 = u.v2;
  }
  return d;
}

objective::ObjectiveBreakdown
NlpProblem::breakdown(const Eigen::VectorXd &z) const {
  return objective::evaluate(decode(z).trajectory, scenario_);
}

Eigen::VectorXd NlpProblem::tighten_slacks(const Eigen::VectorXd &z) const {
  const auto &l = layout_;
  const auto &b = scenario_.bounds;
  Eigen::VectorXd out = z;
  const double C = z[l.C_pcm] / scale_[l.C_pcm];
  for (int k = 0; k < l.knots; ++k) {
    const double E_d = z[l.E_d + k] / scale_[l.E_d + k];
    const double E_pcm = z[l.E_pcm + k] / scale_[l.E_pcm + k];
    out[l.s_d + k] = simulate::violation(E_d, b.E_d_lb, b.E_d_ub) *
                     scale_[l.s_d + k];
    out[l.s_pcm + k] =
        simulate::violation(E_pcm, b.E_pcm_lb_frac * C, b.E_pcm_ub_frac * C) *
        scale_[l.s_pcm + k];
  }
  return out;
}

std::string NlpProblem::dump_json() const {
  nlohmann::ordered_json j;
  j["policy"] = scenario::to_string(scenario_.policy.kind);
  j["n_vars"] = layout_.n_vars;
  j["n_eq"] = num_equalities();
  j["n_ineq"] = num_inequalities();
  j["knots"] = layout_.knots;
  j["objective_scale"] = objective_scale_;
  j["constraint_scale"] = constraint_scale_;
  auto blocks = nlohmann::ordered_json::array();
  for (const auto &b : layout_.blocks()) {
    const double sc = scale_[b.offset];
    auto bound = [&](double v) -> nlohmann::ordered_json {
      if (!std::isfinite(v))
        return nullptr;
      return v / sc;
    };
    blocks.push_back({{"name", b.name},
                      {"offset", b.offset},
                      {"length", b.length},
                      {"scale", sc},
                      {"lower", bound(lower_[b.offset])},
                      {"upper", bound(upper_[b.offset])}});
  }
  j["blocks"] = blocks;
  return j.dump(2) + "\n";
}

} // namespace pcmforge::transcription
