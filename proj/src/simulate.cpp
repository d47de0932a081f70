//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "pcmforge/simulate.hpp"

#include <algorithm>
#include <fstream>

#include "pcmforge/errors.hpp"
#include "pcmforge/format.hpp"

namespace pcmforge::simulate {

ControlSequence ControlSequence::constant(std::size_t intervals, double Q_hx,
                                          double v1, double v2) {
  ControlSequence c;
  c.Q_hx.assign(intervals, Q_hx);
  c.v1.assign(intervals, v1);
  c.v2.assign(intervals, v2);
  return c;
}

void ControlSequence::validate(const scenario::Bounds &bounds,
                               std::size_t intervals) const {
  if (Q_hx.size() != intervals || v1.size() != intervals ||
      v2.size() != intervals)
    throw DomainError("control sequences must have N - 1 = " +
                      std::to_string(intervals) + " entries");
  for (std::size_t k = 0; k < intervals; ++k) {
    if (!(Q_hx[k] >= bounds.Q_hx_lb && Q_hx[k] <= bounds.Q_hx_ub))
      throw DomainError("Q_hx outside bounds at interval " +
                        std::to_string(k));
    if (!(v1[k] >= bounds.v_lb && v1[k] <= bounds.v_ub) ||
        !(v2[k] >= bounds.v_lb && v2[k] <= bounds.v_ub))
      throw DomainError("valve command outside bounds at interval " +
                        std::to_string(k));
  }
}

ControlSequence policy_controls(const scenario::Scenario &s) {
  return ControlSequence::constant(s.profile.knots() - 1, s.policy.Q_hx,
                                   s.policy.v1, s.policy.v2);
}

KnotFlows evaluate_knot(const plant::PlantParams &params,
                        const plant::PcmDesign &design, double E_d,
                        const KnotControl &u, const KnotDisturbance &w) {
  const double T_d = plant::device_temperature(params, E_d);
  const auto coolant = plant::solve_coolant(params, design, T_d,
                                            plant::ValveCommand{u.v1, u.v2},
                                            u.Q_hx);
  const auto boundary = plant::pv_boundary(params, w.G, w.T_inf, T_d);
  KnotFlows out;
  out.flows = coolant.flows;
  out.flows.Q_in = boundary.Q_in;
  out.flows.Q_out = boundary.Q_out;
  out.coolant = coolant.state;
  return out;
}

State step(const scenario::Scenario &s, const plant::PcmDesign &design,
           const State &x, const KnotControl &u, const KnotDisturbance &w) {
  const KnotFlows k = evaluate_knot(s.params, design, x.E_d, u, w);
  const double dt = s.profile.dt;
  return {advance_device(x.E_d, dt, k.flows), advance_pcm(x.E_pcm, dt, k.flows)};
}

Trajectory rollout(const scenario::Scenario &s, const plant::PcmDesign &design,
                   const ControlSequence &controls,
                   const RolloutOptions &options) {
  design.validate();
  const std::size_t n = s.profile.knots();
  controls.validate(s.bounds, n - 1);

  Trajectory traj;
  traj.dt = s.profile.dt;
  traj.design = design;
  traj.knots.resize(n);

  const double E_pcm_lb = s.bounds.E_pcm_lb_frac * design.C_pcm;
  const double E_pcm_ub = s.bounds.E_pcm_ub_frac * design.C_pcm;

  State x{s.initial.E_d, s.initial.soc * design.C_pcm};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t ku = std::min(k, n - 2);
    const KnotControl u{controls.Q_hx[ku], controls.v1[ku], controls.v2[ku]};
    const KnotDisturbance w{s.profile.G[ku], s.profile.T_inf[ku]};
    const KnotFlows f = evaluate_knot(s.params, design, x.E_d, u, w);

    KnotRecord &r = traj.knots[k];
    r.t = s.profile.dt * static_cast<double>(k);
    r.E_d = x.E_d;
    r.E_pcm = x.E_pcm;
    r.T_d = plant::device_temperature(s.params, x.E_d);
    r.soc = plant::state_of_charge(design, x.E_pcm);
    r.P_d = f.flows.P_d;
    r.P_pcm = f.flows.P_pcm;
    r.Q_hx = f.flows.Q_hx;
    r.Q_in = f.flows.Q_in;
    r.Q_out = f.flows.Q_out;
    r.s_d = violation(x.E_d, s.bounds.E_d_lb, s.bounds.E_d_ub);
    r.s_pcm = violation(x.E_pcm, E_pcm_lb, E_pcm_ub);
    r.coolant = f.coolant;
    r.v1 = u.v1;
    r.v2 = u.v2;

    if (k + 1 < n) {
      x.E_d = advance_device(x.E_d, s.profile.dt, f.flows);
      x.E_pcm = advance_pcm(x.E_pcm, s.profile.dt, f.flows);
      if (options.clamp_soc)
        x.E_pcm = std::clamp(x.E_pcm, 0.0, design.C_pcm);
    }
  }
  return traj;
}

std::string format_trajectory_csv(const Trajectory &traj) {
  std::string out =
      "t_s,E_d_J,E_pcm_J,T_d_C,SOC,P_d_W,P_pcm_W,Q_hx_W,Q_in_W,Q_out_W,"
      "s_d_J,s_pcm_J,T_c_j1_C,T_c_d_C,T_c_hx_C,T_c_j2_C,T_c_pcm_C,v1,v2\n";
  for (const auto &r : traj.knots) {
    const double cols[] = {r.t,       r.E_d,     r.E_pcm,  r.T_d,
                           r.soc,     r.P_d,     r.P_pcm,  r.Q_hx,
                           r.Q_in,    r.Q_out,   r.s_d,    r.s_pcm,
                           r.coolant.T_c_j1,     r.coolant.T_c_d,
                           r.coolant.T_c_hx,     r.coolant.T_c_j2,
                           r.coolant.T_c_pcm,    r.v1,     r.v2};
    bool first = true;
    for (double c : cols) {
      if (!first)
        out += ',';
      out += format_double(c);
      first = false;
    }
    out += '\n';
  }
  return out;
}

void write_trajectory_csv(const Trajectory &traj,
                          const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write '" + path.string() + "'");
  out << format_trajectory_csv(traj);
}

} // namespace pcmforge::simulate
