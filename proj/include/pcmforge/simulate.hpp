//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef PCMFORGE_SIMULATE_HPP_
#define PCMFORGE_SIMULATE_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "pcmforge/plant.hpp"
#include "pcmforge/scenario.hpp"

namespace pcmforge::simulate {

/// One control value per interval (N - 1 entries each).
struct ControlSequence {
  std::vector<double> Q_hx;
  std::vector<double> v1;
  std::vector<double> v2;

  std::size_t intervals() const { return Q_hx.size(); }
  static ControlSequence constant(std::size_t intervals, double Q_hx,
                                  double v1, double v2);
  /// Throws DomainError when lengths differ or a value leaves its bounds.
  void validate(const scenario::Bounds &bounds, std::size_t intervals) const;
};

/// The controls a scenario prescribes when its policy fixes them.
ControlSequence policy_controls(const scenario::Scenario &s);

struct State {
  double E_d = 0.0;
  double E_pcm = 0.0;
};

struct KnotControl {
  double Q_hx = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
};

struct KnotDisturbance {
  double G = 0.0;
  double T_inf = 0.0;
};

/// Everything recorded at one knot.
struct KnotRecord {
  double t = 0.0;
  double E_d = 0.0, E_pcm = 0.0;
  double T_d = 0.0, soc = 0.0;
  double P_d = 0.0, P_pcm = 0.0, Q_hx = 0.0, Q_in = 0.0, Q_out = 0.0;
  double s_d = 0.0, s_pcm = 0.0;
  plant::CoolantState coolant;
  double v1 = 0.0, v2 = 0.0;
};

struct Trajectory {
  double dt = 0.0;
  plant::PcmDesign design;
  std::vector<KnotRecord> knots;

  std::size_t size() const { return knots.size(); }
  double horizon() const {
    return dt * static_cast<double>(knots.size() - 1);
  }
};

/// Algebraic quantities of one knot: boundary heat and coolant solve.
struct KnotFlows {
  plant::HeatFlows flows;
  plant::CoolantState coolant;
};

KnotFlows evaluate_knot(const plant::PlantParams &params,
                        const plant::PcmDesign &design, double E_d,
                        const KnotControl &u, const KnotDisturbance &w);

/// Forward-Euler energy updates. Shared with the transcription defects so
/// both agree to the last bit.
inline double advance_device(double E_d, double dt,
                             const plant::HeatFlows &f) {
  return E_d + dt * (f.Q_in - f.Q_out - f.P_d);
}
inline double advance_pcm(double E_pcm, double dt, const plant::HeatFlows &f) {
  return E_pcm + dt * f.P_pcm;
}

/// Distance from `value` to [lb, ub].
inline double violation(double value, double lb, double ub) {
  if (value > ub)
    return value - ub;
  if (value < lb)
    return lb - value;
  return 0.0;
}

State step(const scenario::Scenario &s, const plant::PcmDesign &design,
           const State &x, const KnotControl &u, const KnotDisturbance &w);

struct RolloutOptions {
  /// Clamp E_pcm to [0, C_pcm] after every step. The clipped energy is
  /// discarded, so this mode is for plotting only.
  bool clamp_soc = false;
};

/// Marches from the scenario's initial condition. The record at the last
/// knot reuses the last interval's controls and disturbance.
Trajectory rollout(const scenario::Scenario &s, const plant::PcmDesign &design,
                   const ControlSequence &controls,
                   const RolloutOptions &options = {});

std::string format_trajectory_csv(const Trajectory &traj);
void write_trajectory_csv(const Trajectory &traj,
                          const std::filesystem::path &path);

} // namespace pcmforge::simulate

#endif // PCMFORGE_SIMULATE_HPP_
