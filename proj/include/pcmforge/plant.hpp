//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef PCMFORGE_PLANT_HPP_
#define PCMFORGE_PLANT_HPP_

#include <array>

namespace pcmforge::plant {

/// Physical constants of the hybrid PCM / heat-exchanger cooling loop.
///
/// Temperatures are in degrees Celsius throughout; only differences enter
/// the balances.
struct PlantParams {
  double C_d = 0.0;     ///< device thermal capacitance [J/degC]
  double hA_dc = 0.0;   ///< device <-> coolant conductance [W/degC]
  double hA_cpcm = 0.0; ///< coolant <-> PCM conductance [W/degC]
  double m_dot_d = 0.0; ///< coolant mass flow through the device branch [kg/s]
  double c_p = 0.0;     ///< coolant specific heat [J/kg/degC]
  double alpha = 0.0;   ///< absorptivity of the PV surface [-]
  double A_s = 0.0;     ///< PV surface area [m^2]
  double h_inf = 0.0;   ///< ambient convection coefficient [W/m^2/degC]
  double eta_pv = 0.0;  ///< electrical conversion efficiency [-]

  /// Throws DomainError naming the first offending field.
  void validate() const;
};

/// Static PCM design: latent capacity and melting temperature.
struct PcmDesign {
  double C_pcm = 0.0; ///< latent storage capacity [J]
  double T_m = 0.0;   ///< melting temperature [degC]

  static PcmDesign from_mass(double mass_kg, double latent_heat_j_per_kg,
                             double T_m);
  void validate() const;
};

struct ValveCommand {
  double v1 = 0.0;
  double v2 = 0.0;

  void validate() const;
};

/// Branch mass flows [kg/s] implied by a valve command.
struct FlowSplit {
  double m_hx = 0.0;
  double m_pcm = 0.0;
  double m_1 = 0.0;
  double m_2 = 0.0;
  double m_3 = 0.0;
};

/// Coolant temperatures [degC] at junction 1, the device, the heat
/// exchanger outlet, junction 2 and the PCM.
struct CoolantState {
  double T_c_j1 = 0.0;
  double T_c_d = 0.0;
  double T_c_hx = 0.0;
  double T_c_j2 = 0.0;
  double T_c_pcm = 0.0;

  std::array<double, 5> as_array() const {
    return {T_c_j1, T_c_d, T_c_hx, T_c_j2, T_c_pcm};
  }
};

/// The power terms of one knot [W].
struct HeatFlows {
  double P_d = 0.0;   ///< device -> coolant
  double P_pcm = 0.0; ///< coolant -> PCM
  double Q_hx = 0.0;  ///< rejected to the environment
  double Q_in = 0.0;  ///< boundary heat into the device
  double Q_out = 0.0; ///< non-coolant heat leaving the device
};

struct CoolantSolution {
  CoolantState state;
  HeatFlows flows; ///< P_d, P_pcm, Q_hx populated; Q_in/Q_out left zero
};

/// Inputs the coolant powers depend on, in the order used by
/// PowerSensitivity gradients.
enum SensitivityIndex : int { kTd = 0, kTm, kQhx, kV1, kV2, kNumInputs };

/// P_d and P_pcm together with their partial derivatives with respect to
/// (T_d, T_m, Q_hx, v1, v2).
struct PowerSensitivity {
  CoolantSolution solution;
  std::array<double, kNumInputs> dP_d{};
  std::array<double, kNumInputs> dP_pcm{};
};

FlowSplit flow_split(const ValveCommand &v, double m_dot_d);

/// d(flow)/d(v1) and d(flow)/d(v2) for every branch.
struct FlowSplitDerivative {
  FlowSplit d_v1;
  FlowSplit d_v2;
};
FlowSplitDerivative flow_split_derivative(const ValveCommand &v,
                                          double m_dot_d);

/// Solves the five zero-capacitance coolant balances for the coolant
/// temperatures at a fixed device temperature and valve command.
///
/// The balances are linear in the temperatures once the flows are fixed and
/// are solved as one 5x5 system with partial pivoting. A branch without flow
/// is replaced by a pass-through row: T_c_hx := T_c_d when m_hx = 0 (then
/// Q_hx must be zero, otherwise InfeasibleError), T_c_pcm := T_c_j2 := T_m
/// when m_pcm = 0.
CoolantSolution solve_coolant(const PlantParams &params,
                              const PcmDesign &design, double T_d,
                              const ValveCommand &v, double Q_hx);

/// solve_coolant plus gradients of P_d and P_pcm obtained with two adjoint
/// solves of the same factorization.
PowerSensitivity coolant_sensitivity(const PlantParams &params,
                                     const PcmDesign &design, double T_d,
                                     const ValveCommand &v, double Q_hx);

struct BoundaryHeat {
  double Q_in = 0.0;
  double Q_out = 0.0;
};

/// Absorbed irradiance and the convective + electrical losses of the PV
/// surface. The electrical share is eta_pv * Q_in.
BoundaryHeat pv_boundary(const PlantParams &params, double G, double T_inf,
                         double T_d);

/// dQ_out/dT_d.
inline double pv_boundary_dTd(const PlantParams &params) {
  return params.h_inf * params.A_s;
}

inline double device_temperature(const PlantParams &params, double E_d) {
  return E_d / params.C_d;
}
inline double device_energy(const PlantParams &params, double T_d) {
  return params.C_d * T_d;
}
inline double state_of_charge(const PcmDesign &design, double E_pcm) {
  return E_pcm / design.C_pcm;
}
inline double pcm_energy(const PcmDesign &design, double soc) {
  return design.C_pcm * soc;
}

} // namespace pcmforge::plant

#endif // PCMFORGE_PLANT_HPP_
