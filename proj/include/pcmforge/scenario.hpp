//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef PCMFORGE_SCENARIO_HPP_
#define PCMFORGE_SCENARIO_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "pcmforge/plant.hpp"

namespace pcmforge::scenario {

/// Irradiance and ambient temperature sampled on a uniform grid of knots.
/// Values are held constant over each interval [t_k, t_k+1).
struct DisturbanceProfile {
  double t0 = 0.0; ///< time of the first knot [s], informational
  double dt = 0.0;
  std::vector<double> G;     ///< [W/m^2]
  std::vector<double> T_inf; ///< [degC]

  std::size_t knots() const { return G.size(); }
  double horizon() const { return dt * static_cast<double>(knots() - 1); }
  void validate() const;
};

struct Bounds {
  double E_d_lb = 0.0, E_d_ub = 0.0;
  /// PCM energy bounds as fractions of C_pcm, which is itself optimized.
  double E_pcm_lb_frac = 0.0, E_pcm_ub_frac = 1.0;
  double v_lb = 0.0, v_ub = 1.0;
  double Q_hx_lb = 0.0, Q_hx_ub = 0.0;
  double C_pcm_lb = 0.0, C_pcm_ub = 0.0;
  double T_m_lb = 0.0, T_m_ub = 0.0;

  void validate() const;
};

struct Weights {
  double w_d = 1.0, w_s = 1.0;
  double n = 1.0;
  double w_ie = 1.0, w_ce = 1.0, w_cv_d = 1.0, w_cv_p = 1.0;
  double w_m = 1.0, w_nom = 0.0;

  void validate() const;
};

/// Nominal PCM power and duration entering the static J_nom term.
struct NominalDuty {
  double P_pcm_nom = 0.0; ///< [W]
  double t_nom = 0.0;     ///< [s]
};

struct InitialCondition {
  double E_d = 0.0; ///< device energy [J]
  double soc = 0.0; ///< PCM state of charge; E_pcm = soc * C_pcm
};

enum class PolicyKind {
  kAllFixed,       ///< valves and Q_hx fixed (passive studies, simulation)
  kFixedValves,    ///< valves fixed, Q_hx optimized
  kFullyOptimized, ///< Q_hx, v1 and v2 optimized at every interval
};

struct ControlPolicy {
  PolicyKind kind = PolicyKind::kAllFixed;
  double v1 = 0.0;   ///< used unless kFullyOptimized
  double v2 = 0.0;   ///< used unless kFullyOptimized
  double Q_hx = 0.0; ///< used only by kAllFixed

  bool optimizes_q_hx() const { return kind != PolicyKind::kAllFixed; }
  bool optimizes_valves() const { return kind == PolicyKind::kFullyOptimized; }
};

struct Scenario {
  plant::PlantParams params;
  DisturbanceProfile profile;
  Bounds bounds;
  Weights weights;
  NominalDuty nominal;
  InitialCondition initial;
  ControlPolicy policy;
  /// Design used by plain simulation; also the nominal point for scaling.
  plant::PcmDesign design;

  void validate() const;
};

const char *to_string(PolicyKind kind);
PolicyKind policy_from_string(const std::string &name);

/// The PV case study: plant constants, bounds, unit internal weights
/// (w_nom = 0), n = 1, T_d(0) = 35 degC, SOC(0) = 0.5 and the default
/// synthetic peak-hour profile. Valves default to the passive
/// configuration v1 = 0, v2 = 1 with Q_hx = 0.
Scenario default_case_study();

struct SyntheticProfileSpec {
  double duration_s = 3600.0;
  double dt = 60.0;
  double G_base = 950.0;
  double G_drop = 350.0;
  double drop_start = 3000.0;
  double drop_end = 3600.0;
  double T_inf_base = 33.0;
};

/// Piecewise-constant irradiance at G_base, G_drop inside
/// [drop_start, drop_end], constant ambient. N = duration/dt + 1.
DisturbanceProfile synth_profile(const SyntheticProfileSpec &spec);

/// Reads `t_s,G_wm2,T_inf_c` rows with a uniform timestep.
DisturbanceProfile load_profile_csv(const std::filesystem::path &path);
DisturbanceProfile parse_profile_csv(const std::string &text);

/// Canonical form: header line, shortest round-trip decimal, LF endings.
std::string format_profile_csv(const DisturbanceProfile &profile);
void write_profile_csv(const DisturbanceProfile &profile,
                       const std::filesystem::path &path);

// Scenario configuration files.
//
// Line-oriented `key = value` pairs, `#` starts a comment. Keys mirror the
// structure fields (`params.C_d`, `bounds.Q_hx_ub`, `weights.w_s`, ...).
// `schema_version = 1` is mandatory; every other key defaults to
// default_case_study(). The profile is either `profile.source = synthetic`
// with `profile.duration_s`, `profile.dt`, `profile.G_base`,
// `profile.G_drop`, `profile.drop_start`, `profile.drop_end`,
// `profile.T_inf_base`, or `profile.source = csv` with `profile.path`
// (relative paths resolve against the config file's directory).

inline constexpr int kConfigSchemaVersion = 1;

/// Solver settings carried by a config file (all optional).
struct SolverSettings {
  long long max_fun_evals = 1'000'000;
  long long max_iter = 300'000;
  double step_tol = 1e-6;
  double constraint_tol = 1e-6;
  int n_starts = 8;
  unsigned long long seed = 1;
};

struct ScenarioConfig {
  Scenario scenario;
  SolverSettings solver;
};

ScenarioConfig parse_scenario_config(const std::string &text,
                                     const std::filesystem::path &base_dir);
ScenarioConfig load_scenario_config(const std::filesystem::path &path);

/// Writes a config that reproduces `config` exactly. The profile is written
/// as a reference to `profile_csv` (relative to the config's directory).
std::string format_scenario_config(const ScenarioConfig &config,
                                   const std::string &profile_csv);

} // namespace pcmforge::scenario

#endif // PCMFORGE_SCENARIO_HPP_
