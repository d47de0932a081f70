//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef PCMFORGE_TRANSCRIPTION_HPP_
#define PCMFORGE_TRANSCRIPTION_HPP_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "pcmforge/nlp.hpp"
#include "pcmforge/objective.hpp"
#include "pcmforge/scenario.hpp"
#include "pcmforge/simulate.hpp"

namespace pcmforge::transcription {

/// Positions of every variable block inside the decision vector. A block
/// the control policy fixes has offset -1 and length 0.
struct Layout {
  int C_pcm = 0;
  int T_m = 1;
  int Q_hx = -1;
  int v1 = -1;
  int v2 = -1;
  int E_d = -1;
  int E_pcm = -1;
  int s_d = -1;
  int s_pcm = -1;
  int intervals = 0;
  int knots = 0;
  int n_vars = 0;

  struct Block {
    std::string name;
    int offset = -1;
    int length = 0;
  };
  /// Blocks in storage order; fixed blocks are omitted.
  std::vector<Block> blocks() const;
  /// "E_d[12]", "C_pcm", ...
  std::string variable_name(int index) const;
};

enum class DerivativeMode {
  kAnalytic,         ///< chain rule through the coolant adjoint solves
  kFiniteDifference, ///< central differences on the value path
};

struct Options {
  DerivativeMode derivatives = DerivativeMode::kAnalytic;
};

/// Decoded decision vector in physical units.
struct Decoded {
  plant::PcmDesign design;
  simulate::ControlSequence controls;
  simulate::Trajectory trajectory; ///< states and slacks taken from z
};

/// The direct transcription of the design + control problem.
///
/// Decision vector (scaled): C_pcm, T_m, then the optimized control blocks
/// Q_hx[N-1], v1[N-1], v2[N-1], then E_d[N], E_pcm[N], s_d[N], s_pcm[N].
/// Equalities: the two initial conditions followed by the device and PCM
/// forward-Euler defects of each interval (interleaved). Inequalities
/// (>= 0): four slack rows per knot,
///   E_d - E_d_lb + s_d,  E_d_ub + s_d - E_d,
///   E_pcm - lb*C_pcm + s_pcm,  ub*C_pcm + s_pcm - E_pcm.
/// T_d, SOC, P_d and P_pcm are eliminated through the plant model.
class NlpProblem final : public nlp::Model {
public:
  static NlpProblem assemble(const scenario::Scenario &s,
                             const Options &options = {});

  int num_variables() const override { return layout_.n_vars; }
  int num_equalities() const override { return 2 * layout_.knots; }
  int num_inequalities() const override { return 4 * layout_.knots; }
  const Eigen::VectorXd &lower() const override { return lower_; }
  const Eigen::VectorXd &upper() const override { return upper_; }

  void evaluate(const Eigen::VectorXd &z, nlp::EvalPoint &out,
                bool derivatives) const override;

  /// Samples design and free controls uniformly in their bounds, then rolls
  /// them out so the start satisfies the dynamics exactly. Slacks start at
  /// the exact violations.
  Eigen::VectorXd initial_point(std::uint64_t seed, int start) const override;
  /// Tightens the slacks (see tighten_slacks).
  Eigen::VectorXd finalize(const Eigen::VectorXd &z) const override {
    return tighten_slacks(z);
  }

  const Layout &layout() const { return layout_; }
  const scenario::Scenario &scenario() const { return scenario_; }
  /// z_scaled = z_physical .* scale
  const Eigen::VectorXd &scale() const { return scale_; }
  /// Multiplies J_tot to form the solver objective.
  double objective_scale() const { return objective_scale_; }
  /// Multiplies every constraint row (all rows are energies in J).
  double constraint_scale() const { return constraint_scale_; }

  /// Encodes a design, controls and trajectory (typically a rollout).
  Eigen::VectorXd encode(const plant::PcmDesign &design,
                         const simulate::ControlSequence &controls,
                         const simulate::Trajectory &traj) const;
  Decoded decode(const Eigen::VectorXd &z) const;

  /// Objective breakdown of the decoded trajectory, in physical units.
  objective::ObjectiveBreakdown breakdown(const Eigen::VectorXd &z) const;

  /// Lowers every slack to the exact bound violation of its state. Keeps
  /// the slack rows feasible and never increases the objective.
  Eigen::VectorXd tighten_slacks(const Eigen::VectorXd &z) const;

  /// JSON description of the layout, bounds and constraint counts.
  std::string dump_json() const;

private:
  NlpProblem() = default;

  void evaluate_analytic(const Eigen::VectorXd &z, nlp::EvalPoint &out,
                         bool derivatives) const;

  scenario::Scenario scenario_;
  Options options_;
  Layout layout_;
  Eigen::VectorXd lower_, upper_, scale_;
  double objective_scale_ = 1.0;
  double constraint_scale_ = 1e-5;
};

} // namespace pcmforge::transcription

#endif // PCMFORGE_TRANSCRIPTION_HPP_
