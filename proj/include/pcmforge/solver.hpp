//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef PCMFORGE_SOLVER_HPP_
#define PCMFORGE_SOLVER_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pcmforge/nlp.hpp"
#include "pcmforge/objective.hpp"
#include "pcmforge/scenario.hpp"
#include "pcmforge/transcription.hpp"

namespace pcmforge::solver {

struct SolveOptions {
  long long max_fun_evals = 1'000'000; ///< per start
  long long max_iter = 300'000;        ///< inner iterations per start
  double step_tol = 1e-6;              ///< outer step, scaled units
  double constraint_tol = 1e-6;        ///< scaled constraint rows
  int n_starts = 8;
  std::uint64_t seed = 1;

  double penalty_init = 10.0;
  double penalty_growth = 10.0;
  double penalty_max = 1e12;
  /// Inner tolerance schedule: the k-th outer iteration solves its
  /// subproblem to projected-gradient norm
  /// max(inner_tol_init * inner_tol_decay^k, inner_tol_floor).
  double inner_tol_init = 1e-2;
  double inner_tol_decay = 0.1;
  double inner_tol_floor = 1e-9;
  int max_outer = 60;
  int memory = 10;
  /// Worker threads for the multi-start; 0 uses the hardware concurrency.
  int threads = 0;

  void validate() const;
  static SolveOptions from_settings(const scenario::SolverSettings &s);
};

enum class SolveStatus { kOptimal, kFeasibleStalled, kInfeasible, kEvalFailure };
const char *to_string(SolveStatus status);

/// One accepted (or rejected) outer iteration of the augmented Lagrangian.
struct OuterLogEntry {
  int iteration = 0;
  double objective = 0.0;     ///< model objective (scaled)
  double max_violation = 0.0; ///< max |c|, max(-g, 0) over all rows
  double penalty = 0.0;       ///< penalty used for this subproblem
  double step_norm = 0.0;     ///< |x_k - x_{k-1}|_inf
  double inner_tol = 0.0;
  long inner_iterations = 0;
  bool accepted = true;
};

struct StartResult {
  int start = 0;
  SolveStatus status = SolveStatus::kEvalFailure;
  Eigen::VectorXd x;
  double objective = 0.0;
  double max_eq_residual = 0.0;
  double max_ineq_violation = 0.0;
  double optimality = 0.0;
  long long iterations = 0;
  long long evaluations = 0;
  std::string message;
  std::vector<OuterLogEntry> log;

  double max_violation() const {
    return std::max(max_eq_residual, max_ineq_violation);
  }
};

struct SolveResult {
  SolveStatus status = SolveStatus::kEvalFailure;
  Eigen::VectorXd x;            ///< z_star, scaled
  double objective = 0.0;       ///< model objective at x
  double max_eq_residual = 0.0; ///< from a fresh evaluation at x
  double max_ineq_violation = 0.0;
  double optimality = 0.0; ///< projected Lagrangian gradient norm
  long long iterations = 0;  ///< summed over starts
  long long evaluations = 0; ///< summed over starts
  int best_start = -1;
  std::vector<StartResult> starts; ///< in start-index order
  /// Filled by the NlpProblem overload.
  std::optional<objective::ObjectiveBreakdown> breakdown;

  double max_violation() const {
    return std::max(max_eq_residual, max_ineq_violation);
  }
};

/// Multi-start augmented Lagrangian. Equalities and inequalities
/// (converted to equalities with nonnegative slacks in the bound set)
/// are handled by the outer loop; each subproblem is a bound-constrained
/// quasi-Newton solve. Starts run concurrently; the reduction picks the
/// lowest objective among feasible starts (lowest index on ties), else the
/// least infeasible start.
SolveResult solve(const nlp::Model &model, const SolveOptions &options);

/// Same as above, plus the physical objective breakdown of the winner.
SolveResult solve(const transcription::NlpProblem &problem,
                  const SolveOptions &options);

/// Runs a single start from x0.
StartResult solve_from(const nlp::Model &model, const Eigen::VectorXd &x0,
                       const SolveOptions &options, int start_index = 0);

struct Diagnostics {
  double max_eq_residual = 0.0;
  double max_ineq_violation = 0.0;
  double transcription_objective = 0.0; ///< J_tot of the decoded z
  double simulated_objective = 0.0;     ///< J_tot of a fresh rollout
  double objective_gap = 0.0;           ///< relative, max(1, |J|) scaled
  double max_state_gap = 0.0;           ///< max |E_z - E_sim| [J]
  double max_slack_discrepancy = 0.0;   ///< max |s - violation|, scaled
  bool resimulated = false;
  std::string message; ///< set when the rollout could not be evaluated
};

/// Recomputes residuals at result.x, re-simulates the decoded design and
/// controls, and reports the gaps. Never throws on numerical trouble.
Diagnostics verify(const transcription::NlpProblem &problem,
                   const SolveResult &result);

/// One line per outer iteration of every start.
std::string format_solve_log(const SolveResult &result);
std::string format_start_log(const StartResult &start);

/// Canonical JSON of the result (exact round-trip doubles).
std::string to_json(const SolveResult &result);

} // namespace pcmforge::solver

#endif // PCMFORGE_SOLVER_HPP_
