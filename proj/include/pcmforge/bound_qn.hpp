//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef PCMFORGE_BOUND_QN_HPP_
#define PCMFORGE_BOUND_QN_HPP_

#include <functional>
#include <string>

#include <Eigen/Core>

namespace pcmforge::solver {

/// Objective with gradient. May throw nlp::EvalFailure, which the line
/// search treats as an infinite value.
using ObjectiveFn =
    std::function<double(const Eigen::VectorXd &x, Eigen::VectorXd &grad)>;

struct BoundQnOptions {
  int memory = 10;
  double pg_tol = 1e-6;     ///< stop when |P(x - g) - x|_inf <= pg_tol
  double step_tol = 1e-14;  ///< stop when |dx|_inf <= step_tol * (1 + |x|)
  long max_iter = 10000;
  long max_evals = 100000;
  double active_eps = 1e-3; ///< width of the epsilon-active bound band
};

struct BoundQnResult {
  Eigen::VectorXd x;
  Eigen::VectorXd grad;
  double f = 0.0;
  double pg_norm = 0.0;
  long iterations = 0;
  long evaluations = 0;
  bool converged = false;
  std::string reason;
};

/// Projected limited-memory BFGS for min f(x) s.t. lower <= x <= upper.
///
/// Free variables take the two-loop L-BFGS direction, variables within the
/// epsilon-active band take a diagonally scaled gradient step
/// (two-metric projection), and a projected Armijo backtracking search
/// keeps iterates feasible.
BoundQnResult minimize_bound_qn(const ObjectiveFn &fn,
                                const Eigen::VectorXd &x0,
                                const Eigen::VectorXd &lower,
                                const Eigen::VectorXd &upper,
                                const BoundQnOptions &options);

/// |P(x - g) - x|_inf, the first-order stationarity measure of a box
/// constrained problem.
double projected_gradient_norm(const Eigen::VectorXd &x,
                               const Eigen::VectorXd &g,
                               const Eigen::VectorXd &lower,
                               const Eigen::VectorXd &upper);

} // namespace pcmforge::solver

#endif // PCMFORGE_BOUND_QN_HPP_
