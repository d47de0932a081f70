//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "pcmforge/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include <json.hpp>

#include "pcmforge/bound_qn.hpp"
#include "pcmforge/errors.hpp"
#include "pcmforge/simulate.hpp"

namespace pcmforge::solver {
namespace {
  constexpr double kInf = std::numeric_limits<double>::infinity();

  /// Augmented Lagrangian of
  ///   min f(x)  s.t.  c(x) = 0,  g(x) - w = 0,  bounds,  w >= 0
  /// over y = [x; w].
  class Lagrangian {
  public:
    explicit Lagrangian(const nlp::Model &m)
        : model_(m), n_(m.num_variables()), m_eq_(m.num_equalities()),
          m_in_(m.num_inequalities()) {
      lower_.resize(n_ + m_in_);
      upper_.resize(n_ + m_in_);
      lower_ << m.lower(), Eigen::VectorXd::Zero(m_in_);
      upper_ << m.upper(), Eigen::VectorXd::Constant(m_in_, kInf);
      lambda_ = Eigen::VectorXd::Zero(m_eq_ + m_in_);
    }

    int n() const { return n_; }
    const Eigen::VectorXd &lower() const { return lower_; }
    const Eigen::VectorXd &upper() const { return upper_; }
    Eigen::VectorXd &lambda() { return lambda_; }

    /// Residual vector h(y) = [c; g - w] from an evaluation at x.
    Eigen::VectorXd residual(const nlp::EvalPoint &ep,
                             const Eigen::VectorXd &y) const {
      Eigen::VectorXd h(m_eq_ + m_in_);
      h << ep.eq, ep.ineq - y.tail(m_in_);
      return h;
    }

    Eigen::VectorXd lift(const Eigen::VectorXd &x,
                         const nlp::EvalPoint &ep) const {
      Eigen::VectorXd y(n_ + m_in_);
      y << x, ep.ineq.cwiseMax(0.0);
      return y;
    }

    /// Value and gradient for multipliers `lam` and penalty `mu`.
    double value(const Eigen::VectorXd &y, Eigen::VectorXd &grad,
                 const Eigen::VectorXd &lam, double mu,
                 nlp::EvalPoint &ep) const {
      model_.evaluate(y.head(n_), ep, true);
      const Eigen::VectorXd h = residual(ep, y);
      const Eigen::VectorXd r = lam + mu * h;
      grad.resize(n_ + m_in_);
      grad.head(n_) = ep.gradient;
      grad.head(n_) += nlp::transpose_times(ep.jac_eq, r.head(m_eq_), n_);
      grad.head(n_) += nlp::transpose_times(ep.jac_ineq, r.tail(m_in_), n_);
      grad.tail(m_in_) = -r.tail(m_in_);
      const double f = ep.objective + lam.dot(h) + 0.5 * mu * h.squaredNorm();
      if (!std::isfinite(f))
        throw nlp::EvalFailure("non-finite augmented Lagrangian");
      return f;
    }

  private:
    const nlp::Model &model_;
    int n_, m_eq_, m_in_;
    Eigen::VectorXd lower_, upper_, lambda_;
  };

  double inf_norm(const Eigen::VectorXd &v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
  }

  double ineq_violation(const Eigen::VectorXd &g) {
    return g.size() == 0 ? 0.0 : std::max(0.0, -g.minCoeff());
  }

  bool is_feasible(const StartResult &r, double tol) {
    return r.status != SolveStatus::kEvalFailure && r.max_violation() <= tol;
  }

  std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9e", v);
    return buf;
  }
} // namespace

void SolveOptions::validate() const {
  if (!(step_tol > 0.0) || !(constraint_tol > 0.0))
    throw DomainError("solver tolerances must be positive");
  if (n_starts < 1)
    throw DomainError("n_starts must be at least 1");
  if (max_fun_evals < 1 || max_iter < 1 || max_outer < 1)
    throw DomainError("solver limits must be positive");
  if (!(penalty_init > 0.0) || !(penalty_growth > 1.0) ||
      !(penalty_max >= penalty_init))
    throw DomainError("penalty_init > 0, penalty_growth > 1 and "
                      "penalty_max >= penalty_init are required");
  if (!(inner_tol_init > 0.0) || !(inner_tol_decay > 0.0) ||
      !(inner_tol_decay <= 1.0) || !(inner_tol_floor > 0.0))
    throw DomainError("invalid inner tolerance schedule");
  if (memory < 1)
    throw DomainError("quasi-Newton memory must be at least 1");
  if (threads < 0)
    throw DomainError("threads must be nonnegative");
}

SolveOptions SolveOptions::from_settings(const scenario::SolverSettings &s) {
  SolveOptions o;
  o.max_fun_evals = s.max_fun_evals;
  o.max_iter = s.max_iter;
  o.step_tol = s.step_tol;
  o.constraint_tol = s.constraint_tol;
  o.n_starts = s.n_starts;
  o.seed = s.seed;
  return o;
}

const char *to_string(SolveStatus status) {
  switch (status) {
  case SolveStatus::kOptimal:
    return "optimal";
  case SolveStatus::kFeasibleStalled:
    return "feasible-stalled";
  case SolveStatus::kInfeasible:
    return "infeasible";
  case SolveStatus::kEvalFailure:
    return "eval-failure";
  }
  return "unknown";
}

StartResult solve_from(const nlp::Model &model, const Eigen::VectorXd &x0,
                       const SolveOptions &opt, int start_index) {
  StartResult res;
  res.start = start_index;
  const int n = model.num_variables();
  if (x0.size() != n)
    throw DomainError("initial point has the wrong length");

  Lagrangian al(model);
  nlp::EvalPoint ep;
  Eigen::VectorXd y;
  try {
    const Eigen::VectorXd x = x0.cwiseMax(model.lower()).cwiseMin(model.upper());
    model.evaluate(x, ep, false);
    ++res.evaluations;
    y = al.lift(x, ep);
  } catch (const std::exception &e) {
    res.status = SolveStatus::kEvalFailure;
    res.message = std::string("initial point: ") + e.what();
    res.x = x0;
    return res;
  }

  double mu = opt.penalty_init;
  double prev_viol = inf_norm(al.residual(ep, y));
  Eigen::VectorXd y_acc = y;
  Eigen::VectorXd y_start = y;
  int accepted_count = 0;
  std::string stop_reason = "outer iteration limit";

  for (int outer = 0; outer < opt.max_outer; ++outer) {
    const double omega =
        std::max(opt.inner_tol_init * std::pow(opt.inner_tol_decay,
                                               accepted_count),
                 opt.inner_tol_floor);
    const Eigen::VectorXd lam = al.lambda();
    ObjectiveFn fn = [&](const Eigen::VectorXd &yy, Eigen::VectorXd &g) {
      nlp::EvalPoint tmp;
      return al.value(yy, g, lam, mu, tmp);
    };
    BoundQnOptions qn;
    qn.memory = opt.memory;
    qn.pg_tol = omega;
    qn.max_iter = std::max<long long>(1, opt.max_iter - res.iterations);
    qn.max_evals = std::max<long long>(1, opt.max_fun_evals - res.evaluations);

    BoundQnResult inner;
    try {
      inner = minimize_bound_qn(fn, y_start, al.lower(), al.upper(), qn);
    } catch (const std::exception &e) {
      // Only the first evaluation can escape the line search.
      res.status = SolveStatus::kEvalFailure;
      res.message = std::string("subproblem start: ") + e.what();
      res.x = y_acc.head(n);
      return res;
    }
    res.iterations += inner.iterations;
    res.evaluations += inner.evaluations;

    model.evaluate(inner.x.head(n), ep, false);
    ++res.evaluations;
    const Eigen::VectorXd h = al.residual(ep, inner.x);
    const double viol = inf_norm(h);

    OuterLogEntry entry;
    entry.iteration = outer;
    entry.objective = ep.objective;
    entry.max_violation = viol;
    entry.penalty = mu;
    entry.step_norm = inf_norm(inner.x - y_acc);
    entry.inner_tol = omega;
    entry.inner_iterations = inner.iterations;

    // Monotone safeguard: an iterate that raises the violation by more
    // than the inner tolerance is rejected and the penalty raised.
    if (viol > prev_viol + omega) {
      entry.accepted = false;
      res.log.push_back(entry);
      y_start = inner.x;
      if (mu >= opt.penalty_max) {
        stop_reason = "penalty limit";
        break;
      }
      mu = std::min(mu * opt.penalty_growth, opt.penalty_max);
      if (res.evaluations >= opt.max_fun_evals ||
          res.iterations >= opt.max_iter) {
        stop_reason = "evaluation or iteration limit";
        break;
      }
      continue;
    }

    res.log.push_back(entry);
    ++accepted_count;
    y_acc = inner.x;
    y_start = inner.x;
    al.lambda() += mu * h;
    const double step = entry.step_norm;
    const bool feasible = viol <= opt.constraint_tol;
    const double stationarity = inner.pg_norm;

    if (feasible && stationarity <= opt.constraint_tol) {
      stop_reason = "converged";
      break;
    }
    // A small step only means stagnation once the subproblems are solved
    // as tightly as the stationarity test requires.
    if (feasible && step <= opt.step_tol && outer > 0 &&
        omega <= opt.constraint_tol) {
      stop_reason = "step below tolerance";
      break;
    }
    if (res.evaluations >= opt.max_fun_evals ||
        res.iterations >= opt.max_iter) {
      stop_reason = "evaluation or iteration limit";
      break;
    }
    if (!feasible && viol > 0.25 * prev_viol) {
      if (mu >= opt.penalty_max && step <= opt.step_tol) {
        stop_reason = "penalty limit";
        break;
      }
      mu = std::min(mu * opt.penalty_growth, opt.penalty_max);
    }
    prev_viol = viol;
  }

  // Final point: model post-processing, then a fresh evaluation.
  try {
    res.x = model.finalize(y_acc.head(n));
    model.evaluate(res.x, ep, true);
    ++res.evaluations;
  } catch (const std::exception &e) {
    res.status = SolveStatus::kEvalFailure;
    res.message = std::string("final point: ") + e.what();
    res.x = y_acc.head(n);
    return res;
  }
  res.objective = ep.objective;
  res.max_eq_residual = inf_norm(ep.eq);
  res.max_ineq_violation = ineq_violation(ep.ineq);
  {
    const Eigen::VectorXd yf = al.lift(res.x, ep);
    Eigen::VectorXd grad;
    nlp::EvalPoint tmp;
    al.value(yf, grad, al.lambda(), 0.0, tmp);
    res.optimality =
        projected_gradient_norm(yf, grad, al.lower(), al.upper());
  }
  res.message = stop_reason;
  if (res.max_violation() > opt.constraint_tol)
    res.status = SolveStatus::kInfeasible;
  else if (res.optimality <= opt.constraint_tol)
    res.status = SolveStatus::kOptimal;
  else
    res.status = SolveStatus::kFeasibleStalled;
  return res;
}

SolveResult solve(const nlp::Model &model, const SolveOptions &opt) {
  opt.validate();
  std::vector<StartResult> starts(opt.n_starts);

  auto run = [&](int k) {
    try {
      const Eigen::VectorXd x0 = model.initial_point(opt.seed, k);
      starts[k] = solve_from(model, x0, opt, k);
    } catch (const std::exception &e) {
      starts[k] = StartResult{};
      starts[k].start = k;
      starts[k].status = SolveStatus::kEvalFailure;
      starts[k].message = e.what();
    }
  };

  int workers = opt.threads > 0
                    ? opt.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, opt.n_starts);
  if (workers == 1) {
    for (int k = 0; k < opt.n_starts; ++k)
      run(k);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (int k = next++; k < opt.n_starts; k = next++)
          run(k);
      });
    }
    for (auto &th : pool)
      th.join();
  }

  // Deterministic reduction in start order; strict comparisons keep the
  // lowest index on ties.
  SolveResult out;
  int best = -1;
  for (int k = 0; k < opt.n_starts; ++k) {
    const auto &s = starts[k];
    out.iterations += s.iterations;
    out.evaluations += s.evaluations;
    if (s.status == SolveStatus::kEvalFailure)
      continue;
    if (best < 0) {
      best = k;
      continue;
    }
    const auto &b = starts[best];
    const bool fs = is_feasible(s, opt.constraint_tol);
    const bool fb = is_feasible(b, opt.constraint_tol);
    if (fs && !fb)
      best = k;
    else if (fs && fb && s.objective < b.objective)
      best = k;
    else if (!fs && !fb && s.max_violation() < b.max_violation())
      best = k;
  }

  out.starts = std::move(starts);
  out.best_start = best;
  if (best < 0) {
    out.status = SolveStatus::kEvalFailure;
    return out;
  }
  const auto &w = out.starts[best];
  out.status = w.status;
  out.x = w.x;
  out.objective = w.objective;
  out.max_eq_residual = w.max_eq_residual;
  out.max_ineq_violation = w.max_ineq_violation;
  out.optimality = w.optimality;
  return out;
}

SolveResult solve(const transcription::NlpProblem &problem,
                  const SolveOptions &options) {
  SolveResult r = solve(static_cast<const nlp::Model &>(problem), options);
  if (r.status != SolveStatus::kEvalFailure) {
    try {
      r.breakdown = problem.breakdown(r.x);
    } catch (const std::exception &) {
      r.breakdown.reset();
    }
  }
  return r;
}

Diagnostics verify(const transcription::NlpProblem &problem,
                   const SolveResult &result) {
  Diagnostics d;
  if (result.x.size() != problem.num_variables()) {
    d.message = "result has no decision vector";
    return d;
  }
  try {
    nlp::EvalPoint ep;
    problem.evaluate(result.x, ep, false);
    d.max_eq_residual = inf_norm(ep.eq);
    d.max_ineq_violation = ineq_violation(ep.ineq);
  } catch (const std::exception &e) {
    d.message = std::string("evaluation: ") + e.what();
    return d;
  }

  const auto &s = problem.scenario();
  const auto &b = s.bounds;
  try {
    const auto dec = problem.decode(result.x);
    for (const auto &r : dec.trajectory.knots) {
      const double vd = simulate::violation(r.E_d, b.E_d_lb, b.E_d_ub);
      const double vp =
          simulate::violation(r.E_pcm, b.E_pcm_lb_frac * dec.design.C_pcm,
                              b.E_pcm_ub_frac * dec.design.C_pcm);
      d.max_slack_discrepancy =
          std::max({d.max_slack_discrepancy, std::abs(r.s_d - vd),
                    std::abs(r.s_pcm - vp)});
    }
    d.max_slack_discrepancy *= problem.constraint_scale();
    d.transcription_objective =
        objective::evaluate(dec.trajectory, s).J_tot;

    const auto sim = simulate::rollout(s, dec.design, dec.controls);
    d.simulated_objective = objective::evaluate(sim, s).J_tot;
    for (std::size_t k = 0; k < sim.size(); ++k) {
      const auto &a = sim.knots[k];
      const auto &z = dec.trajectory.knots[k];
      d.max_state_gap = std::max(
          {d.max_state_gap, std::abs(a.E_d - z.E_d), std::abs(a.E_pcm - z.E_pcm)});
    }
    d.objective_gap =
        std::abs(d.transcription_objective - d.simulated_objective) /
        std::max(1.0, std::abs(d.simulated_objective));
    d.resimulated = true;
  } catch (const std::exception &e) {
    d.message = std::string("re-simulation: ") + e.what();
  }
  return d;
}

std::string format_start_log(const StartResult &s) {
  std::string out;
  out += "start " + std::to_string(s.start) + " status=" +
         to_string(s.status) + " objective=" + fmt(s.objective) +
         " max_eq=" + fmt(s.max_eq_residual) +
         " max_ineq=" + fmt(s.max_ineq_violation) +
         " optimality=" + fmt(s.optimality) +
         " iterations=" + std::to_string(s.iterations) +
         " evaluations=" + std::to_string(s.evaluations) + " message=\"" +
         s.message + "\"\n";
  for (const auto &e : s.log) {
    out += "start " + std::to_string(s.start) + " outer " +
           std::to_string(e.iteration) + " objective=" + fmt(e.objective) +
           " max_violation=" + fmt(e.max_violation) +
           " penalty=" + fmt(e.penalty) + " step=" + fmt(e.step_norm) +
           " inner_tol=" + fmt(e.inner_tol) +
           " inner_iterations=" + std::to_string(e.inner_iterations) +
           (e.accepted ? " accepted" : " rejected") + "\n";
  }
  return out;
}

std::string format_solve_log(const SolveResult &r) {
  std::string out = "result status=" + std::string(to_string(r.status)) +
                    " best_start=" + std::to_string(r.best_start) +
                    " objective=" + fmt(r.objective) +
                    " max_eq=" + fmt(r.max_eq_residual) +
                    " max_ineq=" + fmt(r.max_ineq_violation) +
                    " optimality=" + fmt(r.optimality) + "\n";
  for (const auto &s : r.starts)
    out += format_start_log(s);
  return out;
}

std::string to_json(const SolveResult &r) {
  nlohmann::ordered_json j;
  j["status"] = to_string(r.status);
  j["best_start"] = r.best_start;
  j["objective"] = r.objective;
  j["max_eq_residual"] = r.max_eq_residual;
  j["max_ineq_violation"] = r.max_ineq_violation;
  j["optimality"] = r.optimality;
  j["iterations"] = r.iterations;
  j["evaluations"] = r.evaluations;
  if (r.breakdown) {
    const auto &b = *r.breakdown;
    j["objectives"] = {{"J_ie", b.J_ie},     {"J_ce", b.J_ce},
                       {"J_cv_d", b.J_cv_d}, {"J_cv_pcm", b.J_cv_pcm},
                       {"J_m", b.J_m},       {"J_nom", b.J_nom},
                       {"J_d", b.J_d},       {"J_s", b.J_s},
                       {"J_tot", b.J_tot}};
  }
  j["x"] = std::vector<double>(r.x.data(), r.x.data() + r.x.size());
  auto starts = nlohmann::ordered_json::array();
  for (const auto &s : r.starts) {
    starts.push_back({{"start", s.start},
                      {"status", to_string(s.status)},
                      {"objective", s.objective},
                      {"max_eq_residual", s.max_eq_residual},
                      {"max_ineq_violation", s.max_ineq_violation},
                      {"optimality", s.optimality},
                      {"iterations", s.iterations},
                      {"evaluations", s.evaluations},
                      {"outer_iterations", s.log.size()},
                      {"message", s.message}});
  }
  j["starts"] = starts;
  return j.dump(2) + "\n";
}

} // namespace pcmforge::solver
