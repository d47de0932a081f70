//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "pcmforge/bound_qn.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "pcmforge/nlp.hpp"

namespace pcmforge::solver {
namespace {
  struct Pair {
    Eigen::VectorXd s, y;
    double rho;
  };

  Eigen::VectorXd project(const Eigen::VectorXd &x, const Eigen::VectorXd &lo,
                          const Eigen::VectorXd &hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
  }
} // namespace

double projected_gradient_norm(const Eigen::VectorXd &x,
                               const Eigen::VectorXd &g,
                               const Eigen::VectorXd &lower,
                               const Eigen::VectorXd &upper) {
  return (project(x - g, lower, upper) - x).cwiseAbs().maxCoeff();
}

BoundQnResult minimize_bound_qn(const ObjectiveFn &fn,
                                const Eigen::VectorXd &x0,
                                const Eigen::VectorXd &lower,
                                const Eigen::VectorXd &upper,
                                const BoundQnOptions &opt) {
  const Eigen::Index n = x0.size();
  BoundQnResult r;
  r.x = project(x0, lower, upper);
  r.grad.resize(n);
  r.f = fn(r.x, r.grad);
  r.evaluations = 1;

  std::deque<Pair> mem;
  Eigen::VectorXd g_new(n), x_new(n), d(n), q(n);
  std::vector<double> alpha_buf;
  std::vector<char> free_var(n);

  while (true) {
    r.pg_norm = projected_gradient_norm(r.x, r.grad, lower, upper);
    if (r.pg_norm <= opt.pg_tol) {
      r.converged = true;
      r.reason = "projected gradient below tolerance";
      return r;
    }
    if (r.iterations >= opt.max_iter) {
      r.reason = "iteration limit";
      return r;
    }
    if (r.evaluations >= opt.max_evals) {
      r.reason = "evaluation limit";
      return r;
    }

    // Epsilon-active set: close to a bound with the gradient pushing out.
    const double eps = std::min(opt.active_eps, r.pg_norm);
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lo = r.x[i] <= lower[i] + eps && r.grad[i] > 0.0;
      const bool at_hi = r.x[i] >= upper[i] - eps && r.grad[i] < 0.0;
      free_var[i] = !(at_lo || at_hi);
    }

    double gamma = 1.0;
    if (!mem.empty()) {
      const auto &last = mem.back();
      gamma = last.s.dot(last.y) / last.y.squaredNorm();
    } else {
      gamma = 1.0 / std::max(1.0, r.grad.cwiseAbs().maxCoeff());
    }

    // Two-loop recursion on the free components.
    for (Eigen::Index i = 0; i < n; ++i)
      q[i] = free_var[i] ? r.grad[i] : 0.0;
    alpha_buf.resize(mem.size());
    for (int j = static_cast<int>(mem.size()) - 1; j >= 0; --j) {
      alpha_buf[j] = mem[j].rho * mem[j].s.dot(q);
      q -= alpha_buf[j] * mem[j].y;
    }
    q *= gamma;
    for (std::size_t j = 0; j < mem.size(); ++j) {
      const double beta = mem[j].rho * mem[j].y.dot(q);
      q += (alpha_buf[j] - beta) * mem[j].s;
    }
    for (Eigen::Index i = 0; i < n; ++i)
      d[i] = free_var[i] ? -q[i] : -gamma * r.grad[i];

    if (r.grad.dot(d) >= 0.0) {
      mem.clear();
      d = -gamma * r.grad;
    }

    // Projected Armijo backtracking.
    double step = 1.0;
    bool accepted = false;
    double f_new = std::numeric_limits<double>::infinity();
    for (int bt = 0; bt < 60; ++bt) {
      x_new = project(r.x + step * d, lower, upper);
      const double decrease = r.grad.dot(x_new - r.x);
      if (decrease < 0.0) {
        try {
          f_new = fn(x_new, g_new);
        } catch (const nlp::EvalFailure &) {
          f_new = std::numeric_limits<double>::infinity();
        }
        ++r.evaluations;
        if (std::isfinite(f_new) && f_new <= r.f + 1e-4 * decrease) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
      if (r.evaluations >= opt.max_evals)
        break;
    }

    if (!accepted) {
      if (!mem.empty()) {
        mem.clear();
        ++r.iterations;
        continue;
      }
      r.reason = "line search failed";
      return r;
    }

    const Eigen::VectorXd s = x_new - r.x;
    const Eigen::VectorXd y = g_new - r.grad;
    const double sy = s.dot(y);
    const double dx = s.cwiseAbs().maxCoeff();
    const double f_old = r.f;
    r.x = x_new;
    r.grad = g_new;
    r.f = f_new;
    ++r.iterations;

    if (sy > 1e-12 * y.squaredNorm() && sy > 0.0) {
      mem.push_back({s, y, 1.0 / sy});
      if (static_cast<int>(mem.size()) > opt.memory)
        mem.pop_front();
    }

    if (dx <= opt.step_tol * (1.0 + r.x.cwiseAbs().maxCoeff()) &&
        std::abs(f_old - r.f) <= 1e-15 * (1.0 + std::abs(r.f))) {
      r.pg_norm = projected_gradient_norm(r.x, r.grad, lower, upper);
      r.converged = r.pg_norm <= opt.pg_tol;
      r.reason = "step below tolerance";
      return r;
    }
  }
}

} // namespace pcmforge::solver
