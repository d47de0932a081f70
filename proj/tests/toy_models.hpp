//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//
// Small NLPs with known solutions for exercising the solver.
//

#ifndef PCMFORGE_TESTS_TOY_MODELS_HPP_
#define PCMFORGE_TESTS_TOY_MODELS_HPP_

#include <cmath>

#include "pcmforge/nlp.hpp"

namespace toy {

/// min |z|^2  s.t.  sum(z) = 1,  -10 <= z <= 10.
class SumQp final : public pcmforge::nlp::Model {
public:
  explicit SumQp(int n = 5)
      : n_(n), lo_(Eigen::VectorXd::Constant(n, -10.0)),
        hi_(Eigen::VectorXd::Constant(n, 10.0)) {}
  int num_variables() const override { return n_; }
  int num_equalities() const override { return 1; }
  int num_inequalities() const override { return 0; }
  const Eigen::VectorXd &lower() const override { return lo_; }
  const Eigen::VectorXd &upper() const override { return hi_; }
  void evaluate(const Eigen::VectorXd &x, pcmforge::nlp::EvalPoint &out,
                bool derivatives) const override {
    out.x = x;
    out.objective = x.squaredNorm();
    out.eq = Eigen::VectorXd::Constant(1, x.sum() - 1.0);
    out.ineq.resize(0);
    if (derivatives) {
      out.gradient = 2.0 * x;
      out.jac_eq.clear();
      out.jac_ineq.clear();
      for (int i = 0; i < n_; ++i)
        out.jac_eq.push_back({0, i, 1.0});
    }
  }

private:
  int n_;
  Eigen::VectorXd lo_, hi_;
};

/// Rosenbrock restricted to the line x + y = 1, inside a box that keeps
/// only the basin near x = (sqrt(5) - 1) / 2.
class LineRosenbrock final : public pcmforge::nlp::Model {
public:
  LineRosenbrock() : lo_(2), hi_(2) {
    lo_ << -0.5, -0.5;
    hi_ << 1.5, 1.5;
  }
  int num_variables() const override { return 2; }
  int num_equalities() const override { return 1; }
  int num_inequalities() const override { return 0; }
  const Eigen::VectorXd &lower() const override { return lo_; }
  const Eigen::VectorXd &upper() const override { return hi_; }
  void evaluate(const Eigen::VectorXd &z, pcmforge::nlp::EvalPoint &out,
                bool derivatives) const override {
    const double x = z[0], y = z[1];
    out.x = z;
    out.objective = (1 - x) * (1 - x) + 100 * (y - x * x) * (y - x * x);
    out.eq = Eigen::VectorXd::Constant(1, x + y - 1.0);
    out.ineq.resize(0);
    if (derivatives) {
      out.gradient.resize(2);
      out.gradient[0] = -2 * (1 - x) - 400 * x * (y - x * x);
      out.gradient[1] = 200 * (y - x * x);
      out.jac_eq = {{0, 0, 1.0}, {0, 1, 1.0}};
      out.jac_ineq.clear();
    }
  }

private:
  Eigen::VectorXd lo_, hi_;
};

/// min x0 + x1  s.t.  x0 * x1 >= 1,  x in [0.1, 10]^2. Optimum (1, 1).
class HyperbolaLp final : public pcmforge::nlp::Model {
public:
  HyperbolaLp()
      : lo_(Eigen::VectorXd::Constant(2, 0.1)),
        hi_(Eigen::VectorXd::Constant(2, 10.0)) {}
  int num_variables() const override { return 2; }
  int num_equalities() const override { return 0; }
  int num_inequalities() const override { return 1; }
  const Eigen::VectorXd &lower() const override { return lo_; }
  const Eigen::VectorXd &upper() const override { return hi_; }
  void evaluate(const Eigen::VectorXd &x, pcmforge::nlp::EvalPoint &out,
                bool derivatives) const override {
    out.x = x;
    out.objective = x[0] + x[1];
    out.eq.resize(0);
    out.ineq = Eigen::VectorXd::Constant(1, x[0] * x[1] - 1.0);
    if (derivatives) {
      out.gradient = Eigen::VectorXd::Ones(2);
      out.jac_eq.clear();
      out.jac_ineq = {{0, 0, x[1]}, {0, 1, x[0]}};
    }
  }

private:
  Eigen::VectorXd lo_, hi_;
};

/// Contradictory constraints x = 0 and x = 1.
class Contradiction final : public pcmforge::nlp::Model {
public:
  Contradiction()
      : lo_(Eigen::VectorXd::Constant(1, -5.0)),
        hi_(Eigen::VectorXd::Constant(1, 5.0)) {}
  int num_variables() const override { return 1; }
  int num_equalities() const override { return 2; }
  int num_inequalities() const override { return 0; }
  const Eigen::VectorXd &lower() const override { return lo_; }
  const Eigen::VectorXd &upper() const override { return hi_; }
  void evaluate(const Eigen::VectorXd &x, pcmforge::nlp::EvalPoint &out,
                bool derivatives) const override {
    out.x = x;
    out.objective = 0.0;
    out.eq.resize(2);
    out.eq << x[0], x[0] - 1.0;
    out.ineq.resize(0);
    if (derivatives) {
      out.gradient = Eigen::VectorXd::Zero(1);
      out.jac_eq = {{0, 0, 1.0}, {1, 0, 1.0}};
      out.jac_ineq.clear();
    }
  }

private:
  Eigen::VectorXd lo_, hi_;
};

/// Fails to evaluate everywhere.
class Broken final : public pcmforge::nlp::Model {
public:
  Broken()
      : lo_(Eigen::VectorXd::Zero(1)), hi_(Eigen::VectorXd::Ones(1)) {}
  int num_variables() const override { return 1; }
  int num_equalities() const override { return 0; }
  int num_inequalities() const override { return 0; }
  const Eigen::VectorXd &lower() const override { return lo_; }
  const Eigen::VectorXd &upper() const override { return hi_; }
  void evaluate(const Eigen::VectorXd &, pcmforge::nlp::EvalPoint &,
                bool) const override {
    throw pcmforge::nlp::EvalFailure("model cannot be evaluated");
  }

private:
  Eigen::VectorXd lo_, hi_;
};

} // namespace toy

#endif // PCMFORGE_TESTS_TOY_MODELS_HPP_
