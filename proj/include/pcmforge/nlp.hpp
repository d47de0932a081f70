//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef PCMFORGE_NLP_HPP_
#define PCMFORGE_NLP_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pcmforge::nlp {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// One evaluation of a smooth NLP
///
///   min f(x)  s.t.  c(x) = 0,  g(x) >= 0,  lower <= x <= upper.
///
/// Derivative members are filled only when requested.
struct EvalPoint {
  Eigen::VectorXd x;
  double objective = 0.0;
  Eigen::VectorXd eq;   ///< c(x)
  Eigen::VectorXd ineq; ///< g(x)
  Eigen::VectorXd gradient;
  std::vector<Triplet> jac_eq;
  std::vector<Triplet> jac_ineq;
};

/// A point where the model cannot be evaluated (e.g. an infeasible plant
/// operating point).
class EvalFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class Model {
public:
  virtual ~Model() = default;

  virtual int num_variables() const = 0;
  virtual int num_equalities() const = 0;
  virtual int num_inequalities() const = 0;
  virtual const Eigen::VectorXd &lower() const = 0;
  virtual const Eigen::VectorXd &upper() const = 0;

  /// Must be reentrant: concurrent calls on one model are allowed.
  virtual void evaluate(const Eigen::VectorXd &x, EvalPoint &out,
                        bool derivatives) const = 0;

  /// Starting point for multi-start index `start` of a run seeded with
  /// `seed`. The default samples the box uniformly (infinite sides are
  /// replaced by +-1 around the finite one, or [-1, 1]).
  virtual Eigen::VectorXd initial_point(std::uint64_t seed, int start) const;

  /// Post-processing applied to a solver result before the final
  /// evaluation. Must not increase the objective or the constraint
  /// violation. Default: identity.
  virtual Eigen::VectorXd finalize(const Eigen::VectorXd &x) const {
    return x;
  }
};

/// Uniform [0, 1) from the top 53 bits of a 64-bit draw; identical on every
/// platform, unlike std::uniform_real_distribution.
template <class Engine> double unit_uniform(Engine &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// J^T v for a triplet Jacobian with `cols` columns.
Eigen::VectorXd transpose_times(const std::vector<Triplet> &jac,
                                const Eigen::VectorXd &v, int cols);

/// Dense central-difference Jacobian of [c; g] and gradient of f, for
/// verification. Step h_j = rel_step * max(1, |x_j|), clipped to the box.
struct FiniteDifference {
  Eigen::VectorXd gradient;
  Eigen::MatrixXd jac_eq;
  Eigen::MatrixXd jac_ineq;
};
FiniteDifference finite_difference(const Model &model,
                                   const Eigen::VectorXd &x,
                                   double rel_step = 1e-6);

Eigen::MatrixXd to_dense(const std::vector<Triplet> &jac, int rows, int cols);

} // namespace pcmforge::nlp

#endif // PCMFORGE_NLP_HPP_
