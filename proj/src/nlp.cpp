//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "pcmforge/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pcmforge::nlp {

Eigen::VectorXd Model::initial_point(std::uint64_t seed, int start) const {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(start)};
  std::mt19937_64 rng(seq);
  const auto &lo = lower();
  const auto &hi = upper();
  Eigen::VectorXd x(num_variables());
  for (int i = 0; i < x.size(); ++i) {
    double a = lo[i];
    double b = hi[i];
    if (!std::isfinite(a) && !std::isfinite(b)) {
      a = -1.0;
      b = 1.0;
    } else if (!std::isfinite(a)) {
      a = b - 1.0;
    } else if (!std::isfinite(b)) {
      b = a + 1.0;
    }
    x[i] = a + (b - a) * unit_uniform(rng);
  }
  return x;
}

Eigen::VectorXd transpose_times(const std::vector<Triplet> &jac,
                                const Eigen::VectorXd &v, int cols) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(cols);
  for (const auto &t : jac)
    out[t.col] += t.value * v[t.row];
  return out;
}

Eigen::MatrixXd to_dense(const std::vector<Triplet> &jac, int rows,
                         int cols) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  for (const auto &t : jac)
    m(t.row, t.col) += t.value;
  return m;
}

FiniteDifference finite_difference(const Model &model,
                                   const Eigen::VectorXd &x,
                                   double rel_step) {
  const int n = model.num_variables();
  FiniteDifference fd;
  fd.gradient.resize(n);
  fd.jac_eq.resize(model.num_equalities(), n);
  fd.jac_ineq.resize(model.num_inequalities(), n);

  EvalPoint plus, minus;
  for (int j = 0; j < n; ++j) {
    const double h = rel_step * std::max(1.0, std::abs(x[j]));
    double up = x[j] + h;
    double down = x[j] - h;
    if (up > model.upper()[j])
      up = x[j];
    if (down < model.lower()[j])
      down = x[j];
    Eigen::VectorXd xp = x, xm = x;
    xp[j] = up;
    xm[j] = down;
    model.evaluate(xp, plus, false);
    model.evaluate(xm, minus, false);
    const double span = up - down;
    fd.gradient[j] = (plus.objective - minus.objective) / span;
    fd.jac_eq.col(j) = (plus.eq - minus.eq) / span;
    fd.jac_ineq.col(j) = (plus.ineq - minus.ineq) / span;
  }
  return fd;
}

} // namespace pcmforge::nlp
