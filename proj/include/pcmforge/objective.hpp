//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef PCMFORGE_OBJECTIVE_HPP_
#define PCMFORGE_OBJECTIVE_HPP_

#include <string>

#include "pcmforge/plant.hpp"
#include "pcmforge/scenario.hpp"
#include "pcmforge/simulate.hpp"

namespace pcmforge::objective {

/// Internal objectives [J] and their weighted aggregates.
struct ObjectiveBreakdown {
  double J_ie = 0.0;     ///< input effort, integral of Q_hx
  double J_ce = 0.0;     ///< cooling effectiveness, -integral of P_d
  double J_cv_d = 0.0;   ///< time-averaged device slack
  double J_cv_pcm = 0.0; ///< time-averaged PCM slack
  double J_m = 0.0;      ///< PCM capacity, stands in for mass
  double J_nom = 0.0;    ///< -P_pcm_nom * t_nom
  double J_d = 0.0;
  double J_s = 0.0;
  double J_tot = 0.0;
};

struct DynamicTerms {
  double J_ie = 0.0, J_ce = 0.0, J_cv_d = 0.0, J_cv_pcm = 0.0, J_d = 0.0;
};

struct StaticTerms {
  double J_m = 0.0, J_nom = 0.0, J_s = 0.0;
};

/// Left-rectangle integrals over the N - 1 intervals; slack terms are
/// divided by the horizon t_f.
DynamicTerms dynamic_objectives(const simulate::Trajectory &traj,
                                const scenario::Weights &weights);

StaticTerms static_objectives(const plant::PcmDesign &design,
                              const scenario::Weights &weights,
                              double P_pcm_nom, double t_nom);

/// w_d * J_d^n + w_s * J_s^n. For n > 1 a negative aggregate is rejected
/// with DomainError; rebalance the internal weights instead.
double total_objective(double J_d, double J_s,
                       const scenario::Weights &weights);

ObjectiveBreakdown evaluate(const simulate::Trajectory &traj,
                            const scenario::Scenario &s);

/// JSON object with one key per breakdown field plus a `weights` object.
std::string to_json(const ObjectiveBreakdown &b,
                    const scenario::Weights &weights);
ObjectiveBreakdown from_json(const std::string &text);

} // namespace pcmforge::objective

#endif // PCMFORGE_OBJECTIVE_HPP_
