//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "pcmforge/objective.hpp"

#include <cmath>

#include <json.hpp>

#include "pcmforge/errors.hpp"
#include "pcmforge/format.hpp"

namespace pcmforge::objective {

DynamicTerms dynamic_objectives(const simulate::Trajectory &traj,
                                const scenario::Weights &w) {
  if (traj.size() < 2)
    throw DomainError("trajectory needs at least two knots");
  const double dt = traj.dt;
  const double t_f = traj.horizon();

  DynamicTerms d;
  double sum_sd = 0.0;
  double sum_spcm = 0.0;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const auto &r = traj.knots[k];
    d.J_ie += r.Q_hx * dt;
    d.J_ce -= r.P_d * dt;
    sum_sd += r.s_d * dt;
    sum_spcm += r.s_pcm * dt;
  }
  d.J_cv_d = sum_sd / t_f;
  d.J_cv_pcm = sum_spcm / t_f;
  d.J_d = w.w_ie * d.J_ie + w.w_ce * d.J_ce + w.w_cv_d * d.J_cv_d +
          w.w_cv_p * d.J_cv_pcm;
  return d;
}

StaticTerms static_objectives(const plant::PcmDesign &design,
                              const scenario::Weights &w, double P_pcm_nom,
                              double t_nom) {
  design.validate();
  StaticTerms s;
  s.J_m = design.C_pcm;
  s.J_nom = 0.0 - P_pcm_nom * t_nom;
  s.J_s = w.w_m * s.J_m + w.w_nom * s.J_nom;
  return s;
}

double total_objective(double J_d, double J_s, const scenario::Weights &w) {
  if (w.n == 1.0)
    return w.w_d * J_d + w.w_s * J_s;
  if (J_d < 0.0 || J_s < 0.0)
    throw DomainError("compromise exponent n = " + format_double(w.n) +
                      " needs nonnegative J_d and J_s (got J_d = " +
                      format_double(J_d) + ", J_s = " + format_double(J_s) +
                      "); rebalance the internal weights");
  return w.w_d * std::pow(J_d, w.n) + w.w_s * std::pow(J_s, w.n);
}

ObjectiveBreakdown evaluate(const simulate::Trajectory &traj,
                            const scenario::Scenario &s) {
  const DynamicTerms d = dynamic_objectives(traj, s.weights);
  const StaticTerms st = static_objectives(traj.design, s.weights,
                                           s.nominal.P_pcm_nom,
                                           s.nominal.t_nom);
  ObjectiveBreakdown b;
  b.J_ie = d.J_ie;
  b.J_ce = d.J_ce;
  b.J_cv_d = d.J_cv_d;
  b.J_cv_pcm = d.J_cv_pcm;
  b.J_m = st.J_m;
  b.J_nom = st.J_nom;
  b.J_d = d.J_d;
  b.J_s = st.J_s;
  b.J_tot = total_objective(b.J_d, b.J_s, s.weights);
  return b;
}

std::string to_json(const ObjectiveBreakdown &b,
                    const scenario::Weights &w) {
  nlohmann::ordered_json j;
  j["J_ie"] = b.J_ie;
  j["J_ce"] = b.J_ce;
  j["J_cv_d"] = b.J_cv_d;
  j["J_cv_pcm"] = b.J_cv_pcm;
  j["J_m"] = b.J_m;
  j["J_nom"] = b.J_nom;
  j["J_d"] = b.J_d;
  j["J_s"] = b.J_s;
  j["J_tot"] = b.J_tot;
  j["weights"] = {{"w_d", w.w_d},       {"w_s", w.w_s},
                  {"n", w.n},           {"w_ie", w.w_ie},
                  {"w_ce", w.w_ce},     {"w_cv_d", w.w_cv_d},
                  {"w_cv_p", w.w_cv_p}, {"w_m", w.w_m},
                  {"w_nom", w.w_nom}};
  return j.dump(2) + "\n";
}

ObjectiveBreakdown from_json(const std::string &text) {
  ObjectiveBreakdown b;
  try {
    const auto j = nlohmann::json::parse(text);
    b.J_ie = j.at("J_ie").get<double>();
    b.J_ce = j.at("J_ce").get<double>();
    b.J_cv_d = j.at("J_cv_d").get<double>();
    b.J_cv_pcm = j.at("J_cv_pcm").get<double>();
    b.J_m = j.at("J_m").get<double>();
    b.J_nom = j.at("J_nom").get<double>();
    b.J_d = j.at("J_d").get<double>();
    b.J_s = j.at("J_s").get<double>();
    b.J_tot = j.at("J_tot").get<double>();
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("malformed objective breakdown: ") +
                     e.what());
  }
  return b;
}

} // namespace pcmforge::objective
