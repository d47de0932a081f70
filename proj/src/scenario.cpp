//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "pcmforge/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pcmforge/errors.hpp"
#include "pcmforge/format.hpp"

namespace pcmforge::scenario {
namespace {
  void require_ordered(double lb, double ub, const char *name) {
    if (!(lb <= ub) || !std::isfinite(lb) || !std::isfinite(ub))
      throw DomainError(std::string("bounds for ") + name +
                        " must be finite with lb <= ub");
  }

  void require_nonnegative(double value, const char *name) {
    if (!(value >= 0.0) || !std::isfinite(value))
      throw DomainError(std::string(name) + " must be nonnegative");
  }

  constexpr const char *kCsvHeader = "t_s,G_wm2,T_inf_c";
} // namespace

void DisturbanceProfile::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw DomainError("profile timestep must be positive");
  if (G.size() != T_inf.size())
    throw DomainError("profile sequences must have equal length");
  if (G.size() < 2)
    throw DomainError("profile needs at least two knots");
  for (std::size_t k = 0; k < G.size(); ++k) {
    if (!(G[k] >= 0.0) || !std::isfinite(G[k]))
      throw DomainError("irradiance must be nonnegative at knot " +
                        std::to_string(k));
    if (!std::isfinite(T_inf[k]))
      throw DomainError("ambient temperature must be finite at knot " +
                        std::to_string(k));
  }
}

void Bounds::validate() const {
  require_ordered(E_d_lb, E_d_ub, "E_d");
  require_ordered(E_pcm_lb_frac, E_pcm_ub_frac, "E_pcm fraction");
  if (E_pcm_lb_frac < 0.0 || E_pcm_ub_frac > 1.0)
    throw DomainError("E_pcm bound fractions must lie in [0, 1]");
  require_ordered(v_lb, v_ub, "valves");
  if (v_lb < 0.0 || v_ub > 1.0)
    throw DomainError("valve bounds must lie in [0, 1]");
  require_ordered(Q_hx_lb, Q_hx_ub, "Q_hx");
  require_nonnegative(Q_hx_lb, "Q_hx lower bound");
  require_ordered(C_pcm_lb, C_pcm_ub, "C_pcm");
  if (!(C_pcm_lb > 0.0))
    throw DomainError("C_pcm lower bound must be positive");
  require_ordered(T_m_lb, T_m_ub, "T_m");
}

void Weights::validate() const {
  for (double w : {w_d, w_s, w_ie, w_ce, w_cv_d, w_cv_p, w_m, w_nom})
    require_nonnegative(w, "weights");
  if (!(n >= 1.0) || !std::isfinite(n))
    throw DomainError("compromise exponent n must be >= 1");
}

void Scenario::validate() const {
  params.validate();
  profile.validate();
  bounds.validate();
  weights.validate();
  design.validate();
  if (!std::isfinite(initial.E_d) || !(initial.E_d > 0.0))
    throw DomainError("initial device energy must be positive and finite");
  if (!(initial.soc >= 0.0 && initial.soc <= 1.0))
    throw DomainError("initial state of charge must lie in [0, 1]");
  require_nonnegative(nominal.t_nom, "t_nom");
  if (!std::isfinite(nominal.P_pcm_nom))
    throw DomainError("P_pcm_nom must be finite");
  if (!policy.optimizes_valves()) {
    for (double v : {policy.v1, policy.v2}) {
      if (!(v >= bounds.v_lb && v <= bounds.v_ub))
        throw DomainError("fixed valve command " + format_double(v) +
                          " lies outside the valve bounds");
    }
  }
  if (!policy.optimizes_q_hx()) {
    if (!(policy.Q_hx >= bounds.Q_hx_lb && policy.Q_hx <= bounds.Q_hx_ub))
      throw DomainError("fixed Q_hx lies outside its bounds");
    if (policy.Q_hx > 0.0 && policy.v2 == 1.0)
      throw DomainError("fixed Q_hx > 0 with v2 = 1 sends heat through a "
                        "branch without flow");
  }
}

const char *to_string(PolicyKind kind) {
  switch (kind) {
  case PolicyKind::kAllFixed:
    return "all_fixed";
  case PolicyKind::kFixedValves:
    return "fixed_valves";
  case PolicyKind::kFullyOptimized:
    return "fully_optimized";
  }
  return "?";
}

PolicyKind policy_from_string(const std::string &name) {
  if (name == "all_fixed")
    return PolicyKind::kAllFixed;
  if (name == "fixed_valves")
    return PolicyKind::kFixedValves;
  if (name == "fully_optimized")
    return PolicyKind::kFullyOptimized;
  throw DomainError("unknown control policy '" + name +
                    "' (expected all_fixed, fixed_valves or fully_optimized)");
}

Scenario default_case_study() {
  Scenario s;
  s.params.C_d = 4580.0;
  s.params.hA_dc = 21.42;
  s.params.hA_cpcm = 21.42;
  s.params.m_dot_d = 1.794;
  s.params.c_p = 1370.0;
  s.params.alpha = 0.7;
  s.params.A_s = 0.8;
  s.params.h_inf = 13.39;
  s.params.eta_pv = 0.2;

  s.profile = synth_profile(SyntheticProfileSpec{});

  s.bounds.E_d_lb = 45800.0;
  s.bounds.E_d_ub = 229000.0;
  s.bounds.E_pcm_lb_frac = 0.0;
  s.bounds.E_pcm_ub_frac = 1.0;
  s.bounds.v_lb = 0.0;
  s.bounds.v_ub = 1.0;
  s.bounds.Q_hx_lb = 0.0;
  s.bounds.Q_hx_ub = 100.0;
  s.bounds.C_pcm_lb = 5e5;
  s.bounds.C_pcm_ub = 6e6;
  s.bounds.T_m_lb = 20.0;
  s.bounds.T_m_ub = 50.0;

  s.weights = Weights{};
  s.weights.w_nom = 0.0;

  s.initial.E_d = s.params.C_d * 35.0;
  s.initial.soc = 0.5;

  s.policy = ControlPolicy{PolicyKind::kAllFixed, 0.0, 1.0, 0.0};
  s.design = plant::PcmDesign{5e5, 35.0};
  return s;
}

DisturbanceProfile synth_profile(const SyntheticProfileSpec &spec) {
  if (!(spec.dt > 0.0) || !(spec.duration_s > 0.0))
    throw DomainError("duration and timestep must be positive");
  const double intervals = spec.duration_s / spec.dt;
  const double rounded = std::round(intervals);
  if (rounded < 1.0 || std::abs(intervals - rounded) > 1e-9 * rounded)
    throw DomainError("duration must be an integer multiple of the timestep");
  if (!(spec.drop_start >= 0.0 && spec.drop_start <= spec.drop_end &&
        spec.drop_end <= spec.duration_s))
    throw DomainError("irradiance drop window must satisfy 0 <= start <= "
                      "end <= duration");
  if (!(spec.G_base >= 0.0) || !(spec.G_drop >= 0.0))
    throw DomainError("irradiance levels must be nonnegative");

  const auto n = static_cast<std::size_t>(rounded) + 1;
  DisturbanceProfile p;
  p.dt = spec.dt;
  p.G.resize(n);
  p.T_inf.assign(n, spec.T_inf_base);
  const bool has_window = spec.drop_start < spec.drop_end;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = spec.dt * static_cast<double>(k);
    const bool dropped =
        has_window && t >= spec.drop_start && t <= spec.drop_end;
    p.G[k] = dropped ? spec.G_drop : spec.G_base;
  }
  return p;
}

DisturbanceProfile parse_profile_csv(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  std::vector<double> t, G, T_inf;
  bool header_seen = false;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    if (!header_seen) {
      header_seen = true;
      if (line != kCsvHeader)
        throw ParseError(std::string("expected header '") + kCsvHeader +
                         "', got '" + line + "'");
      continue;
    }
    ++row;
    std::array<double, 3> values{};
    std::size_t col = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string field =
          line.substr(start, comma == std::string::npos ? std::string::npos
                                                        : comma - start);
      if (col >= 3 || !parse_double(field, values[col]))
        throw ParseError("expected 3 numeric columns at row " +
                             std::to_string(row),
                         row);
      ++col;
      if (comma == std::string::npos)
        break;
      start = comma + 1;
    }
    if (col != 3)
      throw ParseError("expected 3 numeric columns at row " +
                           std::to_string(row),
                       row);
    t.push_back(values[0]);
    G.push_back(values[1]);
    T_inf.push_back(values[2]);
  }

  if (t.size() < 2)
    throw ParseError("at least two samples required");

  const double dt = t[1] - t[0];
  if (!(dt > 0.0))
    throw ParseError("non-monotone time at row 2", 2);
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double step = t[i] - t[i - 1];
    if (!(step > 0.0))
      throw ParseError("non-monotone time at row " + std::to_string(i + 1),
                       i + 1);
    if (std::abs(step - dt) > 1e-9 * dt)
      throw ParseError("non-uniform timestep at row " + std::to_string(i + 1),
                       i + 1);
  }
  for (std::size_t i = 0; i < G.size(); ++i) {
    if (!(G[i] >= 0.0))
      throw ParseError("negative irradiance at row " + std::to_string(i + 1),
                       i + 1);
  }

  DisturbanceProfile p;
  p.t0 = t[0];
  p.dt = dt;
  p.G = std::move(G);
  p.T_inf = std::move(T_inf);
  return p;
}

DisturbanceProfile load_profile_csv(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ParseError("cannot open profile '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_profile_csv(buf.str());
}

std::string format_profile_csv(const DisturbanceProfile &profile) {
  std::string out = kCsvHeader;
  out += '\n';
  for (std::size_t k = 0; k < profile.knots(); ++k) {
    out += format_double(profile.t0 + profile.dt * static_cast<double>(k));
    out += ',';
    out += format_double(profile.G[k]);
    out += ',';
    out += format_double(profile.T_inf[k]);
    out += '\n';
  }
  return out;
}

void write_profile_csv(const DisturbanceProfile &profile,
                       const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write '" + path.string() + "'");
  out << format_profile_csv(profile);
}

} // namespace pcmforge::scenario
