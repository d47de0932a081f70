//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "pcmforge/errors.hpp"
#include "pcmforge/format.hpp"
#include "pcmforge/scenario.hpp"

namespace pcmforge::scenario {
namespace {
  struct NumericKey {
    const char *key;
    double *target;
  };

  std::vector<NumericKey> numeric_keys(Scenario &s) {
    return {
        {"params.C_d", &s.params.C_d},
        {"params.hA_dc", &s.params.hA_dc},
        {"params.hA_cpcm", &s.params.hA_cpcm},
        {"params.m_dot_d", &s.params.m_dot_d},
        {"params.c_p", &s.params.c_p},
        {"params.alpha", &s.params.alpha},
        {"params.A_s", &s.params.A_s},
        {"params.h_inf", &s.params.h_inf},
        {"params.eta_pv", &s.params.eta_pv},
        {"bounds.E_d_lb", &s.bounds.E_d_lb},
        {"bounds.E_d_ub", &s.bounds.E_d_ub},
        {"bounds.E_pcm_lb_frac", &s.bounds.E_pcm_lb_frac},
        {"bounds.E_pcm_ub_frac", &s.bounds.E_pcm_ub_frac},
        {"bounds.v_lb", &s.bounds.v_lb},
        {"bounds.v_ub", &s.bounds.v_ub},
        {"bounds.Q_hx_lb", &s.bounds.Q_hx_lb},
        {"bounds.Q_hx_ub", &s.bounds.Q_hx_ub},
        {"bounds.C_pcm_lb", &s.bounds.C_pcm_lb},
        {"bounds.C_pcm_ub", &s.bounds.C_pcm_ub},
        {"bounds.T_m_lb", &s.bounds.T_m_lb},
        {"bounds.T_m_ub", &s.bounds.T_m_ub},
        {"weights.w_d", &s.weights.w_d},
        {"weights.w_s", &s.weights.w_s},
        {"weights.n", &s.weights.n},
        {"weights.w_ie", &s.weights.w_ie},
        {"weights.w_ce", &s.weights.w_ce},
        {"weights.w_cv_d", &s.weights.w_cv_d},
        {"weights.w_cv_p", &s.weights.w_cv_p},
        {"weights.w_m", &s.weights.w_m},
        {"weights.w_nom", &s.weights.w_nom},
        {"nominal.P_pcm_nom", &s.nominal.P_pcm_nom},
        {"nominal.t_nom", &s.nominal.t_nom},
        {"initial.E_d", &s.initial.E_d},
        {"initial.soc", &s.initial.soc},
        {"policy.v1", &s.policy.v1},
        {"policy.v2", &s.policy.v2},
        {"policy.Q_hx", &s.policy.Q_hx},
        {"design.C_pcm", &s.design.C_pcm},
        {"design.T_m", &s.design.T_m},
    };
  }

  std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
      return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  double to_number(const std::string &key, const std::string &value,
                   std::size_t line) {
    double out = 0.0;
    if (!parse_double(value, out))
      throw ParseError("line " + std::to_string(line) + ": key '" + key +
                           "' expects a number, got '" + value + "'",
                       line);
    return out;
  }

  template <class Int>
  Int to_integer(const std::string &key, const std::string &value,
                 std::size_t line) {
    Int out{};
    auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size())
      throw ParseError("line " + std::to_string(line) + ": key '" + key +
                           "' expects an integer, got '" + value + "'",
                       line);
    return out;
  }
} // namespace

ScenarioConfig parse_scenario_config(const std::string &text,
                                     const std::filesystem::path &base_dir) {
  ScenarioConfig cfg;
  cfg.scenario = default_case_study();
  Scenario &s = cfg.scenario;

  std::map<std::string, double *> numeric;
  for (const auto &k : numeric_keys(s))
    numeric.emplace(k.key, k.target);

  SyntheticProfileSpec synth;
  std::map<std::string, double *> synth_keys = {
      {"profile.duration_s", &synth.duration_s},
      {"profile.dt", &synth.dt},
      {"profile.G_base", &synth.G_base},
      {"profile.G_drop", &synth.G_drop},
      {"profile.drop_start", &synth.drop_start},
      {"profile.drop_end", &synth.drop_end},
      {"profile.T_inf_base", &synth.T_inf_base},
  };
  std::string profile_source = "synthetic";
  std::string profile_path;
  bool synth_key_seen = false;
  int schema = -1;

  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(raw.substr(0, hash));
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(line_no) +
                           ": expected 'key = value'",
                       line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second)
      throw ParseError("line " + std::to_string(line_no) + ": duplicate key '" +
                           key + "'",
                       line_no);

    if (key == "schema_version") {
      schema = to_integer<int>(key, value, line_no);
    } else if (auto it = numeric.find(key); it != numeric.end()) {
      *it->second = to_number(key, value, line_no);
    } else if (auto jt = synth_keys.find(key); jt != synth_keys.end()) {
      *jt->second = to_number(key, value, line_no);
      synth_key_seen = true;
    } else if (key == "profile.source") {
      profile_source = value;
    } else if (key == "profile.path") {
      profile_path = value;
    } else if (key == "policy") {
      s.policy.kind = policy_from_string(value);
    } else if (key == "solver.max_fun_evals") {
      cfg.solver.max_fun_evals = to_integer<long long>(key, value, line_no);
    } else if (key == "solver.max_iter") {
      cfg.solver.max_iter = to_integer<long long>(key, value, line_no);
    } else if (key == "solver.step_tol") {
      cfg.solver.step_tol = to_number(key, value, line_no);
    } else if (key == "solver.constraint_tol") {
      cfg.solver.constraint_tol = to_number(key, value, line_no);
    } else if (key == "solver.n_starts") {
      cfg.solver.n_starts = to_integer<int>(key, value, line_no);
    } else if (key == "solver.seed") {
      cfg.solver.seed = to_integer<unsigned long long>(key, value, line_no);
    } else {
      throw ParseError("line " + std::to_string(line_no) + ": unknown key '" +
                           key + "'",
                       line_no);
    }
  }

  if (schema < 0)
    throw ParseError("missing schema_version");
  if (schema != kConfigSchemaVersion)
    throw ParseError("unsupported schema_version " + std::to_string(schema));

  if (profile_source == "synthetic") {
    if (!profile_path.empty())
      throw ParseError("profile.path given with profile.source = synthetic");
    s.profile = synth_profile(synth);
  } else if (profile_source == "csv") {
    if (synth_key_seen)
      throw ParseError("synthetic profile keys given with profile.source = "
                       "csv");
    if (profile_path.empty())
      throw ParseError("profile.source = csv requires profile.path");
    std::filesystem::path p(profile_path);
    if (p.is_relative())
      p = base_dir / p;
    s.profile = load_profile_csv(p);
  } else {
    throw ParseError("profile.source must be 'synthetic' or 'csv'");
  }

  if (cfg.solver.n_starts < 1)
    throw DomainError("solver.n_starts must be >= 1");
  if (!(cfg.solver.step_tol > 0.0) || !(cfg.solver.constraint_tol > 0.0))
    throw DomainError("solver tolerances must be positive");

  s.validate();
  return cfg;
}

ScenarioConfig load_scenario_config(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::filesystem::filesystem_error(
        "cannot open config", path,
        std::make_error_code(std::errc::no_such_file_or_directory));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_config(buf.str(), path.parent_path());
}

std::string format_scenario_config(const ScenarioConfig &config,
                                   const std::string &profile_csv) {
  Scenario s = config.scenario;
  std::ostringstream os;
  os << "# pcm-forge scenario\n";
  os << "schema_version = " << kConfigSchemaVersion << "\n";
  os << "policy = " << to_string(s.policy.kind) << "\n";
  for (const auto &k : numeric_keys(s))
    os << k.key << " = " << format_double(*k.target) << "\n";
  os << "profile.source = csv\n";
  os << "profile.path = " << profile_csv << "\n";
  os << "solver.max_fun_evals = " << config.solver.max_fun_evals << "\n";
  os << "solver.max_iter = " << config.solver.max_iter << "\n";
  os << "solver.step_tol = " << format_double(config.solver.step_tol) << "\n";
  os << "solver.constraint_tol = "
     << format_double(config.solver.constraint_tol) << "\n";
  os << "solver.n_starts = " << config.solver.n_starts << "\n";
  os << "solver.seed = " << config.solver.seed << "\n";
  return os.str();
}

} // namespace pcmforge::scenario
