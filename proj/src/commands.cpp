//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "pcmforge/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcmforge/errors.hpp"
#include "pcmforge/scenario.hpp"
#include "pcmforge/simulate.hpp"
#include "pcmforge/solver.hpp"
#include "pcmforge/transcription.hpp"

namespace fs = std::filesystem;

namespace pcmforge::cli {
namespace {
  /// Input problems that map to an exit code without a stack of catches.
  struct CommandError {
    int code;
    std::string message;
  };

  using Clock = std::chrono::steady_clock;

  void write_text(const fs::path &path, const std::string &text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
      throw CommandError{kExitMissingInput,
                         "cannot write " + path.string()};
    os << text;
    if (!os)
      throw CommandError{kExitMissingInput,
                         "failed writing " + path.string()};
  }

  std::string read_text(const fs::path &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
      throw CommandError{kExitMissingInput,
                         "cannot read " + path.string()};
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
  }

  /// Loads the config (or the default case study) and applies overrides.
  scenario::ScenarioConfig load_config(const RunOptions &o) {
    scenario::ScenarioConfig cfg;
    try {
      if (o.config) {
        if (!fs::is_regular_file(*o.config))
          throw CommandError{kExitMissingInput,
                             "config file not found: " + o.config->string()};
        cfg = scenario::load_scenario_config(*o.config);
      } else {
        cfg.scenario = scenario::default_case_study();
      }
      if (o.profile) {
        if (!fs::is_regular_file(*o.profile))
          throw CommandError{kExitMissingInput, "profile file not found: " +
                                                    o.profile->string()};
        cfg.scenario.profile = scenario::load_profile_csv(*o.profile);
      }
      if (o.seed)
        cfg.solver.seed = *o.seed;
      if (o.starts) {
        if (*o.starts < 1)
          throw DomainError("--starts must be at least 1");
        cfg.solver.n_starts = *o.starts;
      }
      cfg.scenario.validate();
    } catch (const fs::filesystem_error &e) {
      throw CommandError{kExitMissingInput, e.what()};
    } catch (const ParseError &e) {
      throw CommandError{kExitValidation, e.what()};
    } catch (const std::domain_error &e) {
      throw CommandError{kExitValidation, e.what()};
    }
    return cfg;
  }

  void prepare_out_dir(const fs::path &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
      throw CommandError{kExitMissingInput,
                         "cannot create output directory " + dir.string()};
  }

  /// Config and profile copies that reproduce the run.
  void write_inputs(const fs::path &dir, const scenario::ScenarioConfig &cfg) {
    write_text(dir / "profile.csv",
               scenario::format_profile_csv(cfg.scenario.profile));
    write_text(dir / "scenario.cfg",
               scenario::format_scenario_config(cfg, "profile.csv"));
  }

  void write_manifest(const fs::path &dir, const std::string &command,
                      const RunOptions &o,
                      const scenario::ScenarioConfig &cfg,
                      const std::vector<std::string> &outputs,
                      double seconds) {
    nlohmann::ordered_json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["command"] = command;
    j["argv"] = o.argv;
    j["scenario_file"] =
        o.config ? o.config->string() : std::string("(default)");
    if (o.profile)
      j["profile_file"] = o.profile->string();
    else
      j["profile_file"] = nullptr;
    j["output_dir"] = dir.string();
    j["seed"] = cfg.solver.seed;
    j["options"] = {{"n_starts", cfg.solver.n_starts},
                    {"max_fun_evals", cfg.solver.max_fun_evals},
                    {"max_iter", cfg.solver.max_iter},
                    {"step_tol", cfg.solver.step_tol},
                    {"constraint_tol", cfg.solver.constraint_tol},
                    {"policy", scenario::to_string(cfg.scenario.policy.kind)}};
    j["reproduce"] = std::string(kToolName) + " " + command +
                     " --config scenario.cfg --out <dir>";
    j["outputs"] = outputs;
    j["wall_clock_s"] = seconds;
    write_text(dir / "manifest.json", j.dump(2) + "\n");
  }

  double elapsed(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  }

  std::string fmt_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4e", v);
    return buf;
  }

  std::string fmt_ratio(double num, double den) {
    if (num == den)
      return "1.00";
    if (den == 0.0)
      return num > 0.0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", num / den);
    return buf;
  }

  template <class Fn> int guarded(std::ostream &err, Fn &&fn) {
    try {
      return fn();
    } catch (const CommandError &e) {
      err << "error: " << e.message << "\n";
      return e.code;
    } catch (const ParseError &e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const std::domain_error &e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const InfeasibleError &e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const NumericalError &e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    }
  }
} // namespace

int cmd_simulate(const RunOptions &o, std::ostream &out, std::ostream &err) {
  return guarded(err, [&] {
    const auto t0 = Clock::now();
    const auto cfg = load_config(o);
    const auto &s = cfg.scenario;
    if (s.policy.kind != scenario::PolicyKind::kAllFixed)
      throw CommandError{kExitValidation,
                         "simulate needs policy = all_fixed (got " +
                             std::string(scenario::to_string(s.policy.kind)) +
                             ")"};

    const auto traj =
        simulate::rollout(s, s.design, simulate::policy_controls(s));
    const auto b = objective::evaluate(traj, s);

    prepare_out_dir(o.out_dir);
    write_text(o.out_dir / "trajectory.csv",
               simulate::format_trajectory_csv(traj));
    write_text(o.out_dir / "objectives.json",
               objective::to_json(b, s.weights));
    write_inputs(o.out_dir, cfg);
    write_manifest(o.out_dir, "simulate", o, cfg,
                   {"trajectory.csv", "objectives.json", "scenario.cfg",
                    "profile.csv"},
                   elapsed(t0));
    out << "simulated " << traj.size() << " knots, J_tot = "
        << fmt_value(b.J_tot) << "\n";
    out << "wrote " << o.out_dir.string() << "\n";
    return int(kExitOk);
  });
}

int cmd_optimize(const RunOptions &o, std::ostream &out, std::ostream &err) {
  return guarded(err, [&] {
    const auto t0 = Clock::now();
    const auto cfg = load_config(o);
    const auto &s = cfg.scenario;

    const auto problem = transcription::NlpProblem::assemble(s);
    auto sopt = solver::SolveOptions::from_settings(cfg.solver);
    sopt.threads = o.threads;
    const auto result = solver::solve(problem, sopt);

    prepare_out_dir(o.out_dir);
    write_inputs(o.out_dir, cfg);
    write_text(o.out_dir / "solve.log", solver::format_solve_log(result));

    if (result.status == solver::SolveStatus::kEvalFailure) {
      std::vector<std::string> logs;
      for (const auto &st : result.starts) {
        const std::string name = "start_" + std::to_string(st.start) + ".log";
        write_text(o.out_dir / name, solver::format_start_log(st));
        logs.push_back(name);
      }
      std::vector<std::string> outputs{"solve.log", "scenario.cfg",
                                       "profile.csv"};
      outputs.insert(outputs.end(), logs.begin(), logs.end());
      write_manifest(o.out_dir, "optimize", o, cfg, outputs, elapsed(t0));
      err << "error: every start failed to evaluate; per-start logs:\n";
      for (const auto &l : logs)
        err << "  " << (o.out_dir / l).string() << "\n";
      return int(kExitSolverFailure);
    }

    const auto decoded = problem.decode(result.x);
    const auto diag = solver::verify(problem, result);
    const auto &b = *result.breakdown;

    auto summary = nlohmann::ordered_json::parse(solver::to_json(result));
    nlohmann::ordered_json head;
    head["design"] = {{"C_pcm", decoded.design.C_pcm},
                      {"T_m", decoded.design.T_m}};
    head["diagnostics"] = {
        {"max_eq_residual", diag.max_eq_residual},
        {"max_ineq_violation", diag.max_ineq_violation},
        {"transcription_objective", diag.transcription_objective},
        {"simulated_objective", diag.simulated_objective},
        {"objective_gap", diag.objective_gap},
        {"max_state_gap", diag.max_state_gap},
        {"max_slack_discrepancy", diag.max_slack_discrepancy},
        {"resimulated", diag.resimulated},
        {"message", diag.message}};
    head.update(summary);

    write_text(o.out_dir / "summary.json", head.dump(2) + "\n");
    write_text(o.out_dir / "trajectory.csv",
               simulate::format_trajectory_csv(decoded.trajectory));
    write_text(o.out_dir / "objectives.json",
               objective::to_json(b, s.weights));
    write_manifest(o.out_dir, "optimize", o, cfg,
                   {"summary.json", "trajectory.csv", "objectives.json",
                    "solve.log", "scenario.cfg", "profile.csv"},
                   elapsed(t0));

    out << "status " << solver::to_string(result.status) << " (start "
        << result.best_start << " of " << sopt.n_starts << ")\n";
    out << "C_pcm* = " << fmt_value(decoded.design.C_pcm)
        << " J, T_m* = " << fmt_value(decoded.design.T_m) << " C\n";
    out << "J_tot = " << fmt_value(b.J_tot) << "\n";
    out << "wrote " << o.out_dir.string() << "\n";
    if (result.status == solver::SolveStatus::kInfeasible) {
      err << "error: no start reached the constraint tolerance (max "
             "violation "
          << fmt_value(result.max_violation()) << ")\n";
      return int(kExitSolverFailure);
    }
    return int(kExitOk);
  });
}

std::string format_compare_table(const std::vector<NamedBreakdown> &runs) {
  using objective::ObjectiveBreakdown;
  struct Column {
    const char *name;
    double ObjectiveBreakdown::*field;
  };
  const Column cols[] = {
      {"J_ie", &ObjectiveBreakdown::J_ie},
      {"J_ce*", &ObjectiveBreakdown::J_ce},
      {"J_cv_d", &ObjectiveBreakdown::J_cv_d},
      {"J_cv_pcm", &ObjectiveBreakdown::J_cv_pcm},
      {"J_m", &ObjectiveBreakdown::J_m},
      {"J_nom", &ObjectiveBreakdown::J_nom},
      {"J_d", &ObjectiveBreakdown::J_d},
      {"J_s", &ObjectiveBreakdown::J_s},
      {"J_tot", &ObjectiveBreakdown::J_tot},
  };

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"run"};
  for (const auto &c : cols)
    header.push_back(c.name);
  rows.push_back(header);
  for (const auto &r : runs) {
    std::vector<std::string> row{r.name};
    for (const auto &c : cols)
      row.push_back(fmt_value(r.b.*c.field));
    rows.push_back(row);
  }
  const auto &first = runs.front();
  for (const auto &r : runs) {
    std::vector<std::string> row{first.name + "/" + r.name};
    for (const auto &c : cols)
      row.push_back(fmt_ratio(first.b.*c.field, r.b.*c.field));
    rows.push_back(row);
  }

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto &row : rows)
    for (std::size_t i = 0; i < row.size(); ++i)
      width[i] = std::max(width[i], row[i].size());

  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (r == 1 || r == runs.size() + 1) {
      for (std::size_t i = 0; i < width.size(); ++i)
        out += std::string(width[i], '-') + (i + 1 < width.size() ? "  " : "");
      out += "\n";
    }
    for (std::size_t i = 0; i < rows[r].size(); ++i) {
      const auto &cell = rows[r][i];
      if (i == 0)
        out += cell + std::string(width[i] - cell.size(), ' ');
      else
        out += std::string(width[i] - cell.size(), ' ') + cell;
      if (i + 1 < rows[r].size())
        out += "  ";
    }
    out += "\n";
  }
  out += "* J_ce is negative (cooling delivered), so its ratio is "
         "benefit-inverted: above 1 means the first run cooled more.\n";
  return out;
}

int cmd_compare(const std::vector<fs::path> &runs, std::ostream &out,
                std::ostream &err) {
  return guarded(err, [&] {
    if (runs.size() < 2)
      throw CommandError{kExitMissingInput,
                         "compare needs at least two run directories"};
    std::vector<NamedBreakdown> rows;
    for (const auto &dir : runs) {
      const fs::path file = dir / "objectives.json";
      if (!fs::is_regular_file(file))
        throw CommandError{kExitMissingInput,
                           "missing objective file: " + file.string()};
      rows.push_back({dir.lexically_normal().filename().empty()
                          ? dir.lexically_normal().parent_path().filename().string()
                          : dir.lexically_normal().filename().string(),
                      objective::from_json(read_text(file))});
    }
    out << format_compare_table(rows);
    return int(kExitOk);
  });
}

int run(int argc, const char *const *argv, std::ostream &out,
        std::ostream &err) {
  CLI::App app{"PCM thermal management design and control optimizer",
               kToolName};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  RunOptions o;
  for (int i = 0; i < argc; ++i)
    o.argv.emplace_back(argv[i]);
  std::string config, profile, out_dir = o.out_dir.string();
  std::uint64_t seed = 0;
  int starts = 0;
  std::vector<std::string> run_dirs;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", config, "Scenario config file");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Multi-start seed");
    sub->add_option("--starts", starts, "Number of starts")
        ->check(CLI::PositiveNumber);
    sub->add_option("--profile", profile,
                    "Disturbance CSV (t_s,G_wm2,T_inf_c); overrides the "
                    "config's profile");
  };
  auto *sim = app.add_subcommand("simulate", "Roll out a fixed policy");
  add_common(sim);
  auto *opt = app.add_subcommand("optimize", "Optimize design and controls");
  add_common(opt);
  opt->add_option("--threads", o.threads, "Worker threads (0: all cores)")
      ->check(CLI::NonNegativeNumber);
  auto *cmp = app.add_subcommand("compare", "Tabulate objectives of runs");
  add_common(cmp);
  cmp->add_option("runs", run_dirs, "Run directories (first is the base)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion &e) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitMissingInput;
  }

  if (!config.empty())
    o.config = fs::path(config);
  if (!profile.empty())
    o.profile = fs::path(profile);
  o.out_dir = out_dir;
  for (auto *sub : {sim, opt, cmp}) {
    if (sub->parsed() && sub->count("--seed") > 0)
      o.seed = seed;
    if (sub->parsed() && sub->count("--starts") > 0)
      o.starts = starts;
  }

  if (sim->parsed())
    return cmd_simulate(o, out, err);
  if (opt->parsed())
    return cmd_optimize(o, out, err);
  std::vector<fs::path> dirs(run_dirs.begin(), run_dirs.end());
  return cmd_compare(dirs, out, err);
}

} // namespace pcmforge::cli
