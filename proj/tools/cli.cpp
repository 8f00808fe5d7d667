// Batch entry point: run, compare, sweep, check-bounds, gen-scenario.
//
// Every verb accepts --config FILE with one `key = value` per line, keys being
// the long option names without dashes (e.g. `gamma = 0.02`). Command-line
// flags take precedence over the file.
//
// Exit status: 0 success, 1 configuration or input error, 2 comfort or
// battery invariant violated during a run.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ems/baselines.hpp"
#include "ems/report.hpp"
#include "ems/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace ems;

namespace {

struct Options {
  std::string scenario;
  std::uint64_t seed = 1;
  std::size_t slots = 72;
  std::size_t n = 5;
  std::string out = "ems_out";
  // Overrides are applied only when the flag was given.
  std::map<std::string, double> values;
  std::map<std::string, CLI::Option*> given;
  bool no_refine = false;
  double rho = 1e-3;
  int max_iters = 500;
  double min_gap = 0.01;
};

void add_override(CLI::App* app, Options& o, const std::string& name, const std::string& help) {
  o.values[name] = 0.0;
  o.given[name] = app->add_option("--" + name, o.values[name], help);
}

// The file itself is expanded into flags by expand_config before parsing;
// the option is registered so that it shows in --help and is accepted.
void add_config_option(CLI::App* app) {
  app->add_option("--config", "key = value file with defaults for any long option")
      ->check(CLI::ExistingFile);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool flag_given(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

// Appends `--key value` for every config-file entry whose flag is absent from
// the command line. Boolean entries become bare flags when true.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t j = 0; j < args.size(); ++j) {
    if (args[j] == "--config" && j + 1 < args.size()) path = args[j + 1];
    if (args[j].rfind("--config=", 0) == 0) path = args[j].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  int number = 0;
  std::vector<std::string> extra;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(number) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front())
      value = value.substr(1, value.size() - 2);
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    if (key.empty() || key == "config" || flag_given(args, flag)) continue;
    if (value == "true") {
      extra.push_back(flag);
    } else if (value != "false") {
      extra.push_back(flag);
      extra.push_back(value);
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

bool has(const Options& o, const std::string& name) {
  const auto it = o.given.find(name);
  return it != o.given.end() && it->second->count() > 0;
}

void add_scenario_options(CLI::App* app, Options& o) {
  add_config_option(app);
  auto* file = app->add_option("--scenario", o.scenario, "scenario CSV (default: synthetic)")
                   ->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "synthetic scenario seed")->capture_default_str()
      ->excludes(file);
  app->add_option("--slots", o.slots, "synthetic scenario length in hourly slots")
      ->capture_default_str()->excludes(file)->check(CLI::PositiveNumber);
  app->add_option("--n", o.n, "synthetic scenario nanogrid count")
      ->capture_default_str()->excludes(file)->check(CLI::PositiveNumber);
}

void add_model_options(CLI::App* app, Options& o) {
  add_override(app, o, "epsilon", "inertial coefficient for every nanogrid");
  add_override(app, o, "eta", "HVAC efficiency (degF/kWh)");
  add_override(app, o, "e-max", "HVAC consumption limit per slot (kWh)");
  add_override(app, o, "t-min", "comfort band lower bound (degF)");
  add_override(app, o, "t-max", "comfort band upper bound (degF)");
  add_override(app, o, "l-max", "nanogrid injection limit per slot (kWh)");
  add_override(app, o, "gamma", "discomfort weight (cent/degF^2)");
  add_override(app, o, "e-min", "battery lower bound (kWh)");
  add_override(app, o, "e-cap", "battery upper bound (kWh)");
  add_override(app, o, "u-cmax", "battery charge limit per slot (kWh)");
  add_override(app, o, "u-dmax", "battery discharge limit per slot (kWh)");
  add_override(app, o, "c-b", "battery wear coefficient (cent/kWh^2)");
  add_override(app, o, "v", "Lyapunov weight V_i for every nanogrid (default V_i^max)");
  add_override(app, o, "gamma-shift", "queue shift Gamma_i for every nanogrid (default Gamma_i^min)");
  add_override(app, o, "v-p", "PME Lyapunov weight V_P (default V_P^max)");
  add_override(app, o, "theta", "battery queue shift theta (default theta^min)");
}

void add_game_options(CLI::App* app, Options& o) {
  app->add_option("--rho", o.rho, "per-coordinate convergence threshold")->capture_default_str();
  app->add_option("--max-iters", o.max_iters, "iteration cap per slot")->capture_default_str();
  app->add_option("--min-gap", o.min_gap, "enforced p_s - p_b")->capture_default_str();
  app->add_flag("--no-refine", o.no_refine, "skip the exact coordinate refinement");
}

void add_output_option(CLI::App* app, Options& o) {
  app->add_option("--out", o.out, "output directory")->capture_default_str();
}

NanogridParams nanogrid_params(const Options& o) {
  NanogridParams p;
  if (has(o, "epsilon")) p.epsilon = o.values.at("epsilon");
  if (has(o, "eta")) p.eta = o.values.at("eta");
  if (has(o, "e-max")) p.e_max = o.values.at("e-max");
  if (has(o, "t-min")) p.t_min = o.values.at("t-min");
  if (has(o, "t-max")) p.t_max = o.values.at("t-max");
  if (has(o, "l-max")) p.l_max = o.values.at("l-max");
  if (has(o, "gamma")) p.gamma = o.values.at("gamma");
  p.validate();
  return p;
}

PmeParams pme_params(const Options& o) {
  PmeParams p;
  if (has(o, "e-min")) p.e_min = o.values.at("e-min");
  if (has(o, "e-cap")) p.e_max_cap = o.values.at("e-cap");
  if (has(o, "u-cmax")) p.u_cmax = o.values.at("u-cmax");
  if (has(o, "u-dmax")) p.u_dmax = o.values.at("u-dmax");
  if (has(o, "c-b")) p.c_b = o.values.at("c-b");
  p.validate();
  return p;
}

SyntheticSpec synthetic_spec(const Options& o) {
  SyntheticSpec s;
  s.seed = o.seed;
  s.slots = o.slots;
  s.n = o.n;
  return s;
}

Experiment experiment(const Options& o) {
  const NanogridParams base = nanogrid_params(o);
  const PmeParams pme = pme_params(o);
  Experiment ex;
  if (!o.scenario.empty()) {
    ex = make_experiment(load_scenario(o.scenario), base, pme);
  } else {
    ex = make_experiment(synthetic_spec(o), base, pme);
    if (has(o, "epsilon")) {
      // An explicit epsilon replaces the drawn ones.
      std::vector<NanogridParams> params(ex.scenario.n, base);
      ex.setup = make_default_setup(ex.scenario, params, pme);
    }
  }
  for (auto& c : ex.setup.nanogrid_controls) {
    if (has(o, "v")) c.v = o.values.at("v");
    if (has(o, "gamma-shift")) c.gamma_shift = o.values.at("gamma-shift");
  }
  if (has(o, "v") && !has(o, "gamma-shift")) {
    // Gamma_i^min depends on V_i; keep the default policy consistent.
    for (std::size_t i = 0; i < ex.scenario.n; ++i)
      ex.setup.nanogrid_controls[i].gamma_shift =
          compute_bounds(ex.setup.nanogrids[i], ex.setup.nanogrid_controls[i].v,
                         follower_envelope(ex.scenario, i))
              .gamma_min;
  }
  if (has(o, "v-p")) ex.setup.pme_control.v_p = o.values.at("v-p");
  if (has(o, "theta")) ex.setup.pme_control.theta = o.values.at("theta");
  if (has(o, "v-p") && !has(o, "theta"))
    ex.setup.pme_control.theta =
        compute_bounds(ex.setup.pme, ex.setup.pme_control.v_p, leader_envelope(ex.scenario))
            .theta_min;
  validate_setup(ex.scenario, ex.setup);
  return ex;
}

GameConfig game_config(const Options& o, bool trace) {
  GameConfig c;
  c.rho = o.rho;
  c.max_iters = o.max_iters;
  c.min_gap = o.min_gap;
  c.refine = !o.no_refine;
  c.record_trace = trace;
  c.validate();
  return c;
}

std::ofstream open_output(const Options& o, const std::string& name) {
  fs::create_directories(o.out);
  const fs::path path = fs::path(o.out) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

int report_violations(const RunReport& r, const std::string& label) {
  if (r.comfort_violations == 0 && r.battery_violations == 0) return 0;
  std::cerr << "error: " << label << ": " << r.comfort_violations << " comfort and "
            << r.battery_violations << " battery bound violations\n";
  return 2;
}

int cmd_run(const Options& o, bool trace, bool timing, bool check_bounds) {
  const Experiment ex = experiment(o);
  if (check_bounds) {
    write_bounds(compute_all_bounds(ex), std::cout);
    return 0;
  }
  const RunReport r = run(ex.scenario, ex.setup, game_config(o, trace));
  {
    auto out = open_output(o, "summary.txt");
    write_summary(r, out);
  }
  open_output(o, "summary.json") << summary_json(r);
  {
    auto out = open_output(o, "series.csv");
    write_series_csv(r, out);
  }
  if (trace) {
    auto out = open_output(o, "trace.csv");
    for (const auto& s : r.slots) write_trace_csv(s.trace, s.slot, out, s.slot == 0);
  }
  if (timing) {
    auto out = open_output(o, "timing.csv");
    out << "slot,wall_ms\n";
    for (const auto& s : r.slots) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%zu,%.3f\n", s.slot, s.wall_ms);
      out << buf;
    }
  }
  write_summary(r, std::cout);
  if (r.nonconverged_slots > 0)
    std::cerr << "warning: " << r.nonconverged_slots << " slots hit the iteration cap\n";
  return report_violations(r, "run");
}

int cmd_compare(const Options& o, const std::vector<std::string>& cases) {
  const Experiment ex = experiment(o);
  std::vector<CaseId> ids;
  for (const auto& c : cases) ids.push_back(parse_case(c));
  if (ids.empty()) ids = all_cases();
  const auto rows = compare_cases(ex, ids, game_config(o, false));
  {
    auto out = open_output(o, "comparison.csv");
    write_comparison_csv(rows, out);
  }
  for (const auto& row : rows) {
    auto out = open_output(o, "summary_case" + std::to_string(case_number(row.id)) + ".txt");
    write_summary(row.report, out);
  }
  write_comparison_table(rows, std::cout);
  int status = 0;
  for (const auto& row : rows)
    status = std::max(status, report_violations(row.report, case_name(row.id)));
  return status;
}

int cmd_sweep(const Options& o, const std::string& param, const std::vector<double>& values,
              bool welfare, bool timing) {
  if (!o.scenario.empty())
    throw ConfigError("sweep needs a synthetic scenario; drop --scenario");
  if (values.empty()) throw ConfigError("--values needs at least one value");
  const SweepParameter p = parse_sweep_parameter(param);
  if ((p == SweepParameter::epsilon && has(o, "epsilon")) ||
      (p == SweepParameter::gamma && has(o, "gamma")) ||
      (p == SweepParameter::t_min && has(o, "t-min")) ||
      (p == SweepParameter::t_max && has(o, "t-max")))
    throw ConfigError("the swept parameter cannot also be overridden");
  if (has(o, "v") || has(o, "gamma-shift") || has(o, "v-p") || has(o, "theta"))
    throw ConfigError("sweeps use the default controls at every point");
  const auto points = sweep(p, values, synthetic_spec(o), nanogrid_params(o), pme_params(o),
                            game_config(o, false), welfare);
  {
    auto out = open_output(o, "sweep_" + sweep_parameter_name(p) + ".csv");
    write_sweep_csv(points, p, out, timing);
  }
  write_sweep_csv(points, p, std::cout, timing);
  int status = 0;
  for (const auto& pt : points) {
    if (pt.skipped) {
      std::cerr << "warning: skipped " << sweep_parameter_name(p) << " = " << pt.value << ": "
                << pt.note << '\n';
      continue;
    }
    status = std::max(status, report_violations(pt.proposed, "sweep point"));
  }
  return status;
}

int cmd_gen(const Options& o, const std::string& output) {
  SyntheticSpec spec = synthetic_spec(o);
  spec.reference = nanogrid_params(o);
  const SyntheticScenario gen = generate_synthetic(spec);
  save_scenario(gen.scenario, output);
  for (std::size_t i = 0; i < gen.epsilon.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "epsilon_%zu = %.17g\n", i + 1, gen.epsilon[i]);
    std::cout << buf;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online energy management for HVAC nanogrids with a shared PME"};
  app.require_subcommand(1);

  Options o;
  bool trace = false;
  bool timing = false;
  bool check_bounds = false;
  auto* run_cmd = app.add_subcommand("run", "simulate the proposed scheme");
  add_scenario_options(run_cmd, o);
  add_model_options(run_cmd, o);
  add_game_options(run_cmd, o);
  add_output_option(run_cmd, o);
  run_cmd->add_flag("--trace", trace, "write per-iteration traces to trace.csv");
  run_cmd->add_flag("--timing", timing, "write per-slot wall time to timing.csv");
  run_cmd->add_flag("--check-bounds", check_bounds, "print control bounds and exit");

  Options oc;
  std::vector<std::string> cases;
  auto* compare_cmd = app.add_subcommand("compare", "run several cases on one scenario");
  add_scenario_options(compare_cmd, oc);
  add_model_options(compare_cmd, oc);
  add_game_options(compare_cmd, oc);
  add_output_option(compare_cmd, oc);
  compare_cmd->add_option("--cases", cases, "case numbers or names (default: all)")
      ->delimiter(',');

  Options os;
  std::string param;
  std::vector<double> values;
  bool welfare = false;
  bool sweep_timing = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "vary one parameter on a synthetic scenario");
  add_scenario_options(sweep_cmd, os);
  add_model_options(sweep_cmd, os);
  add_game_options(sweep_cmd, os);
  add_output_option(sweep_cmd, os);
  sweep_cmd->add_option("--param", param, "gamma, epsilon, t_min, t_max or n")->required();
  sweep_cmd->add_option("--values", values, "comma-separated values")
      ->required()->delimiter(',');
  sweep_cmd->add_flag("--welfare", welfare, "also run the social welfare case");
  sweep_cmd->add_flag("--timing", sweep_timing, "add a wall_ms column");

  Options ob;
  auto* bounds_cmd = app.add_subcommand("check-bounds", "print control bounds without running");
  add_scenario_options(bounds_cmd, ob);
  add_model_options(bounds_cmd, ob);

  Options og;
  std::string output;
  auto* gen_cmd = app.add_subcommand("gen-scenario", "write a synthetic scenario CSV");
  add_config_option(gen_cmd);
  gen_cmd->add_option("--seed", og.seed, "generator seed")->capture_default_str();
  gen_cmd->add_option("--slots", og.slots, "length in hourly slots")
      ->capture_default_str()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--n", og.n, "nanogrid count")->capture_default_str()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("-o,--output", output, "destination CSV")->required();
  add_model_options(gen_cmd, og);

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::vector<const char*> ptrs;
  for (const auto& a : args) ptrs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(ptrs.size()), ptrs.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return cmd_run(o, trace, timing, check_bounds);
    if (*compare_cmd) return cmd_compare(oc, cases);
    if (*sweep_cmd) return cmd_sweep(os, param, values, welfare, sweep_timing);
    if (*bounds_cmd) {
      write_bounds(compute_all_bounds(experiment(ob)), std::cout);
      return 0;
    }
    if (*gen_cmd) return cmd_gen(og, output);
  } catch (const ParseError& e) {
    std::cerr << "error: scenario line " << e.line() << ", column " << e.column() << ": "
              << e.what() << '\n';
    return 1;
  } catch (const InvariantError& e) {
    std::cerr << "error: slot " << e.slot() << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
