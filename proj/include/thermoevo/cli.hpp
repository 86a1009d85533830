#pragma once

/**
 * @file cli.hpp
 * @brief Run configuration (strict JSON schema) and the check / patterns / simulate / verify drivers.
 *
 * Exit status: 0 success, 1 input or I/O error, 2 violated verdict in check,
 * 3 verify tolerance exceeded.
 */

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "thermoevo/evolution.hpp"
#include "thermoevo/io.hpp"
#include "thermoevo/material.hpp"
#include "thermoevo/oracle.hpp"
#include "thermoevo/wellposedness.hpp"

namespace thermoevo {

enum class RunMode { Check, Simulate, Verify, Patterns };

inline RunMode run_mode_from_string(std::string_view s) {
  if (s == "check") return RunMode::Check;
  if (s == "simulate") return RunMode::Simulate;
  if (s == "verify") return RunMode::Verify;
  if (s == "patterns") return RunMode::Patterns;
  throw InvalidInput("unknown mode '" + std::string(s) + "'");
}

inline std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::Check: return "check";
    case RunMode::Simulate: return "simulate";
    case RunMode::Verify: return "verify";
    case RunMode::Patterns: return "patterns";
  }
  return "?";
}

struct ForcingConfig {
  std::string kind = "gaussian_pulse";  // gaussian_pulse | delayed_step
  double center = 1.0;
  double width = 0.2;
  double delay = 0.5;
  std::string block = "h";                  // f (v block) | h (Theta block)
  std::string spatial_profile = "bump";     // bump | mode_<k>
  std::optional<double> bump_center, bump_width;
};

struct Tolerances {
  double oracle_error = 1e-2;
  double causality_leakage = 1e-12;
  double bound_slack = 0.05;
  double cutoff = 1e-10;
  int oracle_substeps = 64;
};

struct RunConfig {
  std::optional<ModelSpec> model;
  std::optional<Grid1D> grid;
  double t_max = 0.0, dt = 0.0, rho = 1.0;
  Scheme scheme = Scheme::BackwardEuler;
  bool has_time = false;
  std::vector<ForcingConfig> forcing;
  std::string output;
  Tolerances tolerances;
  Json echo;  // the configuration as read
};

namespace detail {

inline void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidInput("'" + where + "' must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw InvalidInput("unknown key '" + k + "' in " + where);
}

inline double number(const Json& j, const std::string& what) {
  if (!j.is_number()) throw InvalidInput("'" + what + "' must be a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw InvalidInput("'" + what + "' must be finite");
  return x;
}

inline std::string text(const Json& j, const std::string& what) {
  if (!j.is_string()) throw InvalidInput("'" + what + "' must be a string");
  return j.get<std::string>();
}

inline Index count(const Json& j, const std::string& what) {
  if (!j.is_number_integer()) throw InvalidInput("'" + what + "' must be an integer");
  return j.get<Index>();
}

inline ModelSpec parse_model(const Json& j, std::optional<Index> grid_cells) {
  check_keys(j, {"family", "n_cells", "coefficients", "a1", "a2"}, "model");
  if (!j.contains("family")) throw InvalidInput("model.family is required");
  ModelSpec s;
  s.family = family_from_string(text(j["family"], "model.family"));
  s.n_cells = j.contains("n_cells") ? count(j["n_cells"], "model.n_cells") : grid_cells.value_or(1);
  if (j.contains("coefficients")) {
    if (!j["coefficients"].is_object()) throw InvalidInput("model.coefficients must be an object");
    for (const auto& [k, v] : j["coefficients"].items()) {
      const std::string what = "model.coefficients." + k;
      if (v.is_array()) {
        std::vector<double> vals;
        for (const auto& x : v) vals.push_back(number(x, what));
        s.set(k, vals);
      } else {
        s.set(k, number(v, what));
      }
    }
  }
  if (j.contains("a1")) s.custom_a1 = rational_from_json(j["a1"]);
  if (j.contains("a2")) s.custom_a2 = rational_from_json(j["a2"]);
  s.validate();
  return s;
}

inline ForcingConfig parse_forcing(const Json& j, const std::string& where) {
  check_keys(j, {"kind", "center", "width", "delay", "block", "spatial_profile", "bump_center", "bump_width"}, where);
  ForcingConfig f;
  if (j.contains("kind")) f.kind = text(j["kind"], where + ".kind");
  if (f.kind != "gaussian_pulse" && f.kind != "delayed_step") throw InvalidInput(where + ".kind must be gaussian_pulse or delayed_step");
  if (j.contains("center")) f.center = number(j["center"], where + ".center");
  if (j.contains("width")) f.width = number(j["width"], where + ".width");
  if (j.contains("delay")) f.delay = number(j["delay"], where + ".delay");
  if (j.contains("block")) f.block = text(j["block"], where + ".block");
  if (f.block != "f" && f.block != "h") throw InvalidInput(where + ".block must be f or h");
  if (j.contains("spatial_profile")) f.spatial_profile = text(j["spatial_profile"], where + ".spatial_profile");
  if (f.spatial_profile != "bump" && f.spatial_profile.rfind("mode_", 0) != 0)
    throw InvalidInput(where + ".spatial_profile must be bump or mode_<k>");
  if (j.contains("bump_center")) f.bump_center = number(j["bump_center"], where + ".bump_center");
  if (j.contains("bump_width")) f.bump_width = number(j["bump_width"], where + ".bump_width");
  if (!(f.width > 0.0)) throw InvalidInput(where + ".width must be positive");
  return f;
}

}  // namespace detail

inline RunConfig parse_config(const Json& j, RunMode mode) {
  using namespace detail;
  check_keys(j, {"mode", "model", "grid", "time", "forcing", "output", "tolerances"}, "config");
  if (j.contains("mode") && run_mode_from_string(text(j["mode"], "mode")) != mode)
    throw InvalidInput("config mode '" + j["mode"].get<std::string>() + "' differs from the requested mode");
  RunConfig c;
  c.echo = j;
  if (j.contains("grid")) {
    const Json& g = j["grid"];
    check_keys(g, {"L", "n_cells"}, "grid");
    if (!g.contains("L") || !g.contains("n_cells")) throw InvalidInput("grid needs L and n_cells");
    c.grid = Grid1D(number(g["L"], "grid.L"), count(g["n_cells"], "grid.n_cells"));
  }
  if (j.contains("model")) c.model = parse_model(j["model"], c.grid ? std::optional<Index>(c.grid->n_cells) : std::nullopt);
  if (j.contains("time")) {
    const Json& t = j["time"];
    check_keys(t, {"t_max", "dt", "rho", "scheme"}, "time");
    if (!t.contains("t_max") || !t.contains("dt")) throw InvalidInput("time needs t_max and dt");
    c.t_max = number(t["t_max"], "time.t_max");
    c.dt = number(t["dt"], "time.dt");
    if (t.contains("rho")) c.rho = number(t["rho"], "time.rho");
    if (t.contains("scheme")) c.scheme = scheme_from_string(text(t["scheme"], "time.scheme"));
    if (!(c.dt > 0.0) || !(c.t_max > c.dt) || !(c.rho > 0.0)) throw InvalidInput("time: need 0 < dt < t_max and rho > 0");
    c.has_time = true;
  }
  if (j.contains("forcing")) {
    const Json& f = j["forcing"];
    if (f.is_array()) {
      for (std::size_t i = 0; i < f.size(); ++i) c.forcing.push_back(parse_forcing(f[i], "forcing[" + std::to_string(i) + "]"));
    } else {
      c.forcing.push_back(parse_forcing(f, "forcing"));
    }
  }
  if (j.contains("output")) c.output = text(j["output"], "output");
  if (j.contains("tolerances")) {
    const Json& t = j["tolerances"];
    check_keys(t, {"oracle_error", "causality_leakage", "bound_slack", "cutoff", "oracle_substeps"}, "tolerances");
    if (t.contains("oracle_error")) c.tolerances.oracle_error = number(t["oracle_error"], "tolerances.oracle_error");
    if (t.contains("causality_leakage")) c.tolerances.causality_leakage = number(t["causality_leakage"], "tolerances.causality_leakage");
    if (t.contains("bound_slack")) c.tolerances.bound_slack = number(t["bound_slack"], "tolerances.bound_slack");
    if (t.contains("cutoff")) c.tolerances.cutoff = number(t["cutoff"], "tolerances.cutoff");
    if (t.contains("oracle_substeps")) c.tolerances.oracle_substeps = static_cast<int>(count(t["oracle_substeps"], "tolerances.oracle_substeps"));
  }

  const auto need = [&](bool ok, const char* what) {
    if (!ok) throw InvalidInput(std::string("mode ") + std::string(to_string(mode)) + " needs '" + what + "'");
  };
  if (mode != RunMode::Patterns) need(c.model.has_value(), "model");
  if (mode == RunMode::Simulate || mode == RunMode::Verify) {
    need(c.grid.has_value(), "grid");
    need(c.has_time, "time");
    need(!c.forcing.empty(), "forcing");
    if (c.model->n_cells != c.grid->n_cells) throw InvalidInput("model.n_cells must equal grid.n_cells");
  }
  return c;
}

inline RunConfig load_config(const std::string& path, RunMode mode) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config '" + path + "'");
  Json j;
  try {
    j = Json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j, mode);
}

inline std::vector<ForcingTerm> build_forcing(const RunConfig& c) {
  std::vector<ForcingTerm> out;
  for (const auto& f : c.forcing) {
    ForcingTerm t;
    t.block = f.block == "f" ? Block::V : Block::Theta;
    if (f.spatial_profile == "bump") {
      t.profile = bump_profile(*c.grid, f.bump_center.value_or(0.5 * c.grid->length), f.bump_width.value_or(0.25 * c.grid->length));
    } else {
      Index k = 0;
      try {
        k = std::stol(f.spatial_profile.substr(5));
      } catch (const std::exception&) {
        throw InvalidInput("spatial_profile '" + f.spatial_profile + "' has no mode number");
      }
      t.profile = mode_profile(*c.grid, k);
    }
    t.temporal = f.kind == "gaussian_pulse" ? gaussian_pulse(f.center, f.width) : delayed_step(f.delay, f.width);
    out.push_back(std::move(t));
  }
  return out;
}

struct CliOptions {
  RunMode mode = RunMode::Check;
  std::string config_path;
  bool all = false;
  std::string out_dir;
};

namespace detail {

inline std::filesystem::path output_dir(const CliOptions& o, const RunConfig& c, bool required) {
  const std::string d = !o.out_dir.empty() ? o.out_dir : c.output;
  if (d.empty()) {
    if (required) throw InvalidInput("an output directory is required (--out or config 'output')");
    return {};
  }
  std::error_code ec;
  std::filesystem::create_directories(d, ec);
  if (ec) throw IoError("cannot create output directory '" + d + "': " + ec.message());
  return d;
}

struct Simulation {
  MaterialLaw law;
  WellPosednessReport report;
  EvolutionProblem problem;
  Trajectory trajectory;
  Eigen::VectorXd energy;
};

inline Simulation simulate(const RunConfig& c) {
  Simulation s;
  s.law = assemble_material_law(*c.model);
  WellPosednessOptions wo;
  wo.cutoff = c.tolerances.cutoff;
  s.report = check_theorem_2(s.law, wo);
  s.problem = make_problem(s.law, *c.grid, build_forcing(c), c.t_max, c.dt, c.rho, c.scheme);
  s.trajectory = solve(s.problem);
  s.energy = energy_functional(s.trajectory, s.problem.system);
  return s;
}

inline void write_trajectory(const std::filesystem::path& dir, const Simulation& s) {
  const auto& tr = s.trajectory;
  const auto& sys = s.problem.system;
  const auto emit = [&](const std::string& name, const WeightedSignal& field) {
    write_file((dir / (name + ".csv")).string(), [&](std::ostream& os) { write_field_csv(os, field); });
  };
  for (int b = 0; b < 4; ++b) emit(trajectory_field_names[static_cast<std::size_t>(b)], tr.block(b));
  emit("u", displacement(tr));
  emit("epsilon", strain(tr, sys));
  emit("theta", temperature(tr, sys));
  emit("eta", compute_entropy(tr, sys));
  write_file((dir / "energy.csv").string(), [&](std::ostream& os) { write_energy_csv(os, tr, s.energy); });
}

inline Json manifest(const RunConfig& c, const Simulation& s) {
  return Json{{"config", c.echo},
              {"verdict", std::string(to_string(s.report.verdict))},
              {"c_estimate", s.report.c_estimate},
              {"rho_certified", s.report.rho_certified},
              {"rho", c.rho},
              {"scheme", std::string(to_string(c.scheme))},
              {"steps", s.trajectory.steps()},
              {"unknowns", s.problem.system.n_unknowns()},
              {"auxiliary_states", s.problem.system.n_aux()}};
}

inline int run_check(const CliOptions& o, const RunConfig& c, std::ostream& out) {
  WellPosednessOptions wo;
  wo.cutoff = c.tolerances.cutoff;
  const auto rep = check_theorem_2(assemble_material_law(*c.model), wo);
  const std::string text = to_json_text(report_to_json(rep));
  out << text;
  if (const auto dir = output_dir(o, c, false); !dir.empty())
    write_file((dir / "report.json").string(), [&](std::ostream& os) { os << text; });
  return rep.verdict == Verdict::Violated ? 2 : 0;
}

inline int run_patterns(const CliOptions& o, std::ostream& out) {
  if (o.all) {
    bool first = true;
    for (auto f : catalog_families) {
      if (!first) out << '\n';
      first = false;
      out << pattern_report(assemble_material_law(catalog_example(f)));
    }
    return 0;
  }
  if (o.config_path.empty()) throw InvalidInput("patterns needs --config or --all");
  const auto c = load_config(o.config_path, RunMode::Patterns);
  if (!c.model) throw InvalidInput("mode patterns needs 'model' unless --all is given");
  out << pattern_report(assemble_material_law(*c.model));
  return 0;
}

inline int run_simulate(const CliOptions& o, const RunConfig& c, std::ostream& out) {
  const auto dir = output_dir(o, c, true);
  const auto s = simulate(c);
  write_trajectory(dir, s);
  const std::string text = to_json_text(manifest(c, s));
  write_file((dir / "manifest.json").string(), [&](std::ostream& os) { os << text; });
  out << "simulated " << s.trajectory.steps() << " steps into " << dir.string() << '\n';
  return 0;
}

inline int run_verify(const CliOptions& o, const RunConfig& c, std::ostream& out) {
  const auto dir = output_dir(o, c, true);
  const auto s = simulate(c);
  write_trajectory(dir, s);
  const std::string man = to_json_text(manifest(c, s));
  write_file((dir / "manifest.json").string(), [&](std::ostream& os) { os << man; });

  bool passed = true;
  Json result = Json::object();

  Json cmp = Json::object();
  try {
    const auto ref = spectral_solve(s.problem, {.substeps = c.tolerances.oracle_substeps});
    const auto e = compare(s.trajectory, ref);
    for (int b = 0; b < 4; ++b) cmp[trajectory_field_names[static_cast<std::size_t>(b)]] = e.field[static_cast<std::size_t>(b)];
    cmp["overall"] = e.overall;
    cmp["tolerance"] = c.tolerances.oracle_error;
    cmp["passed"] = e.overall <= c.tolerances.oracle_error;
    passed = passed && e.overall <= c.tolerances.oracle_error;
  } catch (const NonconstantCoefficients& e) {
    cmp["skipped"] = true;
    cmp["diagnostic"] = e.what();
  }
  result["comparison"] = cmp;

  Json caus = Json::object();
  const double onset = forcing_onset(s.problem);
  const auto cr = causality_test(s.problem, onset);
  caus["t0"] = onset;
  caus["skipped"] = cr.skipped;
  if (cr.skipped) {
    caus["diagnostic"] = cr.diagnostic;
  } else {
    caus["leakage"] = cr.leakage;
    caus["tolerance"] = c.tolerances.causality_leakage;
    caus["passed"] = cr.leakage <= c.tolerances.causality_leakage;
    passed = passed && cr.leakage <= c.tolerances.causality_leakage;
  }
  result["causality"] = caus;

  Json bound = Json::object();
  try {
    const auto b = solution_bound_check(s.problem, s.report, &s.trajectory, c.tolerances.bound_slack);
    bound["lhs"] = b.lhs;
    bound["rhs"] = b.rhs;
    bound["slack"] = b.slack;
    bound["passed"] = b.holds();
    passed = passed && b.holds();
  } catch (const InvalidInput& e) {
    bound["skipped"] = true;
    bound["diagnostic"] = e.what();
  } catch (const WindowTooShort& e) {
    bound["skipped"] = true;
    bound["diagnostic"] = e.what();
  }
  result["bound"] = bound;
  result["passed"] = passed;

  const std::string text = to_json_text(result);
  write_file((dir / "verify.json").string(), [&](std::ostream& os) { os << text; });
  out << text;
  return passed ? 0 : 3;
}

}  // namespace detail

/// Runs one invocation; errors are reported on @p err and mapped to exit status 1.
inline int run(const CliOptions& o, std::ostream& out, std::ostream& err) {
  try {
    if (o.mode == RunMode::Patterns) return detail::run_patterns(o, out);
    if (o.config_path.empty()) throw InvalidInput("--config is required");
    const auto c = load_config(o.config_path, o.mode);
    switch (o.mode) {
      case RunMode::Check: return detail::run_check(o, c, out);
      case RunMode::Simulate: return detail::run_simulate(o, c, out);
      case RunMode::Verify: return detail::run_verify(o, c, out);
      case RunMode::Patterns: break;
    }
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

}  // namespace thermoevo
