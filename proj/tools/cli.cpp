// Copyright 2026 The qpm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "qpm/io.hpp"
#include "qpm/optimizer.hpp"
#include "qpm/parallel.hpp"
#include "qpm/protocols.hpp"

namespace qpm::cli {

namespace {

namespace fs = std::filesystem;

// A configuration problem detected by the driver itself.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonArgs {
  std::string config;
  std::string format = "csv";
  std::string out;
  int threads = 0;
  std::uint64_t seed = 0;
};

struct SimulateArgs {
  std::string protocol;
  int n = 2;
  int d = 2;
  int points = 9;
  std::string rac = "box";
  bool symmetrize = true;
  int samples = 20;
  int restarts = 4;
};

struct OptimizeArgs {
  std::string task = "teleport";
  int n = 2;
  int d = 2;
  int dc = 0;         // 0: d^2
  int local_dim = 0;  // 0: d for teleport, d^2 for rac
  double visibility = 1.0;
  std::string message = "classical";
  std::string objective = "average";
  int restarts = 20;
  int max_iter = 500;
  int window = 3;
  double window_tol = 1e-7;
  double solver_tol = 1e-8;
  bool optimize_state = false;
};

struct DesignsArgs {
  int d = 2;
};

struct BoundsArgs {
  int n_max = 4;
  int d_max = 4;
};

struct SideFile {
  std::string suffix;
  std::string content;
};

struct Output {
  std::string command;
  std::string name;  // default file stem
  Json config;
  std::uint64_t seed = 0;
  Table table;
  Json json_results;  // replaces the table in JSON mode when set
  Json summary = Json::object();
  std::vector<std::pair<std::string, std::string>> notes;
  Json extra = Json::object();    // extra sections of the JSON document
  std::vector<SideFile> sidecars;  // CSV mode only
  bool needs_file = false;
};

CLI::Option* value(CLI::App* app, const std::string& name, auto& target, const std::string& help) {
  return app->add_option(name, target, help)->capture_default_str()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

void add_common(CLI::App* app, CommonArgs& c) {
  value(app, "--config", c.config, "JSON config file; flags override its keys");
  value(app, "--format", c.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  value(app, "--out", c.out, "output file (default: stdout or $QPM_OUTPUT_DIR)");
  value(app, "--threads", c.threads, "worker thread cap (0 = all cores)")->check(CLI::NonNegativeNumber);
}

Json common_json(const CommonArgs& c) {
  return Json{{"format", c.format}, {"threads", c.threads}, {"seed", c.seed}};
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

std::vector<double> grid(double lo, double hi, int points) {
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
  return g;
}

// ---------------------------------------------------------------------------
// simulate

void fidelity_rows(Output& o, const CorrelationTable& t, const ScenarioSpec& s) {
  o.table.columns = {"input", "y", "fidelity"};
  const auto f = fidelity_table(t, s);
  for (int k = 0; k < s.input_count(); ++k) {
    for (int y = 0; y < s.y_count(); ++y) o.table.add({k, y, f[k][y]});
  }
  o.summary["F_avg"] = avg_fidelity(t, s);
  o.summary["F_worst"] = worst_fidelity(t, s);
}

RacStrategy first_entry_rac(int n, int d) {
  const int q = d * d;
  DeterministicRac part;
  const std::int64_t xs = static_cast<std::int64_t>(std::pow(q, n));
  part.encode.resize(xs);
  for (std::int64_t x = 0; x < xs; ++x) part.encode[x] = unpack_string(x, n, q)[0];
  part.decode.assign(q, std::vector<int>(n, 0));
  for (int m = 0; m < q; ++m) part.decode[m][0] = m;
  return classical_rac(n, d, {part});
}

void simulate(const SimulateArgs& a, const CommonArgs& c, Output& o) {
  o.command = "simulate";
  o.name = "simulate-" + a.protocol;
  o.config = Json{{"protocol", a.protocol}, {"N", a.n}, {"d", a.d}, {"points", a.points}, {"rac", a.rac},
                  {"symmetrize", a.symmetrize}, {"samples", a.samples}, {"restarts", a.restarts}};
  o.config.update(common_json(c));
  o.seed = c.seed;

  require(a.n >= 1, "--N must be at least 1");
  require(a.points >= 2, "--points must be at least 2");
  require(a.samples >= 1, "--samples must be at least 1");
  const auto supported_d = [&] { require(a.d >= 2 && a.d <= 4, "--d must be 2, 3 or 4"); };

  if (a.protocol == "teleport") {
    supported_d();
    const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(1, a.d);
    fidelity_rows(o, correlations_classical(standard_teleport_protocol(a.d), s), s);
  } else if (a.protocol == "universal2q") {
    require(a.n == 2 && a.d == 2, "universal2q is defined for --N 2 --d 2");
    const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(2, 2);
    const ClassicalProtocol p = universal_protocol_2qubit();
    fidelity_rows(o, correlations_classical(p, s), s);
    const UniversalityReport r = check_universality(
        s, [&](const ScenarioSpec& aug) { return correlations_classical(p, aug); }, 100, c.seed);
    o.summary["spread"] = r.spread;
    o.summary["universal"] = r.universal;
  } else if (a.protocol == "rac-compose") {
    supported_d();
    std::optional<RacStrategy> rac;
    if (a.rac == "box") {
      rac = rac_from_box(ns_box(a.n, a.d));
    } else if (a.rac == "classical") {
      rac = first_entry_rac(a.n, a.d);
    } else if (a.rac == "random") {
      rac = random_guess_rac(a.n, a.d);
    } else if (a.rac == "seesaw") {
      require(a.restarts >= 1, "--restarts must be at least 1");
      const int q = a.d * a.d;
      SeesawConfig cfg;
      cfg.restarts = a.restarts;
      cfg.seed = c.seed;
      const RacSeesawResult r = rac_seesaw(a.n, a.d, max_entangled(q).projector(), q, cfg);
      rac = quantum_rac(r.parts);
    } else {
      throw ConfigError("--rac must be one of box, classical, random, seesaw");
    }
    const StochasticTeleportSimulator sim =
        compose_stochastic_teleport(*rac, StochasticTeleportSpec{a.n, a.d}, a.symmetrize);
    const double f = sim.average_fidelity();
    o.table.columns = {"rac", "N", "d", "symmetrized", "P_rac", "F_simulated", "F_formula"};
    o.table.add({a.rac, a.n, a.d, a.symmetrize, rac->success_probability(), f, sim.formula_fidelity()});
    o.summary["P_rac"] = rac->success_probability();
    o.summary["F"] = f;
    o.summary["F_formula"] = sim.formula_fidelity();
  } else if (a.protocol == "ns-box") {
    supported_d();
    const NsBox box = ns_box(a.n, a.d);
    const int q = box.alphabet();
    o.table.columns = {"a", "b", "x", "y", "p"};
    for (std::int64_t x = 0; x < box.x_count(); ++x) {
      for (int y = 0; y < a.n; ++y) {
        for (int ai = 0; ai < q; ++ai) {
          for (int bi = 0; bi < q; ++bi) o.table.add({ai, bi, x, y, box.probability(ai, bi, x, y)});
        }
      }
    }
    o.json_results = to_json(box);
    const StochasticTeleportSimulator sim =
        compose_stochastic_teleport(rac_from_box(box), StochasticTeleportSpec{a.n, a.d}, a.symmetrize);
    o.summary["P_Bell"] = box.bell_value();
    o.summary["signaling_residual"] = box.signaling_residual();
    o.summary["normalization_residual"] = box.normalization_residual();
    o.summary["F"] = sim.average_fidelity();
  } else if (a.protocol == "noisy-sweep") {
    o.table.columns = {"visibility", "F_simulated", "F_formula"};
    for (const NoisyPoint& p : noisy_resource_sweep(grid(0.0, 1.0, a.points))) {
      o.table.add({p.visibility, p.fidelity, noisy_resource_fidelity(p.visibility)});
    }
    o.summary["threshold_visibility"] = 0.5;
    o.summary["F_at_threshold"] = noisy_resource_fidelity(0.5);
  } else if (a.protocol == "mixed-sweep") {
    o.table.columns = {"lambda", "purity", "F_simulated", "F_formula"};
    for (double lambda : grid(0.5, 1.0, a.points)) {
      const double purity = lambda * lambda + (1 - lambda) * (1 - lambda);
      o.table.add({lambda, purity, simulate_mixed_input_fidelity(lambda, a.samples, c.seed),
                   mixed_input_fidelity(purity)});
    }
    o.summary["F_pure"] = mixed_input_fidelity(1.0);
    o.summary["F_maximally_mixed"] = mixed_input_fidelity(0.5);
  } else if (a.protocol == "swap-sweep") {
    o.table.columns = {"theta", "F_y0", "F_y1", "F_simulated", "F_formula"};
    for (double theta : grid(0.0, std::numbers::pi / 4, a.points)) {
      const double f0 = simulate_swap_fidelity(theta, 0);
      const double f1 = simulate_swap_fidelity(theta, 1);
      o.table.add({theta, f0, f1, 0.5 * (f0 + f1), swap_fidelity(theta)});
    }
    o.summary["F_product"] = swap_fidelity(0.0);
    o.summary["F_maximally_entangled"] = swap_fidelity(std::numbers::pi / 4);
  } else {
    throw ConfigError("unknown protocol '" + a.protocol +
                      "' (teleport, universal2q, rac-compose, ns-box, noisy-sweep, mixed-sweep, swap-sweep)");
  }
}

// ---------------------------------------------------------------------------
// optimize

template <typename Protocol>
void seesaw_output(Output& o, const SeesawResult<Protocol>& res, const ScenarioSpec& s) {
  o.table.columns = {"restart", "seed", "fidelity", "outer_iterations", "converged", "steps"};
  for (const auto& run : res.runs) {
    o.table.add({run.restart, run.seed, run.fidelity, run.outer_iterations, run.converged,
                 static_cast<int>(run.trace.size())});
  }
  Table trace;
  trace.columns = {"restart", "stage", "step", "objective"};
  for (const auto& run : res.runs) {
    for (std::size_t i = 0; i < run.warmup_trace.size(); ++i) {
      trace.add({run.restart, "warmup", static_cast<int>(i), run.warmup_trace[i]});
    }
    for (std::size_t i = 0; i < run.trace.size(); ++i) trace.add({run.restart, "main", static_cast<int>(i), run.trace[i]});
  }
  const auto& best = res.best_run();
  o.summary["best"] = best.fidelity;
  o.summary["best_restart"] = best.restart;
  o.summary["spread"] = res.spread();
  o.summary["F_avg"] = protocol_objective(best.protocol, s, Objective::kAverage);
  o.summary["F_worst"] = protocol_objective(best.protocol, s, Objective::kWorst);

  const Json protocol = to_json(best.protocol);
  std::ostringstream csv;
  trace.write_csv(csv);
  o.sidecars.push_back({".trace.csv", csv.str()});
  o.sidecars.push_back({".protocol.json", protocol.dump(2) + "\n"});
  o.extra["trace"] = trace.to_json();
  o.extra["protocol"] = protocol;
}

void optimize(const OptimizeArgs& a, const CommonArgs& c, Output& o) {
  o.command = "optimize";
  o.name = "optimize-" + a.task + "-seed" + std::to_string(c.seed);
  o.needs_file = true;

  require(a.d >= 2, "--d must be at least 2");
  require(a.n >= 1, "--N must be at least 1");
  require(a.visibility >= 0.0 && a.visibility <= 1.0, "--visibility must lie in [0, 1]");
  const int dc = a.dc > 0 ? a.dc : a.d * a.d;
  const int local = a.local_dim > 0 ? a.local_dim : (a.task == "rac" ? a.d * a.d : a.d);

  SeesawConfig cfg;
  cfg.max_outer_iterations = a.max_iter;
  cfg.window = a.window;
  cfg.window_tolerance = a.window_tol;
  cfg.restarts = a.restarts;
  cfg.seed = c.seed;
  cfg.solver_tolerance = a.solver_tol;
  cfg.optimize_state = a.optimize_state;
  try {
    cfg.objective = objective_from_string(a.objective);
  } catch (const ValueError& e) {
    throw ConfigError(e.what());
  }
  cfg.validate();

  o.config = Json{{"task", a.task}, {"N", a.n}, {"d", a.d}, {"dc", dc}, {"local-dim", local},
                  {"visibility", a.visibility}, {"message", a.message}, {"objective", to_string(cfg.objective)},
                  {"restarts", a.restarts}, {"max-iter", a.max_iter}, {"window", a.window},
                  {"window-tol", a.window_tol}, {"solver-tol", a.solver_tol}, {"optimize-state", a.optimize_state}};
  o.config.update(common_json(c));
  o.seed = c.seed;

  if (a.task == "teleport") {
    MessageKind kind;
    if (a.message == "classical") {
      kind = MessageKind::kClassical;
    } else if (a.message == "quantum") {
      kind = MessageKind::kQuantum;
    } else {
      throw ConfigError("--message must be classical or quantum");
    }
    const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(a.n, a.d);
    const ResourceSpec r = a.visibility == 1.0 ? ResourceSpec::maximally_entangled(local, dc, kind)
                                               : ResourceSpec::isotropic(local, a.visibility, dc, kind);
    if (kind == MessageKind::kClassical) {
      seesaw_output(o, seesaw_run(s, r, cfg), s);
    } else {
      seesaw_output(o, seesaw_run_quantum(s, r, cfg), s);
    }
  } else if (a.task == "rac") {
    require(a.message == "classical", "the rac task uses classical messages");
    const Operator state = a.visibility == 1.0 ? max_entangled(local).projector()
                                               : ResourceSpec::isotropic(local, a.visibility, dc,
                                                                         MessageKind::kClassical).shared_state;
    const RacSeesawResult res = rac_seesaw(a.n, a.d, state, dc, cfg);
    o.table.columns = {"restart", "seed", "success"};
    for (std::size_t i = 0; i < res.restart_values.size(); ++i) {
      o.table.add({static_cast<int>(i), derive_seed(c.seed, i), res.restart_values[i]});
    }
    Table trace;
    trace.columns = {"restart", "stage", "step", "objective"};
    for (std::size_t i = 0; i < res.trace.size(); ++i) trace.add({res.restart, "main", static_cast<int>(i), res.trace[i]});
    const RacBound bound = rac_bound(a.n, a.d);
    o.summary["best"] = res.success;
    o.summary["best_restart"] = res.restart;
    o.summary["P_bound"] = bound.success;
    o.summary["F_formula"] = (a.d * res.success + 1.0) / (a.d + 1.0);
    o.summary["adaptive"] = is_adaptive(res.parts);
    const Json protocol = to_json(res.parts);
    std::ostringstream csv;
    trace.write_csv(csv);
    o.sidecars.push_back({".trace.csv", csv.str()});
    o.sidecars.push_back({".protocol.json", protocol.dump(2) + "\n"});
    o.extra["trace"] = trace.to_json();
    o.extra["protocol"] = protocol;
  } else {
    throw ConfigError("--task must be teleport or rac");
  }
}

// ---------------------------------------------------------------------------
// designs, bounds

void designs(const DesignsArgs& a, const CommonArgs& c, Output& o) {
  o.command = "designs";
  o.name = "designs-d" + std::to_string(a.d);
  o.config = Json{{"d", a.d}};
  o.config.update(common_json(c));
  o.seed = c.seed;
  require(a.d >= 2 && a.d <= 4, "SIC vectors are available for --d 2, 3 and 4 only");

  const Design2& sic = sic_povm(a.d);
  o.table.columns = {"vector", "component", "re", "im"};
  for (std::size_t k = 0; k < sic.vectors.size(); ++k) {
    const Vector& v = sic.vectors[k].amplitudes();
    for (Eigen::Index i = 0; i < v.size(); ++i) o.table.add({static_cast<int>(k), static_cast<int>(i), v[i].real(), v[i].imag()});
  }
  const double dev = equiangularity_deviation(sic);
  const double res = second_moment_residual(sic);
  if (dev >= 1e-8 || res >= 1e-8) throw NumericalError("SIC verification failed");
  o.summary["vectors"] = static_cast<int>(sic.vectors.size());
  o.summary["equiangularity_deviation"] = dev;
  o.summary["design_residual"] = res;
  o.notes.emplace_back("equiangularity_deviation", format_real(dev));
  o.notes.emplace_back("design_residual", format_real(res));
}

void bounds(const BoundsArgs& a, const CommonArgs& c, Output& o) {
  o.command = "bounds";
  o.name = "bounds";
  o.config = Json{{"N-max", a.n_max}, {"d-max", a.d_max}};
  o.config.update(common_json(c));
  o.seed = c.seed;
  require(a.n_max >= 1, "--N-max must be at least 1");
  require(a.d_max >= 2, "--d-max must be at least 2");
  o.table.columns = {"N", "d", "P_bound", "F_bound"};
  for (int n = 1; n <= a.n_max; ++n) {
    for (int d = 2; d <= a.d_max; ++d) {
      const RacBound b = rac_bound(n, d);
      o.table.add({n, d, b.success, b.fidelity});
    }
  }
  o.summary["rows"] = static_cast<int>(o.table.rows.size());
}

// ---------------------------------------------------------------------------
// output

std::string summary_line(const Output& o) {
  std::string line = o.name + ":";
  bool first = true;
  for (const auto& [key, val] : o.summary.items()) {
    line += (first ? " " : ", ") + key + " = " + csv_cell(val);
    first = false;
  }
  return line;
}

std::optional<fs::path> destination(const Output& o, const CommonArgs& c) {
  const std::string ext = c.format == "json" ? ".json" : ".csv";
  if (!c.out.empty()) return fs::path(c.out);
  if (const char* dir = std::getenv("QPM_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
    return fs::path(dir) / (o.name + ext);
  }
  if (o.needs_file && c.format == "csv") return fs::path(o.name + ext);
  return std::nullopt;
}

void write_document(const Output& o, const CommonArgs& c, std::ostream& out) {
  if (c.format == "json") {
    Json doc;
    doc["qpm"] = kVersion;
    doc["command"] = o.command;
    doc["config"] = rounded(o.config);
    doc["seed"] = o.seed;
    doc["summary"] = rounded(o.summary);
    doc["results"] = o.json_results.is_null() ? o.table.to_json() : o.json_results;
    for (const auto& [key, val] : o.extra.items()) doc[key] = val;
    out << doc.dump(2) << '\n';
    return;
  }
  out << "# qpm " << kVersion << ' ' << o.command << '\n';
  out << "# config: " << rounded(o.config).dump() << '\n';
  out << "# seed: " << o.seed << '\n';
  for (const auto& [key, val] : o.notes) out << "# " << key << ": " << val << '\n';
  o.table.write_csv(out);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw ConfigError("failed writing '" + path.string() + "'");
}

void emit(const Output& o, const CommonArgs& c, std::ostream& out, std::ostream& err) {
  std::ostringstream doc;
  write_document(o, c, doc);
  const auto path = destination(o, c);
  if (!path) {
    out << doc.str();
    err << summary_line(o) << '\n';
    return;
  }
  write_text(*path, doc.str());
  if (c.format == "csv") {
    fs::path stem = *path;
    stem.replace_extension();
    for (const SideFile& s : o.sidecars) {
      // sidecars carry the same provenance lines as the main table
      std::string text = s.content;
      if (s.suffix.ends_with(".csv")) {
        text = "# qpm " + std::string(kVersion) + ' ' + o.command + "\n# config: " + rounded(o.config).dump() +
               "\n# seed: " + std::to_string(o.seed) + '\n' + text;
      }
      write_text(fs::path(stem.string() + s.suffix), text);
    }
  }
  out << summary_line(o) << '\n';
}

// ---------------------------------------------------------------------------
// config files

std::string find_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].starts_with("--config=")) return args[i].substr(9);
  }
  return {};
}

// Turns the config file into flag tokens placed before the command-line flags,
// so that flags given explicitly take precedence.
std::vector<std::string> config_tokens(const std::string& path, CLI::App* sub) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  Json j;
  try {
    j = Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  std::vector<std::string> tokens;
  for (const auto& [key, val] : j.items()) {
    if (key == "config" || sub->get_option_no_throw("--" + key) == nullptr) {
      throw ConfigError("unknown config key '" + key + "' for " + sub->get_name());
    }
    std::string text;
    if (val.is_string()) {
      text = val.get<std::string>();
    } else if (val.is_boolean()) {
      text = val.get<bool>() ? "true" : "false";
    } else if (val.is_number()) {
      text = val.dump();
    } else {
      throw ConfigError("config key '" + key + "' must be a string, number or boolean");
    }
    tokens.push_back("--" + key);
    tokens.push_back(text);
  }
  return tokens;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"qpm: prepare-and-measure scenarios with quantum inputs", "qpm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  CommonArgs common;
  SimulateArgs sim;
  OptimizeArgs opt;
  DesignsArgs des;
  BoundsArgs bnd;

  CLI::App* simulate_cmd = app.add_subcommand("simulate", "run an analytic protocol and tabulate its fidelities");
  add_common(simulate_cmd, common);
  value(simulate_cmd, "--seed", common.seed, "seed for random spot checks");
  value(simulate_cmd, "--protocol", sim.protocol,
        "teleport | universal2q | rac-compose | ns-box | noisy-sweep | mixed-sweep | swap-sweep");
  value(simulate_cmd, "--N", sim.n, "number of quantum inputs");
  value(simulate_cmd, "--d", sim.d, "input dimension");
  value(simulate_cmd, "--points", sim.points, "grid points for sweeps");
  value(simulate_cmd, "--rac", sim.rac, "code for rac-compose: box | classical | random | seesaw");
  value(simulate_cmd, "--symmetrize", sim.symmetrize, "relabel uniformly before composing");
  value(simulate_cmd, "--samples", sim.samples, "random inputs per mixed-sweep point");
  value(simulate_cmd, "--restarts", sim.restarts, "see-saw restarts for --rac seesaw");

  CLI::App* optimize_cmd = app.add_subcommand("optimize", "see-saw search for good protocols");
  add_common(optimize_cmd, common);
  value(optimize_cmd, "--seed", common.seed, "master seed (required)")->required();
  value(optimize_cmd, "--task", opt.task, "teleport | rac");
  value(optimize_cmd, "--N", opt.n, "number of quantum inputs (or RAC string length)");
  value(optimize_cmd, "--d", opt.d, "input dimension");
  value(optimize_cmd, "--dc", opt.dc, "message dimension (0 = d^2)");
  value(optimize_cmd, "--local-dim", opt.local_dim, "dimension of each half of the shared state (0 = default)");
  value(optimize_cmd, "--visibility", opt.visibility, "isotropic visibility of the shared state");
  value(optimize_cmd, "--message", opt.message, "classical | quantum");
  value(optimize_cmd, "--objective", opt.objective, "average | worst");
  value(optimize_cmd, "--restarts", opt.restarts, "random restarts");
  value(optimize_cmd, "--max-iter", opt.max_iter, "outer iteration cap per restart");
  value(optimize_cmd, "--window", opt.window, "stalled iterations before stopping");
  value(optimize_cmd, "--window-tol", opt.window_tol, "gain below which an iteration counts as stalled");
  value(optimize_cmd, "--solver-tol", opt.solver_tol, "SDP solver tolerance");
  value(optimize_cmd, "--optimize-state", opt.optimize_state, "also optimise the shared state");

  CLI::App* designs_cmd = app.add_subcommand("designs", "emit and verify SIC 2-designs");
  add_common(designs_cmd, common);
  value(designs_cmd, "--seed", common.seed, "recorded only");
  value(designs_cmd, "--d", des.d, "dimension (2, 3 or 4)");

  CLI::App* bounds_cmd = app.add_subcommand("bounds", "tabulate the RAC and fidelity bounds");
  add_common(bounds_cmd, common);
  value(bounds_cmd, "--seed", common.seed, "recorded only");
  value(bounds_cmd, "--N-max", bnd.n_max, "largest N");
  value(bounds_cmd, "--d-max", bnd.d_max, "largest d");

  std::vector<std::string> tokens = args;
  try {
    const std::string config = find_config(args);
    if (!config.empty() && !args.empty()) {
      CLI::App* sub = app.get_subcommand_no_throw(args.front());
      if (sub == nullptr) throw ConfigError("--config must follow a command");
      std::vector<std::string> injected = config_tokens(config, sub);
      tokens.insert(tokens.begin() + 1, injected.begin(), injected.end());
    }
    std::vector<std::string> reversed(tokens.rbegin(), tokens.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (common.threads > 0) set_max_threads(common.threads);
    Output o;
    if (simulate_cmd->parsed()) {
      if (sim.protocol.empty()) throw ConfigError("--protocol is required");
      simulate(sim, common, o);
    } else if (optimize_cmd->parsed()) {
      optimize(opt, common, o);
    } else if (designs_cmd->parsed()) {
      designs(des, common, o);
    } else {
      bounds(bnd, common, o);
    }
    emit(o, common, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ValueError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DimensionError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace qpm::cli
