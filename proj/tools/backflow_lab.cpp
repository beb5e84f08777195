// Copyright 2026 The backflow-lab Authors
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

// backflow-lab: batch runner for correlation-backflow scans.
//
//   backflow-lab run <config.json>       scan, then write CSV / JSON / SVG
//   backflow-lab validate <config.json>  parse and check only
//   backflow-lab presets                 list dynamics and ensemble presets
//
// Exit codes: 0 ok, 2 invalid config, 3 solver did not converge somewhere
// (outputs are still written), 4 I/O failure.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "backflow/errors.hpp"
#include "backflow/io.hpp"
#include "backflow/parallel.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitIo = 4;

void print_summary(const backflow::io::ReportBundle& b) {
  std::printf("dynamics: %s\n", b.dynamics_kind.c_str());
  if (b.search)
    std::printf("searched ensemble on [%.6g, %.6g]: delta P_g = %.6g\n", b.search->t_early,
                b.search->t_late, b.search->delta_pg);
  for (const auto& r : b.reports) {
    std::size_t non_cp = 0, mismatched = 0;
    for (const auto& s : r.steps) {
      if (s.verdict == backflow::CpVerdict::kNonCp) ++non_cp;
      if (!s.matches_cp) ++mismatched;
    }
    std::printf("lambda=%.6g: %zu backflow interval(s), %zu non-CP step(s), %zu mismatch(es)%s\n",
                r.lambda, r.backflow_intervals.size(), non_cp, mismatched,
                r.converged ? "" : " [not converged]");
    for (const auto& iv : r.backflow_intervals)
      std::printf("  [%.6g, %.6g]  delta C = %.6g\n", iv.t_early, iv.t_late, iv.delta_c);
  }
}

int cmd_run(const std::string& path, bool quiet) {
  using namespace backflow;
  io::ExperimentConfig config;
  try {
    config = io::load_config(path);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kExitConfig;
  }

  io::ReportBundle bundle;
  bool converged = true;
  try {
    bundle = io::run_experiment(config);
    converged = bundle.converged;
  } catch (const NoConvergenceError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitNoConvergence;
  } catch (const Error& e) {
    // Domain errors here come from the inputs (e.g. a rate giving a non-CPTP map).
    std::cerr << "invalid experiment: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (!config.csv_path.empty()) io::emit_csv(bundle, config.csv_path);
    if (!config.json_path.empty()) io::emit_json(bundle, config.json_path);
    if (!config.svg_path.empty()) io::emit_svg(bundle, config.svg_path);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  if (!quiet) print_summary(bundle);
  if (!converged) {
    std::cerr << "warning: some solves did not reach the gap tolerance (see the gap column)\n";
    return kExitNoConvergence;
  }
  return kExitOk;
}

int cmd_validate(const std::string& path) {
  try {
    const auto config = backflow::io::load_config(path);
    std::printf("ok: %s, %zu grid points, %zu lambda value(s)\n", config.dynamics_kind.c_str(),
                config.n_points, config.lambda_list.size());
    return kExitOk;
  } catch (const backflow::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const backflow::Error& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kExitConfig;
  }
}

int cmd_presets() {
  std::printf("dynamics kinds:\n");
  for (const auto& k : backflow::dynamics_kind_names()) std::printf("  %s\n", k.c_str());
  std::printf("base ensembles (probe.base_ensemble = \"preset:<name>\" or \"search\"):\n");
  for (const auto& e : backflow::preset_ensemble_names()) std::printf("  %s\n", e.c_str());
  std::printf("workers: %zu (BACKFLOW_LAB_THREADS)\n", backflow::worker_count());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlation-backflow witness for qubit dynamics"};
  app.require_subcommand(1);

  std::string run_path, validate_path;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run a scan and write the configured outputs");
  run->add_option("config", run_path, "Experiment config (JSON)")->required();
  run->add_flag("-q,--quiet", quiet, "Suppress the summary on stdout");
  auto* validate = app.add_subcommand("validate", "Parse and validate a config");
  validate->add_option("config", validate_path, "Experiment config (JSON)")->required();
  auto* presets = app.add_subcommand("presets", "List dynamics presets and base ensembles");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run) return cmd_run(run_path, quiet);
  if (*validate) return cmd_validate(validate_path);
  if (*presets) return cmd_presets();
  return kExitConfig;
}
