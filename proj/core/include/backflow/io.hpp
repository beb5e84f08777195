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

// Experiment configuration (JSON), batch runs, and report serialization to
// CSV, JSON and SVG.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "backflow/dynamics.hpp"
#include "backflow/probe.hpp"

namespace backflow::io {

struct EnsembleSource {
  enum class Kind { kPreset, kSearch, kInline };
  Kind kind = Kind::kPreset;
  std::string preset = "basis";
  /// Inline ensembles only.
  std::vector<double> probs;
  std::vector<CMatrix> states;
};

struct ExperimentConfig {
  std::string dynamics_kind;
  std::map<std::string, double> dynamics_params;
  std::string dynamics_preset;

  double t_start = 0.0;
  double t_end = 1.0;
  std::size_t n_points = 50;

  std::size_t n_bar = 2;
  std::size_t dim_ancilla = 1;
  std::vector<double> lambda_list = default_lambdas();
  /// Empty means maximally mixed.
  std::optional<CMatrix> sigma;
  EnsembleSource base;

  double gap_tol = kDefaultGapTol;
  std::size_t n_restarts = 4;
  std::uint64_t seed = 0;
  std::size_t search_trials = 200;

  std::string csv_path;
  std::string svg_path;
  std::string json_path;
};

/// Parses and validates; throws ConfigError with a readable message.
ExperimentConfig parse_config(const std::string& json_text);
/// Throws IoError when the file cannot be read, ConfigError otherwise.
ExperimentConfig load_config(const std::filesystem::path& path);
/// Semantic checks (also run by parse_config).
void validate(const ExperimentConfig& config);

struct SearchInfo {
  double t_early = 0.0;
  double t_late = 0.0;
  double delta_pg = 0.0;
};

struct ReportBundle {
  std::string dynamics_kind;
  std::vector<double> base_probs;
  std::vector<CMatrix> base_states;
  std::optional<SearchInfo> search;
  std::vector<WitnessReport> reports;
  std::vector<double> lambda_bar;
  bool converged = true;
};

/// Builds the trajectory and base ensemble and runs the lambda sweep.
ReportBundle run_experiment(const ExperimentConfig& config);

/// Exact CSV header.
inline constexpr const char* kCsvHeader =
    "time,lambda,c_value,c_projective,pg_ensemble,pg_perp,pg_par,min_choi_eig_step,cp_flag,"
    "backflow_flag,gap,restarts_used";

std::string to_csv(const std::vector<WitnessReport>& reports);
std::string to_json(const ReportBundle& bundle);
ReportBundle from_json(const std::string& json_text);
std::string to_svg(const ReportBundle& bundle);

/// File writers; throw IoError.
void emit_csv(const ReportBundle& bundle, const std::filesystem::path& path);
void emit_json(const ReportBundle& bundle, const std::filesystem::path& path);
void emit_svg(const ReportBundle& bundle, const std::filesystem::path& path);

}  // namespace backflow::io
