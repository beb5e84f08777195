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

#include "backflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "backflow/errors.hpp"

namespace backflow::io {

namespace {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------- config

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + " is missing '" + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(what + " must be finite");
  return x;
}

std::uint64_t count(const json& v, const std::string& what) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ConfigError(what + " must be a non-negative integer");
}

CMatrix parse_matrix(const json& v, const std::string& what) {
  check_keys(v, what, {"re", "im"});
  const json& re = require(v, "re", what);
  if (!re.is_array() || re.empty()) throw ConfigError(what + ".re must be a non-empty array of rows");
  const std::size_t rows = re.size();
  const std::size_t cols = re.front().is_array() ? re.front().size() : 0;
  if (cols != rows) throw ConfigError(what + " must be square");
  CMatrix m(rows, cols);
  const json* im = v.contains("im") ? &v.at("im") : nullptr;
  if (im != nullptr && (!im->is_array() || im->size() != rows))
    throw ConfigError(what + ".im must match the shape of re");
  for (std::size_t i = 0; i < rows; ++i) {
    if (!re[i].is_array() || re[i].size() != cols) throw ConfigError(what + " rows must be equal length");
    if (im != nullptr && (!(*im)[i].is_array() || (*im)[i].size() != cols))
      throw ConfigError(what + ".im must match the shape of re");
    for (std::size_t j = 0; j < cols; ++j) {
      const double imag = im != nullptr ? number((*im)[i][j], what + ".im") : 0.0;
      m(i, j) = cplx(number(re[i][j], what + ".re"), imag);
    }
  }
  return m;
}

// ---------------------------------------------------------------- numbers

std::string fmt12(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

json jnum(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double from_jnum(const json& v) {
  if (v.is_number()) return v.get<double>();
  const auto s = v.get<std::string>();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  throw ConfigError("bad number '" + s + "' in report");
}

json jvec(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(jnum(x));
  return a;
}

std::vector<double> from_jvec(const json& a) {
  std::vector<double> v;
  for (const auto& x : a) v.push_back(from_jnum(x));
  return v;
}

json jmatrix(const CMatrix& m) {
  json re = json::array(), im = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json r = json::array(), c = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) {
      r.push_back(jnum(m(i, j).real()));
      c.push_back(jnum(m(i, j).imag()));
    }
    re.push_back(std::move(r));
    im.push_back(std::move(c));
  }
  return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

CMatrix from_jmatrix(const json& v) {
  const auto& re = v.at("re");
  const auto& im = v.at("im");
  CMatrix m(re.size(), re.empty() ? 0 : re.front().size());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = cplx(from_jnum(re[i][j]), from_jnum(im[i][j]));
  return m;
}

std::string verdict_name(CpVerdict v) {
  switch (v) {
    case CpVerdict::kCp:
      return "cp";
    case CpVerdict::kNonCp:
      return "non_cp";
    case CpVerdict::kIndeterminate:
      return "indeterminate";
  }
  return "indeterminate";
}

CpVerdict verdict_from(const std::string& s) {
  if (s == "cp") return CpVerdict::kCp;
  if (s == "non_cp") return CpVerdict::kNonCp;
  return CpVerdict::kIndeterminate;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

// ------------------------------------------------------------------- config

void validate(const ExperimentConfig& c) {
  (void)DynamicsFamily::from_config(c.dynamics_kind, c.dynamics_params, c.dynamics_preset);
  if (!(c.t_end > c.t_start)) throw ConfigError("grid.t_end must exceed grid.t_start");
  if (c.n_points < 2) throw ConfigError("grid.n_points must be at least 2");
  if (c.n_bar < 1) throw ConfigError("probe.n_bar must be at least 1");
  if (c.dim_ancilla < 1 || c.dim_ancilla > 2)
    throw ConfigError("probe.dim_ancilla must be 1 or 2 (dim A' <= d_S = 2)");
  if (c.lambda_list.empty()) throw ConfigError("probe.lambda_list must not be empty");
  for (double l : c.lambda_list)
    if (!(l >= 0.0 && l < 1.0)) throw ConfigError("probe.lambda_list entries must lie in [0, 1)");
  if (!(c.gap_tol > 0.0)) throw ConfigError("solver.gap_tol must be positive");
  const std::size_t d = 2 * c.dim_ancilla;
  if (c.sigma) {
    if (c.sigma->rows() != d) throw ConfigError("probe.sigma must be a " + std::to_string(d) + "x" + std::to_string(d) + " matrix");
    try {
      (void)DensityMatrix(*c.sigma);
    } catch (const Error& e) {
      throw ConfigError(std::string("probe.sigma: ") + e.what());
    }
  }
  switch (c.base.kind) {
    case EnsembleSource::Kind::kPreset:
      try {
        (void)preset_ensemble(c.base.preset, 2, c.dim_ancilla, c.n_bar);
      } catch (const ConfigError& e) {
        throw ConfigError(std::string("probe.base_ensemble: ") + e.what());
      }
      break;
    case EnsembleSource::Kind::kSearch:
      break;
    case EnsembleSource::Kind::kInline: {
      if (c.base.probs.size() != c.n_bar || c.base.states.size() != c.n_bar)
        throw ConfigError("probe.base_ensemble: expected n_bar probabilities and states");
      std::vector<DensityMatrix> states;
      try {
        for (const auto& m : c.base.states) {
          if (m.rows() != d) throw ConfigError("state dimension must be d_S * dim_ancilla = " + std::to_string(d));
          states.emplace_back(m);
        }
        (void)ProbabilityDistribution(c.base.probs);
      } catch (const Error& e) {
        throw ConfigError(std::string("probe.base_ensemble: ") + e.what());
      }
      break;
    }
  }
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  check_keys(root, "config", {"dynamics", "grid", "probe", "solver", "outputs"});
  ExperimentConfig c;

  const json& dyn = require(root, "dynamics", "config");
  check_keys(dyn, "dynamics", {"kind", "params"});
  const json& kind = require(dyn, "kind", "dynamics");
  if (!kind.is_string()) throw ConfigError("dynamics.kind must be a string");
  c.dynamics_kind = kind.get<std::string>();
  if (dyn.contains("params")) {
    const json& params = dyn.at("params");
    if (!params.is_object()) throw ConfigError("dynamics.params must be an object");
    for (const auto& [key, value] : params.items()) {
      if (key == "preset") {
        if (!value.is_string()) throw ConfigError("dynamics.params.preset must be a string");
        c.dynamics_preset = value.get<std::string>();
      } else {
        c.dynamics_params[key] = number(value, "dynamics.params." + key);
      }
    }
  }

  const json& grid = require(root, "grid", "config");
  check_keys(grid, "grid", {"t_start", "t_end", "n_points"});
  c.t_start = number(require(grid, "t_start", "grid"), "grid.t_start");
  c.t_end = number(require(grid, "t_end", "grid"), "grid.t_end");
  c.n_points = count(require(grid, "n_points", "grid"), "grid.n_points");

  if (root.contains("probe")) {
    const json& probe = root.at("probe");
    check_keys(probe, "probe", {"n_bar", "lambda_list", "sigma", "base_ensemble", "dim_ancilla"});
    if (probe.contains("n_bar")) c.n_bar = count(probe.at("n_bar"), "probe.n_bar");
    if (probe.contains("dim_ancilla")) c.dim_ancilla = count(probe.at("dim_ancilla"), "probe.dim_ancilla");
    if (probe.contains("lambda_list")) {
      const json& ll = probe.at("lambda_list");
      if (!ll.is_array()) throw ConfigError("probe.lambda_list must be an array");
      c.lambda_list.clear();
      for (const auto& l : ll) c.lambda_list.push_back(number(l, "probe.lambda_list entry"));
    }
    if (probe.contains("sigma")) {
      const json& s = probe.at("sigma");
      if (s.is_string()) {
        if (s.get<std::string>() != "maximally_mixed")
          throw ConfigError("probe.sigma must be \"maximally_mixed\" or a matrix");
      } else {
        c.sigma = parse_matrix(s, "probe.sigma");
      }
    }
    if (probe.contains("base_ensemble")) {
      const json& b = probe.at("base_ensemble");
      if (b.is_string()) {
        const auto s = b.get<std::string>();
        if (s == "search") {
          c.base.kind = EnsembleSource::Kind::kSearch;
        } else if (s.rfind("preset:", 0) == 0) {
          c.base.kind = EnsembleSource::Kind::kPreset;
          c.base.preset = s.substr(7);
        } else {
          throw ConfigError("probe.base_ensemble must be \"preset:<name>\", \"search\" or an object");
        }
      } else {
        check_keys(b, "probe.base_ensemble", {"probs", "dim_ancilla", "states"});
        c.base.kind = EnsembleSource::Kind::kInline;
        const json& probs = require(b, "probs", "probe.base_ensemble");
        const json& states = require(b, "states", "probe.base_ensemble");
        if (!probs.is_array() || !states.is_array())
          throw ConfigError("probe.base_ensemble.probs and .states must be arrays");
        for (const auto& p : probs) c.base.probs.push_back(number(p, "probe.base_ensemble.probs entry"));
        for (std::size_t i = 0; i < states.size(); ++i)
          c.base.states.push_back(parse_matrix(states[i], "probe.base_ensemble.states[" + std::to_string(i) + "]"));
        if (b.contains("dim_ancilla"))
          c.dim_ancilla = count(b.at("dim_ancilla"), "probe.base_ensemble.dim_ancilla");
        if (!probe.contains("n_bar")) c.n_bar = c.base.probs.size();
      }
    }
  }

  if (root.contains("solver")) {
    const json& s = root.at("solver");
    check_keys(s, "solver", {"gap_tol", "n_restarts", "seed", "search_trials"});
    if (s.contains("gap_tol")) c.gap_tol = number(s.at("gap_tol"), "solver.gap_tol");
    if (s.contains("n_restarts")) c.n_restarts = count(s.at("n_restarts"), "solver.n_restarts");
    if (s.contains("seed")) c.seed = count(s.at("seed"), "solver.seed");
    if (s.contains("search_trials")) c.search_trials = count(s.at("search_trials"), "solver.search_trials");
  }

  if (root.contains("outputs")) {
    const json& o = root.at("outputs");
    check_keys(o, "outputs", {"csv_path", "svg_path", "json_path"});
    const auto path = [&](const char* key, std::string& dst) {
      if (!o.contains(key)) return;
      if (!o.at(key).is_string() || o.at(key).get<std::string>().empty())
        throw ConfigError(std::string("outputs.") + key + " must be a non-empty string");
      dst = o.at(key).get<std::string>();
    };
    path("csv_path", c.csv_path);
    path("svg_path", c.svg_path);
    path("json_path", c.json_path);
  }

  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------- run

ReportBundle run_experiment(const ExperimentConfig& config) {
  validate(config);
  const auto family =
      DynamicsFamily::from_config(config.dynamics_kind, config.dynamics_params, config.dynamics_preset);
  const auto traj = make_trajectory(family, config.t_start,
                                    linspace(config.t_start, config.t_end, config.n_points));
  const std::size_t ds = family.dim();

  ReportBundle bundle;
  bundle.dynamics_kind = family.kind_name();
  std::optional<Ensemble> base;
  switch (config.base.kind) {
    case EnsembleSource::Kind::kPreset:
      base = preset_ensemble(config.base.preset, ds, config.dim_ancilla, config.n_bar);
      break;
    case EnsembleSource::Kind::kInline: {
      std::vector<DensityMatrix> states;
      for (const auto& m : config.base.states) states.emplace_back(m);
      base = Ensemble(config.base.probs, std::move(states));
      break;
    }
    case EnsembleSource::Kind::kSearch: {
      // Search on the step whose intermediate map is furthest from CP.
      const auto cp = cp_divisibility_scan(traj);
      std::size_t k = 0;
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < cp.size(); ++j)
        if (std::isfinite(cp[j].min_choi_eig) && cp[j].min_choi_eig < worst) {
          worst = cp[j].min_choi_eig;
          k = j;
        }
      auto found = search_ensemble(traj, k, k + 1, config.n_bar, config.dim_ancilla,
                                   config.search_trials, config.seed);
      bundle.search = SearchInfo{traj.grid[k], traj.grid[k + 1], found.delta_pg};
      base = std::move(found.ensemble);
      break;
    }
  }
  bundle.base_probs = base->probs();
  for (const auto& s : base->states()) bundle.base_states.push_back(s.matrix());

  std::optional<DensityMatrix> sigma;
  if (config.sigma) sigma = DensityMatrix(*config.sigma);
  const auto spec = make_probe_spec(*base, ds, config.dim_ancilla, config.lambda_list.front(), sigma);

  ScanOptions opts;
  opts.correlation.gap_tol = config.gap_tol;
  opts.correlation.n_restarts = config.n_restarts;
  opts.correlation.seed = config.seed;
  opts.significance = 3.0 * config.gap_tol;
  auto sweep = sweep_lambda(spec, traj, config.lambda_list, opts);
  bundle.reports = std::move(sweep.reports);
  bundle.lambda_bar = std::move(sweep.lambda_bar);
  for (const auto& r : bundle.reports) bundle.converged = bundle.converged && r.converged;
  return bundle;
}

// ---------------------------------------------------------------------- CSV

std::string to_csv(const std::vector<WitnessReport>& reports) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : reports) {
    for (std::size_t k = 0; k < r.points.size(); ++k) {
      const auto& p = r.points[k];
      std::string row = fmt12(p.time) + ',' + fmt12(r.lambda) + ',' + fmt12(p.c_value) + ',' +
                        fmt12(p.c_projective) + ',' + fmt12(p.pg_ensemble) + ',' +
                        fmt12(p.pg_perp) + ',' + fmt12(p.pg_par) + ',';
      if (k == 0) {
        row += ",,,";
      } else {
        const auto& s = r.steps[k - 1];
        row += fmt12(s.min_choi_eig) + ',' + (s.cp_flag() ? "1" : "0") + ',' +
               (s.backflow ? "1" : "0") + ',';
      }
      row += fmt12(p.gap) + ',' + std::to_string(p.restarts_used);
      out += row;
      out += '\n';
    }
  }
  return out;
}

// --------------------------------------------------------------------- JSON

std::string to_json(const ReportBundle& b) {
  json root;
  root["format"] = "backflow-lab-report";
  root["version"] = 1;
  root["dynamics_kind"] = b.dynamics_kind;
  root["converged"] = b.converged;
  root["base_ensemble"] = json::object();
  root["base_ensemble"]["probs"] = jvec(b.base_probs);
  root["base_ensemble"]["states"] = json::array();
  for (const auto& s : b.base_states) root["base_ensemble"]["states"].push_back(jmatrix(s));
  if (b.search)
    root["search"] = json{{"t_early", jnum(b.search->t_early)},
                          {"t_late", jnum(b.search->t_late)},
                          {"delta_pg", jnum(b.search->delta_pg)}};
  else
    root["search"] = nullptr;
  root["lambda_bar"] = jvec(b.lambda_bar);
  root["reports"] = json::array();
  for (const auto& r : b.reports) {
    json jr;
    jr["lambda"] = jnum(r.lambda);
    jr["converged"] = r.converged;
    jr["grid"] = jvec(r.grid);
    jr["points"] = json::array();
    for (const auto& p : r.points) {
      json jp;
      jp["time"] = jnum(p.time);
      jp["c_value"] = jnum(p.c_value);
      jp["c_projective"] = jnum(p.c_projective);
      jp["pg_ensemble"] = jnum(p.pg_ensemble);
      jp["pg_perp"] = jnum(p.pg_perp);
      jp["pg_par"] = jnum(p.pg_par);
      jp["split_defect"] = jnum(p.split_defect);
      jp["gap"] = jnum(p.gap);
      jp["restarts_used"] = p.restarts_used;
      jp["converged"] = p.converged;
      jp["best_init"] = p.best_init;
      jp["a_povm"] = json::array();
      for (const auto& e : p.a_povm.effects()) jp["a_povm"].push_back(jmatrix(e));
      jr["points"].push_back(std::move(jp));
    }
    jr["steps"] = json::array();
    for (const auto& s : r.steps) {
      json js;
      js["t_early"] = jnum(s.t_early);
      js["t_late"] = jnum(s.t_late);
      js["min_choi_eig"] = jnum(s.min_choi_eig);
      js["tp_defect"] = jnum(s.tp_defect);
      js["inversion_condition"] = jnum(s.inversion_condition);
      js["verdict"] = verdict_name(s.verdict);
      js["delta_c"] = jnum(s.delta_c);
      js["delta_pg_ensemble"] = jnum(s.delta_pg_ensemble);
      js["backflow"] = s.backflow;
      js["consistent"] = s.consistent;
      js["matches_cp"] = s.matches_cp;
      jr["steps"].push_back(std::move(js));
    }
    jr["backflow_intervals"] = json::array();
    for (const auto& iv : r.backflow_intervals)
      jr["backflow_intervals"].push_back(
          json{{"t_early", jnum(iv.t_early)}, {"t_late", jnum(iv.t_late)}, {"delta_c", jnum(iv.delta_c)}});
    root["reports"].push_back(std::move(jr));
  }
  return root.dump(2) + "\n";
}

ReportBundle from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid report JSON: ") + e.what());
  }
  try {
    ReportBundle b;
    b.dynamics_kind = root.at("dynamics_kind").get<std::string>();
    b.converged = root.at("converged").get<bool>();
    b.base_probs = from_jvec(root.at("base_ensemble").at("probs"));
    for (const auto& s : root.at("base_ensemble").at("states")) b.base_states.push_back(from_jmatrix(s));
    if (!root.at("search").is_null()) {
      const auto& s = root.at("search");
      b.search = SearchInfo{from_jnum(s.at("t_early")), from_jnum(s.at("t_late")), from_jnum(s.at("delta_pg"))};
    }
    b.lambda_bar = from_jvec(root.at("lambda_bar"));
    for (const auto& jr : root.at("reports")) {
      WitnessReport r;
      r.lambda = from_jnum(jr.at("lambda"));
      r.converged = jr.at("converged").get<bool>();
      r.grid = from_jvec(jr.at("grid"));
      for (const auto& jp : jr.at("points")) {
        ScanPoint p;
        p.time = from_jnum(jp.at("time"));
        p.c_value = from_jnum(jp.at("c_value"));
        p.c_projective = from_jnum(jp.at("c_projective"));
        p.pg_ensemble = from_jnum(jp.at("pg_ensemble"));
        p.pg_perp = from_jnum(jp.at("pg_perp"));
        p.pg_par = from_jnum(jp.at("pg_par"));
        p.split_defect = from_jnum(jp.at("split_defect"));
        p.gap = from_jnum(jp.at("gap"));
        p.restarts_used = jp.at("restarts_used").get<std::size_t>();
        p.converged = jp.at("converged").get<bool>();
        p.best_init = jp.at("best_init").get<std::string>();
        std::vector<CMatrix> effects;
        for (const auto& e : jp.at("a_povm")) effects.push_back(from_jmatrix(e));
        if (!effects.empty()) p.a_povm = Povm(std::move(effects));
        r.points.push_back(std::move(p));
      }
      for (const auto& js : jr.at("steps")) {
        ScanStep s;
        s.t_early = from_jnum(js.at("t_early"));
        s.t_late = from_jnum(js.at("t_late"));
        s.min_choi_eig = from_jnum(js.at("min_choi_eig"));
        s.tp_defect = from_jnum(js.at("tp_defect"));
        s.inversion_condition = from_jnum(js.at("inversion_condition"));
        s.verdict = verdict_from(js.at("verdict").get<std::string>());
        s.delta_c = from_jnum(js.at("delta_c"));
        s.delta_pg_ensemble = from_jnum(js.at("delta_pg_ensemble"));
        s.backflow = js.at("backflow").get<bool>();
        s.consistent = js.at("consistent").get<bool>();
        s.matches_cp = js.at("matches_cp").get<bool>();
        r.steps.push_back(s);
      }
      for (const auto& iv : jr.at("backflow_intervals"))
        r.backflow_intervals.push_back(
            {from_jnum(iv.at("t_early")), from_jnum(iv.at("t_late")), from_jnum(iv.at("delta_c"))});
      b.reports.push_back(std::move(r));
    }
    return b;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------- SVG

std::string to_svg(const ReportBundle& b) {
  constexpr double W = 800, H = 480, L = 70, R = 170, T = 40, B = 50;
  const double pw = W - L - R, ph = H - T - B;
  double t_min = 0.0, t_max = 1.0, y_min = 0.0, y_max = 1.0;
  if (!b.reports.empty() && !b.reports.front().grid.empty()) {
    t_min = b.reports.front().grid.front();
    t_max = b.reports.front().grid.back();
  }
  for (const auto& r : b.reports)
    for (const auto& p : r.points) {
      if (std::isfinite(p.c_value)) y_min = std::min(y_min, p.c_value);
      if (std::isfinite(p.pg_ensemble)) y_max = std::max(y_max, p.pg_ensemble);
    }
  if (t_max <= t_min) t_max = t_min + 1.0;
  const auto sx = [&](double t) { return L + (t - t_min) / (t_max - t_min) * pw; };
  const auto sy = [&](double y) { return T + (y_max - y) / (y_max - y_min) * ph; };
  const auto f = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return std::string(buf);
  };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << L << "\" y=\"24\" font-size=\"14\">Correlation backflow: "
    << xml_escape(b.dynamics_kind) << "</text>\n";

  // Non-CP steps (taken from the first report; the CP scan does not depend on lambda).
  if (!b.reports.empty())
    for (const auto& st : b.reports.front().steps)
      if (st.verdict == CpVerdict::kNonCp)
        s << "<rect x=\"" << f(sx(st.t_early)) << "\" y=\"" << f(T) << "\" width=\""
          << f(sx(st.t_late) - sx(st.t_early)) << "\" height=\"" << f(ph)
          << "\" fill=\"#f4c7c3\" fill-opacity=\"0.6\"/>\n";

  s << "<rect x=\"" << f(L) << "\" y=\"" << f(T) << "\" width=\"" << f(pw) << "\" height=\""
    << f(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double t = t_min + (t_max - t_min) * i / 5.0;
    const double y = y_min + (y_max - y_min) * i / 5.0;
    s << "<text x=\"" << f(sx(t)) << "\" y=\"" << f(T + ph + 18) << "\" text-anchor=\"middle\">"
      << fmt12(std::round(t * 1000) / 1000) << "</text>\n";
    s << "<text x=\"" << f(L - 6) << "\" y=\"" << f(sy(y) + 4) << "\" text-anchor=\"end\">"
      << fmt12(std::round(y * 1000) / 1000) << "</text>\n";
    s << "<line x1=\"" << f(L) << "\" y1=\"" << f(sy(y)) << "\" x2=\"" << f(L + pw) << "\" y2=\""
      << f(sy(y)) << "\" stroke=\"#dddddd\"/>\n";
  }
  s << "<text x=\"" << f(L + pw / 2) << "\" y=\"" << f(H - 10) << "\" text-anchor=\"middle\">t</text>\n";

  const auto polyline = [&](const std::vector<std::pair<double, double>>& pts,
                            const std::string& color, const std::string& extra) {
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"" << extra
      << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      s << (i ? " " : "") << f(sx(pts[i].first)) << ',' << f(sy(pts[i].second));
    s << "\"/>\n";
  };
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  double ly = T + 10;
  if (!b.reports.empty()) {
    std::vector<std::pair<double, double>> pg;
    for (const auto& p : b.reports.front().points) pg.emplace_back(p.time, p.pg_ensemble);
    polyline(pg, "black", " stroke-dasharray=\"6 4\"");
    s << "<line x1=\"" << f(L + pw + 12) << "\" y1=\"" << f(ly) << "\" x2=\"" << f(L + pw + 36)
      << "\" y2=\"" << f(ly) << "\" stroke=\"black\" stroke-dasharray=\"6 4\"/>\n";
    s << "<text x=\"" << f(L + pw + 42) << "\" y=\"" << f(ly + 4) << "\">P_g(E(t))</text>\n";
    ly += 18;
  }
  for (std::size_t i = 0; i < b.reports.size(); ++i) {
    const auto& r = b.reports[i];
    const std::string color = palette[i % 8];
    std::vector<std::pair<double, double>> c;
    for (const auto& p : r.points) c.emplace_back(p.time, p.c_value);
    polyline(c, color, "");
    s << "<line x1=\"" << f(L + pw + 12) << "\" y1=\"" << f(ly) << "\" x2=\"" << f(L + pw + 36)
      << "\" y2=\"" << f(ly) << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    s << "<text x=\"" << f(L + pw + 42) << "\" y=\"" << f(ly + 4) << "\">C(t), lambda="
      << fmt12(r.lambda) << "</text>\n";
    ly += 18;
  }
  s << "<rect x=\"" << f(L + pw + 12) << "\" y=\"" << f(ly - 6) << "\" width=\"24\" height=\"10\""
    << " fill=\"#f4c7c3\"/>\n<text x=\"" << f(L + pw + 42) << "\" y=\"" << f(ly + 4)
    << "\">non-CP step</text>\n";
  s << "</svg>\n";
  return s.str();
}

void emit_csv(const ReportBundle& bundle, const std::filesystem::path& path) {
  write_file(path, to_csv(bundle.reports));
}

void emit_json(const ReportBundle& bundle, const std::filesystem::path& path) {
  write_file(path, to_json(bundle));
}

void emit_svg(const ReportBundle& bundle, const std::filesystem::path& path) {
  write_file(path, to_svg(bundle));
}

}  // namespace backflow::io
