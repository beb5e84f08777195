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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "backflow/errors.hpp"
#include "backflow/io.hpp"

namespace backflow::io {
namespace {

const char* kSmallConfig = R"({
  "dynamics": {"kind": "amplitude_damping", "params": {"g_decay": 1.0, "g_freq": 3.0}},
  "grid": {"t_start": 0.0, "t_end": 1.5, "n_points": 8},
  "probe": {"n_bar": 2, "lambda_list": [0.5, 0.9], "sigma": "maximally_mixed",
            "base_ensemble": "preset:basis"},
  "solver": {"gap_tol": 1e-7, "n_restarts": 2, "seed": 11}
})";

std::string with(const std::string& from, const std::string& to) {
  std::string s = kSmallConfig;
  const auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return s.replace(pos, from.size(), to);
}

TEST(Config, ParsesDefaultsAndFields) {
  const auto c = parse_config(kSmallConfig);
  EXPECT_EQ(c.dynamics_kind, "amplitude_damping");
  EXPECT_EQ(c.n_points, 8u);
  EXPECT_EQ(c.lambda_list, (std::vector<double>{0.5, 0.9}));
  EXPECT_EQ(c.base.kind, EnsembleSource::Kind::kPreset);
  EXPECT_EQ(c.seed, 11u);
  EXPECT_FALSE(c.sigma.has_value());
  EXPECT_TRUE(c.csv_path.empty());
}

TEST(Config, RejectsInvalidInput) {
  EXPECT_THROW(parse_config("{"), ConfigError);
  EXPECT_THROW(parse_config(with("\"n_points\": 8", "\"n_points\": 1")), ConfigError);
  EXPECT_THROW(parse_config(with("\"n_points\": 8", "\"n_points\": 2.5")), ConfigError);
  EXPECT_THROW(parse_config(with("\"t_end\": 1.5", "\"t_end\": 0.0")), ConfigError);
  EXPECT_THROW(parse_config(with("[0.5, 0.9]", "[0.5, 1.0]")), ConfigError);
  EXPECT_THROW(parse_config(with("\"gap_tol\": 1e-7", "\"gap_tol\": 0")), ConfigError);
  EXPECT_THROW(parse_config(with("\"seed\": 11", "\"seed\": 11, \"extra\": 1")), ConfigError);
  EXPECT_THROW(parse_config(with("\"g_freq\": 3.0", "\"g_frq\": 3.0")), ConfigError);
  EXPECT_THROW(parse_config(with("preset:basis", "preset:nope")), ConfigError);
  EXPECT_THROW(parse_config(with("\"maximally_mixed\"", "\"pure\"")), ConfigError);
  EXPECT_THROW(parse_config(with("\"maximally_mixed\"", "{\"re\": [[2, 0], [0, -1]]}")), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/dir/config.json"), IoError);
}

TEST(Config, InlineEnsemble) {
  const auto c = parse_config(with("\"preset:basis\"", R"({"probs": [0.25, 0.75], "states": [
      {"re": [[1, 0], [0, 0]]},
      {"re": [[0.5, 0.5], [0.5, 0.5]], "im": [[0, 0], [0, 0]]}]})"));
  EXPECT_EQ(c.base.kind, EnsembleSource::Kind::kInline);
  ASSERT_EQ(c.base.states.size(), 2u);
  EXPECT_EQ(c.base.states[1](0, 1), cplx(0.5, 0.0));
  EXPECT_THROW(parse_config(with("\"preset:basis\"", R"({"probs": [0.25, 0.75], "states": [
      {"re": [[1, 0], [0, 0]]}, {"re": [[1, 0], [0, 1]]}]})")),
               ConfigError);
}

class Reports : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { bundle_ = new ReportBundle(run_experiment(parse_config(kSmallConfig))); }
  static void TearDownTestSuite() { delete bundle_; }
  static ReportBundle* bundle_;
};
ReportBundle* Reports::bundle_ = nullptr;

TEST_F(Reports, CsvSchema) {
  const auto csv = to_csv(bundle_->reports);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kCsvHeader);
  std::size_t rows = 0, backflow_rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 11);
    if (line.find(",1,1,") != std::string::npos || line.find(",0,1,") != std::string::npos) ++backflow_rows;
  }
  EXPECT_EQ(rows, 2u * 8u);
  EXPECT_GT(backflow_rows, 0u);
  // First row of each lambda block leaves the step columns empty.
  EXPECT_NE(csv.find("0,0.5,0.5,0.5,1,1,1,,,,"), std::string::npos);
  EXPECT_EQ(to_csv({}), std::string(kCsvHeader) + "\n");
}

TEST_F(Reports, JsonRoundTripIsExact) {
  const auto text = to_json(*bundle_);
  const auto back = from_json(text);
  EXPECT_EQ(to_json(back), text);
  ASSERT_EQ(back.reports.size(), bundle_->reports.size());
  const auto& p0 = bundle_->reports[1].points[3];
  const auto& p1 = back.reports[1].points[3];
  EXPECT_EQ(p0.c_value, p1.c_value);
  EXPECT_EQ(p0.gap, p1.gap);
  EXPECT_EQ(p0.best_init, p1.best_init);
  ASSERT_EQ(p0.a_povm.size(), p1.a_povm.size());
  EXPECT_EQ(max_abs_diff(p0.a_povm[0], p1.a_povm[0]), 0.0);
  EXPECT_EQ(back.reports[0].steps[2].verdict, bundle_->reports[0].steps[2].verdict);
  for (std::size_t k = 0; k < back.lambda_bar.size(); ++k)
    EXPECT_TRUE(back.lambda_bar[k] == bundle_->lambda_bar[k] ||
                (std::isnan(back.lambda_bar[k]) && std::isnan(bundle_->lambda_bar[k])));
  EXPECT_THROW(from_json("{}"), ConfigError);
}

TEST_F(Reports, OutputsAreDeterministic) {
  const auto again = run_experiment(parse_config(kSmallConfig));
  EXPECT_EQ(to_csv(again.reports), to_csv(bundle_->reports));
  EXPECT_EQ(to_json(again), to_json(*bundle_));
  EXPECT_EQ(to_svg(again), to_svg(*bundle_));
}

TEST_F(Reports, SvgHasCurvesAndShading) {
  const auto svg = to_svg(*bundle_);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(std::count(svg.begin(), svg.end(), '\n') > 10, true);
  std::size_t polylines = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1))
    ++polylines;
  EXPECT_EQ(polylines, 1u + bundle_->reports.size());
  EXPECT_NE(svg.find("#f4c7c3"), std::string::npos);
}

TEST_F(Reports, EmitWritesFilesAndReportsIoErrors) {
  const auto dir = std::filesystem::temp_directory_path() / "backflow_io_test";
  std::filesystem::create_directories(dir);
  emit_csv(*bundle_, dir / "r.csv");
  emit_json(*bundle_, dir / "r.json");
  emit_svg(*bundle_, dir / "r.svg");
  std::ifstream in(dir / "r.json");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), to_json(*bundle_));
  EXPECT_THROW(emit_csv(*bundle_, dir / "missing" / "r.csv"), IoError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace backflow::io
