// Copyright 2026 The voi-twin Authors
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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "voi/cli/analyses.hpp"

namespace {

using namespace voi;
using namespace voi::cli;
namespace fs = std::filesystem;

RunConfig small_config(Mode mode) {
  RunConfig c;
  c.analysis.mode = mode;
  c.analysis.n_samples = 20000;
  c.analysis.n_inner = 1500;
  c.analysis.n_outer = 80;
  c.analysis.seed = 5;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("voi_twin_test_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(Table, CsvQuoting) {
  const Table t{"t", {"a", "b"}, {{"x,y", "say \"hi\""}, {"1", ""}}};
  EXPECT_EQ(t.to_csv(), "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n1,\n");
  const Table ragged{"r", {"a", "b"}, {{"1"}}};
  EXPECT_THROW(ragged.to_csv(), ReportError);
}

TEST(Reporting, PriorSummaryHasSevenRowsInTableOrder) {
  const auto rec = run_prior(small_config(Mode::Prior));
  ASSERT_EQ(rec.tables.size(), 1u);
  const auto& t = rec.tables[0];
  ASSERT_EQ(t.rows.size(), 7u);
  const char* expected[] = {"no action", "repair", "reduce operation", "replace", "repair + reduce operation",
                            "repair + replace", "repair + replace + reduce operation"};
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(t.rows[i][0], expected[i]);
  EXPECT_EQ(t.rows[0].back(), "1");
  EXPECT_EQ(rec.summary.size(), 8u);  // header + 7 rows
  EXPECT_THROW(emit_plot_data(rec, scratch_dir("prior_plot")), ReportError);
}

TEST(Reporting, SubsetsRecordHasEightRows) {
  const auto rec = run_subsets(small_config(Mode::Subsets));
  ASSERT_EQ(rec.plots.size(), 1u);
  const auto& fig = rec.plots[0];
  EXPECT_EQ(fig.header, (std::vector<std::string>{"subset", "voi", "standard_error"}));
  ASSERT_EQ(fig.rows.size(), 8u);
  EXPECT_EQ(fig.rows[0][0], "none");
  EXPECT_EQ(fig.rows[0][1], "0");
}

TEST(Reporting, SweepRecordHasOneRowPerEpsilon) {
  auto c = small_config(Mode::Sweep);
  c.analysis.epsilons = {1, 2, 5, 10, 20, 50};
  const auto rec = run_sweep(c);
  const auto files = emit_plot_data(rec, scratch_dir("sweep"));
  ASSERT_EQ(files.size(), 1u);
  const auto csv = slurp(files[0]);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epsilon,voi,standard_error");
}

TEST(Reporting, DynamicPathCountsSumToOuterDraws) {
  auto c = small_config(Mode::Dynamic);
  c.analysis.n_samples = 3000;
  const auto rec = run_dynamic(c);
  const Table* paths = nullptr;
  for (const auto& t : rec.plots) {
    if (t.name == "fig_paths") paths = &t;
  }
  ASSERT_NE(paths, nullptr);
  std::size_t total = 0;
  for (const auto& r : paths->rows) total += std::stoul(r[1]);
  EXPECT_EQ(total, c.analysis.n_outer);
  EXPECT_EQ(rec.tables[0].rows.size(), 512u);
}

TEST(Reporting, RecordContainsMetadataAndResolvedConfig) {
  const auto rec = run_voi(small_config(Mode::Voi));
  const auto j = to_json(rec);
  EXPECT_EQ(j["analysis"], "voi");
  EXPECT_EQ(j["metadata"]["seed"], 5);
  EXPECT_EQ(j["metadata"]["config_hash"], config_hash(rec.config));
  EXPECT_EQ(j["metadata"]["engine_version"], kEngineVersion);
  EXPECT_FALSE(j["metadata"]["timestamp"].get<std::string>().empty());
  EXPECT_EQ(j["config"]["analysis"]["n_outer"], 80);
  EXPECT_EQ(j["payload"]["plan"], "SHM");
}

TEST(Reporting, OutputsAreByteIdenticalAcrossRunsAndWorkers) {
  auto c = small_config(Mode::Subsets);
  const auto a = scratch_dir("det_a"), b = scratch_dir("det_b");
  write_record(run(c), a);
  c.analysis.workers = 3;
  write_record(run(c), b);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << entry.path();
    ++compared;
  }
  EXPECT_EQ(compared, 2u);
  EXPECT_EQ(parse_config(slurp(a / "config.yaml")).analysis.workers, 1u);
}

}  // namespace
