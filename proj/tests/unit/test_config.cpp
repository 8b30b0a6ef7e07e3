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
#include <string>

#include <gtest/gtest.h>

#include "voi/cli/config.hpp"

namespace {

using namespace voi;
using namespace voi::cli;

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, EmptyDocumentGivesDefaults) {
  EXPECT_EQ(parse_config(""), RunConfig{});
  EXPECT_EQ(parse_config("# nothing here\n"), RunConfig{});
  const RunConfig c;
  EXPECT_EQ(c.priors, PriorConfig{});
  EXPECT_EQ(c.costs, CostModel{});
  EXPECT_EQ(c.load.annual_cycles, kCalibratedAnnualCycles);
}

TEST(Config, CorrelationOutOfRange) {
  EXPECT_NE(error_of("priors:\n  rho: 1.5\n").find("correlation out of range"), std::string::npos);
  EXPECT_NE(error_of("priors:\n  rho: -1\n").find("correlation out of range"), std::string::npos);
}

TEST(Config, UnknownKeysAreRejected) {
  EXPECT_NE(error_of("priors:\n  rh0: 0.5\n").find("priors.rh0"), std::string::npos);
  EXPECT_NE(error_of("extras: 1\n").find("extras"), std::string::npos);
  EXPECT_NE(error_of("priors:\n  mu_sigma_L: {m: 50, mean: 5}\n").find("priors.mu_sigma_L.mean"), std::string::npos);
}

TEST(Config, ParseErrorsReportLineAndColumn) {
  const auto msg = error_of("priors:\n  rho: [0.5,\n");
  EXPECT_NE(msg.find("line"), std::string::npos);
  EXPECT_NE(msg.find("column"), std::string::npos);
}

TEST(Config, ValidationNamesTheKey) {
  EXPECT_NE(error_of("costs:\n  c_fail: -1\n").find("costs"), std::string::npos);
  EXPECT_NE(error_of("priors:\n  sd_sigma_Y: {m: 10, sd: 0}\n").find("priors.sd_sigma_Y"), std::string::npos);
  EXPECT_NE(error_of("analysis:\n  n_outer: abc\n").find("analysis.n_outer"), std::string::npos);
  EXPECT_NE(error_of("analysis:\n  epsilons: [5, 1]\n").find("analysis.epsilons"), std::string::npos);
  EXPECT_NE(error_of("analysis:\n  sources: [radar]\n").find("analysis.sources[0]"), std::string::npos);
  EXPECT_NE(error_of("analysis:\n  sources: [shm, {kind: shm, epsilon: 2}]\n").find("analysis.sources"),
            std::string::npos);
  EXPECT_NE(error_of("analysis:\n  mode: forecast\n").find("analysis.mode"), std::string::npos);
  EXPECT_NE(error_of("load:\n  windows: 9\n").find("load.windows"), std::string::npos);
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/voi_twin.yaml"), ConfigError); }

TEST(Config, ResolvedDumpRoundTrips) {
  EXPECT_EQ(parse_config(to_yaml(RunConfig{})), RunConfig{});

  RunConfig c;
  c.priors.rho = 1.0 / 3.0;
  c.priors.mu_sigma_L = dist::MarginalSpec::normal(0.1 + 0.2, 7.25);
  c.costs.site_visit_for_reduce = true;
  c.costs.c_fail = 12.5;
  c.sn.scatter_sd = 0.0;
  c.load = {123456.789, 2};
  c.analysis.mode = Mode::Sweep;
  c.analysis.sources = {DataSource::perfect(DataKind::Testing), DataSource::gaussian(DataKind::Shm, 2.5e-3)};
  c.analysis.sweep_kind = DataKind::Inspection;
  c.analysis.epsilons = {1e-7, 0.3, 1e9};
  c.analysis.seed = 18446744073709551615ULL;
  c.analysis.workers = 4;
  const auto text = to_yaml(c);
  EXPECT_EQ(parse_config(text), c);
  EXPECT_EQ(to_yaml(parse_config(text)), text);
}

TEST(Config, ShortSourceForm) {
  const auto c = parse_config("analysis:\n  sources: [inspection, {kind: shm, epsilon: 5}]\n");
  ASSERT_EQ(c.analysis.sources.size(), 2u);
  EXPECT_EQ(c.analysis.sources[0], DataSource::perfect(DataKind::Inspection));
  EXPECT_EQ(c.analysis.sources[1], DataSource::gaussian(DataKind::Shm, 5.0));
}

TEST(Config, HashIsStableAndSensitive) {
  const RunConfig a;
  RunConfig b;
  b.analysis.seed = 43;
  EXPECT_EQ(fnv1a64(to_yaml(a)), fnv1a64(to_yaml(RunConfig{})));
  EXPECT_NE(fnv1a64(to_yaml(a)), fnv1a64(to_yaml(b)));
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

}  // namespace
