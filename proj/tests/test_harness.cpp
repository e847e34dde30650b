// Copyright 2026 The usreg-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "test_util.hpp"
#include "usreg/harness.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace usreg {
namespace {

SweepConfig fast_config() {
  SweepConfig cfg;
  cfg.trials = 2;
  cfg.eps_mm = {1.0, 5.0};
  cfg.pipeline.slice_waypoints = 5;
  return cfg;
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Two trials, three targets, two eps values; hand-picked flags.
std::vector<TrialReport> synthetic_reports() {
  std::vector<TrialReport> out(2);
  const bool flags[2][3][2] = {{{false, true}, {true, true}, {false, false}}, {{true, true}, {true, true}, {false, true}}};
  for (std::size_t t = 0; t < 2; ++t) {
    out[t].trial_index = t;
    out[t].search_found = true;
    out[t].mapped = t == 0;
    out[t].before = {0.2, 0.3, 0.25};
    out[t].after = {0.6, 0.5, 0.55};
    out[t].tol_x_mm = 2.0;
    out[t].eps_mm = {1.0, 5.0};
    for (std::size_t k = 0; k < 3; ++k) {
      TargetRecord r;
      r.id = k;
      r.g_true = Vec3(static_cast<double>(k), 1.0, -40.0);
      r.r_hat = r.g_true + Vec3(0.5, 0, 0);
      r.success = {flags[t][k][0], flags[t][k][1]};
      out[t].targets.push_back(r);
    }
  }
  return out;
}

TEST(Harness, ConfigRoundTrip) {
  SweepConfig cfg = fast_config();
  cfg.noise.seed = 42;
  cfg.pipeline.tol_x_mm = 1.5;
  cfg.pipeline.search.pattern = WaypointPattern::Grid;
  const std::string text = cfg.to_json();
  EXPECT_EQ(SweepConfig::from_json(text).to_json(), text);
}

TEST(Harness, ConfigMissingKeysKeepDefaults) {
  const auto cfg = SweepConfig::from_json(R"({"trials": 3, "noise": {"morph_jitter": 2}})");
  EXPECT_EQ(cfg.trials, 3u);
  EXPECT_EQ(cfg.seed, SweepConfig{}.seed);
  EXPECT_EQ(cfg.noise.morph_jitter, 2);
  EXPECT_EQ(cfg.noise.pixel_flip_rate, NoiseModel::paper_default().pixel_flip_rate);
}

TEST(Harness, ConfigRejectsBadInput) {
  EXPECT_THROW(SweepConfig::from_json(R"({"bogus": 1})"), ConfigError);
  EXPECT_THROW(SweepConfig::from_json(R"({"noise": {"bogus": 1}})"), ConfigError);
  EXPECT_THROW(SweepConfig::from_json(R"({"eps_mm": [3, 1]})"), ConfigError);
  EXPECT_THROW(SweepConfig::from_json(R"({"trials": "five"})"), ConfigError);
  EXPECT_THROW(SweepConfig::from_json(R"({"noise": {"pixel_flip_rate": 2.0}})"), ConfigError);
  EXPECT_THROW(SweepConfig::from_json("{not json"), ConfigError);
  EXPECT_THROW(SweepConfig::preset("nope"), ConfigError);
  EXPECT_ANY_THROW(SweepConfig::load("/nonexistent/usreg.json"));
}

TEST(Harness, Presets) {
  EXPECT_TRUE(SweepConfig::preset("zero").noise.is_zero());
  EXPECT_FALSE(SweepConfig::preset("paper").noise.is_zero());
  EXPECT_TRUE(SweepConfig::noise_preset("zero").is_zero());
  EXPECT_DOUBLE_EQ(PipelineParams{}.tol_x(), 2.0);
}

TEST(Harness, TrialSetupIsDeterministicAndBounded) {
  const SweepConfig cfg = fast_config();
  const auto& base = testing::default_phantom();
  for (std::size_t t = 0; t < 10; ++t) {
    const auto a = make_trial_setup(cfg, t, base);
    const auto b = make_trial_setup(cfg, t, base);
    const Vec3 ta = a.scene.placement.translation();
    EXPECT_EQ(ta, b.scene.placement.translation());
    EXPECT_EQ(a.noise.seed, b.noise.seed);
    EXPECT_LE(std::abs(ta.x()), cfg.placement.tx_mm);
    EXPECT_LE(std::abs(ta.y()), cfg.placement.ty_mm);
    EXPECT_EQ(ta.z(), 0.0);
  }
  EXPECT_NE(make_trial_setup(cfg, 0, base).noise.seed, make_trial_setup(cfg, 1, base).noise.seed);
}

TEST(Harness, TrialIsDeterministicAcrossWorkers) {
  const SweepConfig cfg = fast_config();
  const auto& base = testing::default_phantom();
  const auto a = run_trial(cfg, 0, base, 1);
  const auto b = run_trial(cfg, 0, base, 2);
  ASSERT_TRUE(a.search_found) << a.failure_reason;
  ASSERT_EQ(a.targets.size(), kGridRows * kGridCols);
  ASSERT_EQ(a.targets.size(), b.targets.size());
  for (std::size_t k = 0; k < a.targets.size(); ++k) {
    EXPECT_EQ(a.targets[k].r_hat, b.targets[k].r_hat);
    EXPECT_EQ(a.targets[k].success, b.targets[k].success);
  }
  EXPECT_EQ(trials_csv({a}), trials_csv({b}));
  EXPECT_GE(a.success_rate(1), a.success_rate(0));
}

TEST(Harness, MissingAnnotationFailsTrial) {
  SweepConfig cfg = fast_config();
  cfg.phantom.with_vessels = false;
  const auto r = run_trial(cfg, 0);
  EXPECT_FALSE(r.search_found);
  EXPECT_FALSE(r.failure_reason.empty());
  EXPECT_TRUE(r.targets.empty());
  EXPECT_EQ(r.success_rate(0), 0.0);
}

TEST(Harness, SummaryMatchesHandCount) {
  const auto reports = synthetic_reports();
  const auto s = summarize(reports, {1.0, 5.0});
  ASSERT_EQ(s.success.size(), 2u);
  // eps 1: rates 1/3 and 2/3; eps 5: 2/3 and 1.
  EXPECT_NEAR(s.success[0].mean, 0.5, 1e-12);
  EXPECT_NEAR(s.success[0].min, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.success[0].max, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.success[1].mean, 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(s.success[1].max, 1.0, 1e-12);
  EXPECT_EQ(s.targets_per_trial, 3u);
  EXPECT_EQ(s.search_failures, 0u);
  EXPECT_NEAR(s.mean_after.dice, 0.55, 1e-12);
}

TEST(Harness, CsvRecountMatchesSummary) {
  const auto reports = synthetic_reports();
  const auto s = summarize(reports, {1.0, 5.0});
  const auto lines = split_lines(trials_csv(reports));
  ASSERT_EQ(lines.size(), 1u + 2 * 3 * 2);
  // Recount success per (trial, eps) from the CSV text.
  double hits[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t n = 1; n < lines.size(); ++n) {
    std::istringstream row(lines[n]);
    std::string trial, target, eps, ok;
    std::getline(row, trial, ',');
    std::getline(row, target, ',');
    std::getline(row, eps, ',');
    std::getline(row, ok, ',');
    hits[std::stoul(trial)][std::stod(eps) < 2.0 ? 0 : 1] += ok == "1";
  }
  for (std::size_t e = 0; e < 2; ++e) EXPECT_NEAR((hits[0][e] + hits[1][e]) / 6.0, s.success[e].mean, 1e-12);

  const auto reg = split_lines(registration_csv(s));
  EXPECT_EQ(reg.size(), 1u + 2 + 1);  // header, two trials, mean row
}

TEST(Harness, SummaryJsonRoundTrip) {
  const auto s = summarize(synthetic_reports(), {1.0, 5.0});
  EXPECT_TRUE(SweepSummary::from_json(s.to_json()) == s);
  EXPECT_THROW(SweepSummary::from_json("[]"), ConfigError);
}

TEST(Harness, SvgHasBandAndThreeCurves) {
  const auto svg = success_curve_svg(summarize(synthetic_reports(), {1.0, 5.0}));
  EXPECT_EQ(count_of(svg, "<polyline"), 3u);
  EXPECT_EQ(count_of(svg, "<polygon"), 1u);
  for (const char* id : {"id=\"min\"", "id=\"max\"", "id=\"mean\""}) EXPECT_EQ(count_of(svg, id), 1u) << id;
}

TEST(Harness, EmitReportsWritesAllFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "usreg_harness_test";
  std::filesystem::remove_all(dir);
  SweepResult res;
  res.reports = synthetic_reports();
  res.summary = summarize(res.reports, {1.0, 5.0});
  emit_reports(res, dir);
  for (const char* f : {"trials.csv", "summary.json", "success_curve.svg", "registration.csv", "timing.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  EXPECT_TRUE(SweepSummary::load(dir / "summary.json") == res.summary);
  std::filesystem::remove_all(dir);
}

TEST(Harness, ParallelForCoversAllIndices) {
  std::vector<std::atomic<int>> hits(50);
  parallel_for(50, 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Harness, ParallelForRethrowsLowestIndex) {
  try {
    parallel_for(20, 3, [](std::size_t i) {
      if (i == 7 || i == 13) throw std::runtime_error(std::to_string(i));
    });
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "7");
  }
}

}  // namespace
}  // namespace usreg
