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

#pragma once

#include "usreg/pipeline.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace usreg {

/// Malformed or inconsistent configuration.
class ConfigError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

struct PlacementSampler {
  double tx_mm = 40.0;   // translation drawn uniformly in [-tx, tx]
  double ty_mm = 25.0;
  double yaw_deg = 0.0;  // 0 disables rotation
};

struct PipelineParams {
  ProbeParams probe;
  SearchParams search = SearchParams::for_probe(ProbeParams{});
  std::size_t acquisition_frames = 16;
  double acquisition_length_mm = 60.0;
  RegistrationConfig registration;
  HarmonizeParams harmonize;
  double slice_search_mm = 20.0;
  std::size_t slice_waypoints = 21;
  double imaging_step_mm = 1.0;
  /// Success tolerance along x; unset means half the acquisition slice spacing.
  std::optional<double> tol_x_mm;

  double slice_spacing_mm() const {
    return acquisition_length_mm / static_cast<double>(acquisition_frames - 1);
  }
  double tol_x() const { return tol_x_mm ? *tol_x_mm : 0.5 * slice_spacing_mm(); }
};

struct SweepConfig {
  static constexpr int kSchemaVersion = 1;

  std::size_t trials = 5;
  std::uint64_t seed = 1;
  std::uint64_t phantom_seed = 7;
  NoiseModel noise = NoiseModel::paper_default();
  std::vector<double> eps_mm{1, 2, 3, 4, 5, 6, 7, 8, 9};
  PlacementSampler placement;
  PhantomParams phantom;
  PipelineParams pipeline;

  void validate() const;

  /// "zero" or "paper"; anything else throws ConfigError.
  static SweepConfig preset(std::string_view name);
  static NoiseModel noise_preset(std::string_view name);

  std::string to_json() const;
  /// Missing keys keep their defaults; unknown keys and bad values throw ConfigError.
  static SweepConfig from_json(const std::string& text);
  static SweepConfig load(const std::filesystem::path& path);
};

struct TargetRecord {
  std::size_t id = 0;
  Vec3 g_ct = Vec3::Zero();
  Vec3 g_true = Vec3::Zero();  // physical
  Vec3 g_hat = Vec3::Zero();
  Vec3 r_hat = Vec3::Zero();
  std::uint64_t best_score = 0;
  std::vector<bool> success;  // one flag per entry of the eps list
};

struct StageTiming {
  double contact_ms = 0.0;
  double search_ms = 0.0;
  double acquire_ms = 0.0;
  double map_ms = 0.0;
  double targets_ms = 0.0;
};

struct TrialReport {
  std::size_t trial_index = 0;
  std::uint64_t noise_seed = 0;
  Vec3 placement_translation = Vec3::Zero();
  double placement_yaw_deg = 0.0;

  Vec3 p0 = Vec3::Zero();
  bool search_found = false;
  std::string failure_reason;
  Vec3 p_branch = Vec3::Zero();
  std::size_t search_waypoints = 0;
  std::size_t feedback_iterations = 0;

  bool mapped = false;
  SimilarityScores before;
  SimilarityScores after;
  double score_before = 0.0;
  double score_after = 0.0;
  bool registration_converged = false;
  RigidTransform3 pTc;
  double branch_point_error_mm = 0.0;

  double tol_x_mm = 0.0;
  std::vector<double> eps_mm;
  std::vector<TargetRecord> targets;
  StageTiming timing;

  /// Fraction of targets imaged successfully at eps_mm[e]; 0 without targets.
  double success_rate(std::size_t e) const;
};

/// The placed scene for a trial plus its noise seed; shared by run_trial and the CLI stages.
struct TrialSetup {
  PhantomScene scene;
  NoiseModel noise;
  RegistrationConfig registration;
};
TrialSetup make_trial_setup(const SweepConfig& cfg, std::size_t trial_index, const PhantomScene& base);

TrialReport run_trial(const SweepConfig& cfg, std::size_t trial_index);
/// `base` is the unplaced phantom for cfg.phantom_seed; `workers` parallelises targets.
TrialReport run_trial(const SweepConfig& cfg, std::size_t trial_index, const PhantomScene& base,
                      std::size_t workers = 1);

struct EpsStat {
  double eps_mm = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  bool operator==(const EpsStat&) const = default;
};

struct RegistrationRow {
  std::size_t trial = 0;
  bool mapped = false;
  SimilarityScores before;
  SimilarityScores after;
  double score_before = 0.0;
  double score_after = 0.0;
  bool converged = false;
  bool operator==(const RegistrationRow& o) const;
};

struct SweepSummary {
  int schema_version = SweepConfig::kSchemaVersion;
  std::size_t trials = 0;
  std::size_t targets_per_trial = 0;
  std::size_t search_failures = 0;
  double tol_x_mm = 0.0;
  std::vector<EpsStat> success;
  std::vector<std::vector<double>> per_trial_rates;  // [trial][eps]
  std::vector<RegistrationRow> registration;
  SimilarityScores mean_before;  // over mapped trials
  SimilarityScores mean_after;

  bool operator==(const SweepSummary& o) const;
  std::string to_json() const;
  static SweepSummary from_json(const std::string& text);
  static SweepSummary load(const std::filesystem::path& path);
};

struct SweepResult {
  SweepSummary summary;
  std::vector<TrialReport> reports;
};

SweepSummary summarize(const std::vector<TrialReport>& reports, const std::vector<double>& eps_mm);

/// workers = 0 uses the hardware concurrency.
SweepResult run_sweep(const SweepConfig& cfg, std::size_t workers = 0);

/// trials.csv, summary.json, success_curve.svg, registration.csv and timing.json.
void emit_reports(const SweepResult& result, const std::filesystem::path& out_dir);

std::string trials_csv(const std::vector<TrialReport>& reports);
std::string registration_csv(const SweepSummary& summary);
std::string success_curve_svg(const SweepSummary& summary);

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
/// (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace usreg
