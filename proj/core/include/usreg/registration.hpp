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

#include "usreg/transform.hpp"
#include "usreg/volume.hpp"

#include <array>
#include <string>
#include <vector>

namespace usreg {

enum class Objective { MutualInformation, NegativeDice };

std::string to_string(Objective o);
Objective objective_from_string(const std::string& s);

struct RegistrationConfig {
  Objective objective = Objective::MutualInformation;
  int histogram_bins = 2;
  int pyramid_levels = 2;
  int max_iterations = 200;  // per pyramid level
  double tolerance_mm = 0.1;
  double tolerance_deg = 0.1;
  int restarts = 2;          // extra jittered starts besides `init`
  double bound_mm = 30.0;    // |translation correction| per axis
  double bound_deg = 10.0;   // |Euler angle| per axis
  double initial_step_mm = 4.0;
  double initial_step_deg = 2.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct JointHistogram {
  int bins = 2;
  std::vector<std::uint64_t> counts;  // counts[f * bins + m]
  std::uint64_t overlap = 0;          // fixed voxels whose sample lands inside the moving grid
};

/// Fixed-grid voxels whose image under T lands inside the moving grid,
/// binned by (fixed value, nearest moving value).
JointHistogram joint_histogram(const MaskVolume& fixed, const MaskVolume& moving, const RigidTransform3& T, int bins);

struct MutualInformation {
  double value = 0.0;  // nats, >= 0
  std::uint64_t overlap = 0;
  bool empty_overlap = false;
};

double mutual_information(const JointHistogram& h);
/// MI between fixed values and moving values sampled at T(fixed voxel).
/// `T` maps fixed physical points to moving physical points.
MutualInformation mutual_information(const MaskVolume& fixed, const MaskVolume& moving, const RigidTransform3& T,
                                     int bins = 2);

struct RegistrationResult {
  RigidTransform3 transform;
  double score_init = 0.0;
  double score = 0.0;
  /// (tx, ty, tz, yaw, pitch, roll) correction applied on top of `init`,
  /// rotating about init(centroid of fixed).
  std::array<double, 6> params{};
  bool converged = true;
  std::size_t evaluations = 0;
  std::size_t best_restart = 0;
  /// Best score after every accepted or rejected sweep, per pyramid level of
  /// the winning restart (coarsest first).
  std::vector<std::vector<double>> level_trace;
};

/// Objective value of `T` on the full-resolution grids (higher is better).
double registration_score(const MaskVolume& fixed, const MaskVolume& moving, const RigidTransform3& T,
                          const RegistrationConfig& cfg);

/// Rigid registration of two binary volumes on harmonised grids (same shape
/// and spacing). The result maps fixed physical points to moving physical
/// points and never scores below `init`.
RegistrationResult register_rigid(const MaskVolume& fixed, const MaskVolume& moving, const RigidTransform3& init,
                                  const RegistrationConfig& cfg);

}  // namespace usreg
