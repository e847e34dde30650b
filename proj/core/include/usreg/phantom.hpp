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

#include <optional>
#include <string>
#include <vector>

namespace usreg {

enum class VesselLabel : std::uint8_t { Trunk = 1, MHV = 2, LHV = 3, RHV = 4 };

std::string to_string(VesselLabel label);

struct VesselBranch {
  std::vector<Vec3> polyline;  // mm, scene-intrinsic (CT) frame
  double radius = 0.0;
  VesselLabel label = VesselLabel::Trunk;
  bool tributary = false;
};

/// Hepatic vein tree. The trunk and the three main veins start at branch_point.
struct VesselTree {
  std::vector<VesselBranch> branches;
  Vec3 branch_point = Vec3::Zero();
};

struct VesselRadii {
  double trunk = 4.0;
  double mhv = 3.0;
  double lhv = 2.5;
  double rhv = 2.5;
};

struct PhantomParams {
  Shape3 volume_shape{64, 96, 64};
  double spacing_mm = 2.0;
  /// Angle between the inferior axis and the first segment of LHV / RHV.
  double lhv_angle_deg = 90.0;
  double rhv_angle_deg = 90.0;
  VesselRadii radii{};
  /// Standard deviation of the voxel texture noise in the CT intensity.
  double noise_texture_level = 0.02;
  int tributaries = 4;
  /// Arc length from the branch point covered by the branching-point oracle.
  double branch_oracle_distance_mm = 25.0;
  /// False produces an otherwise identical body with an empty annotation.
  bool with_vessels = true;

  /// Throws ParameterError on degenerate values.
  void validate() const;
};

/// Top-of-body height per (axis-0, axis-1) column of the intrinsic grid.
struct Heightfield {
  Geometry3 grid;           // intrinsic CT geometry (axis 2 must point up)
  std::vector<double> top;  // NaN where the column holds no body voxel
};

/// A generated or hand-built virtual patient. ct, hv_annotation, branch_region
/// and body carry the placed (physical) geometry; `tree` and `intrinsic` are
/// in the CT frame.
struct PhantomScene {
  std::uint64_t seed = 0;
  PhantomParams params;
  Geometry3 intrinsic;
  IntensityVolume ct;
  MaskVolume hv_annotation;
  /// Annotation voxels the branching-point oracle reports (main MHV and trunk
  /// near the branch point). Ground truth only.
  MaskVolume branch_region;
  MaskVolume body;
  Heightfield surface;
  RigidTransform3 placement;
  VesselTree tree;

  /// Skin height (physical z) above a physical (x, y); nullopt off the body.
  std::optional<double> surface_height(double x, double y) const;
  /// The annotation as stored with the CT: same voxels, CT-frame geometry.
  MaskVolume ct_frame_annotation() const { return hv_annotation.with_geometry(intrinsic); }
  Vec3 to_physical(const Vec3& ct_point) const { return placement.apply(ct_point); }
  Vec3 physical_branch_point() const { return placement.apply(tree.branch_point); }
};

/// Assembles a scene from CT-frame volumes (identity placement) and derives
/// its surface heightfield from `body`.
PhantomScene make_scene(IntensityVolume ct, MaskVolume hv_annotation, MaskVolume branch_region, MaskVolume body,
                        VesselTree tree, PhantomParams params = {}, std::uint64_t seed = 0);

/// Deterministic in (seed, params).
PhantomScene generate_phantom(std::uint64_t seed, const PhantomParams& params = {});

/// Yaw about the physical z axis, then translation. |yaw_deg| <= 10.
PhantomScene place_phantom(const PhantomScene& scene, const Vec3& translation, double yaw_deg);

/// Target lattice length on a liver of this inferior-superior extent.
inline constexpr double kReferenceLiverExtentMm = 150.0;
inline constexpr std::size_t kGridRows = 50;
inline constexpr std::size_t kGridCols = 2;

/// 100 CT-frame target points on a 50 x 2 lattice centred on the branch point.
std::vector<Vec3> target_grid(const PhantomScene& scene);

}  // namespace usreg
