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

#include "usreg/phantom.hpp"
#include "usreg/volume.hpp"

#include <filesystem>
#include <string>

namespace usreg {

/// Transducer geometry. Image axis 0 runs laterally along +y, axis 1 down
/// into the body along -z; the imaging plane is always axial (normal +x).
struct ProbeParams {
  double fov_width_mm = 80.0;
  double fov_depth_mm = 80.0;
  Shape2 image_shape{216, 100};
  Vec2 pixel_spacing{80.0 / 216.0, 0.8};

  void validate() const;
  std::size_t lx() const { return image_shape[0]; }
  std::size_t ly() const { return image_shape[1]; }
};

/// Transducer centre on the skin. Orientation is fixed for the whole run.
struct ProbeState {
  Vec3 position = Vec3::Zero();
};

struct UltrasoundFrame {
  Gray2 image;
  Mask2 mask_truth;
  /// Subset of mask_truth seen by the branching-point oracle.
  Mask2 branch_truth;
  Vec3 capture_position = Vec3::Zero();
};

/// Probe on the skin above the centroid of the body's top-down footprint.
ProbeState initial_contact(const PhantomScene& scene);

/// Axial slice at x = probe.x; pixel (0,0) sits at position - fov_width/2 * y.
UltrasoundFrame capture_us(const PhantomScene& scene, const ProbeState& probe, const ProbeParams& params);

/// Physical location of pixel (i, j) of a frame captured at `position`.
Vec3 frame_pixel_position(const Vec3& position, const ProbeParams& params, double i, double j);

/// Writes <stem>.pgm (intensity), <stem>_mask.pbm and <stem>_branch.pbm.
void export_frame(const UltrasoundFrame& frame, const std::filesystem::path& dir, const std::string& stem);
void write_pbm(const Mask2& mask, const std::filesystem::path& path);
void write_pgm(const Gray2& image, const std::filesystem::path& path);

}  // namespace usreg
