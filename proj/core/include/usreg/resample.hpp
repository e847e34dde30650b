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

namespace usreg {

/// Nearest-neighbour sample at a physical point; 0 outside the array.
std::uint8_t sample_nearest(const MaskVolume& vol, const Vec3& p);
/// Trilinear sample at a physical point; 0 outside the array.
float sample_trilinear(const IntensityVolume& vol, const Vec3& p);

/// Geometry with the source's axes, the requested spacing and shape, and a
/// physical extent centred on `center`.
Geometry3 centered_geometry(const Mat3& axes, const Vec3& spacing, const Shape3& shape, const Vec3& center);

/// Resample onto a grid of `target_spacing`/`target_shape` centred at `center`.
/// Masks use nearest neighbour (output stays binary), intensities trilinear.
/// Samples outside the source extent are 0.
MaskVolume resample_crop(const MaskVolume& vol, const Vec3& target_spacing, const Shape3& target_shape,
                         const Vec3& center);
IntensityVolume resample_crop(const IntensityVolume& vol, const Vec3& target_spacing,
                              const Shape3& target_shape, const Vec3& center);

/// out(p) = src(T(p)) for every voxel p of `target`, nearest neighbour.
/// `T` maps target-frame points into the source's frame.
MaskVolume resample_onto(const MaskVolume& src, const Geometry3& target, const RigidTransform3& T);

/// Block max-pool by `factor` along every axis; spacing scales by `factor`
/// and the origin moves to the centre of the first block.
MaskVolume downsample_max(const MaskVolume& vol, std::size_t factor);

}  // namespace usreg
