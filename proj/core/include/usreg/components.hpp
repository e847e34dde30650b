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

#include "usreg/volume.hpp"

#include <vector>

namespace usreg {

/// Face-connected (4-neighbour in 2D, 6-neighbour in 3D) component labelling.
/// Labels are numbered from 1 in raster order of each component's first voxel.
struct ComponentLabels {
  std::vector<std::int32_t> labels;  // 0 = background
  std::vector<std::size_t> sizes;    // sizes[l - 1] is the voxel count of label l
};

ComponentLabels label_components(std::span<const std::uint8_t> mask, const Shape3& shape);

/// Keeps only the largest component; ties go to the component whose first
/// voxel comes first in raster order. Empty input gives empty output.
std::vector<std::uint8_t> largest_connected_component(std::span<const std::uint8_t> mask, const Shape3& shape);
Mask2 largest_connected_component(const Mask2& mask);
MaskVolume largest_connected_component(const MaskVolume& mask);

std::size_t count_components(const Mask2& mask);
std::size_t count_components(std::span<const std::uint8_t> mask, const Shape3& shape);

}  // namespace usreg
