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

namespace usreg {

// A volume on disk is a JSON header (`name.vol`) holding shape, spacing,
// origin, axes (list of column vectors), dtype ("u8" or "f32") and the name
// of a sibling raw file with little-endian samples, axis 0 slowest.

void write_volume(const MaskVolume& vol, const std::filesystem::path& header);
void write_volume(const IntensityVolume& vol, const std::filesystem::path& header);

MaskVolume read_mask_volume(const std::filesystem::path& header);
IntensityVolume read_intensity_volume(const std::filesystem::path& header);

/// ct.vol, hv.vol (both in the CT frame) and scene.json with seed, phantom
/// parameters, placement, branch point and target grid.
void export_scene(const PhantomScene& scene, const std::filesystem::path& dir);

}  // namespace usreg
