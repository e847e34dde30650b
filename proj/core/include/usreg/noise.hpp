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

#include "usreg/probe.hpp"

#include <cstdint>

namespace usreg {

/// Parametric corruption standing in for a trained segmentation network.
/// Draws depend only on (seed, frame index, oracle), never on call order.
struct NoiseModel {
  double pixel_flip_rate = 0.0;
  /// Mean number of spurious blobs per frame (Poisson), in [0, 1].
  double spurious_blob_rate = 0.0;
  std::size_t blob_min_px = 10;
  std::size_t blob_max_px = 40;
  /// Dilation/erosion radius drawn uniformly from [-morph_jitter, morph_jitter].
  int morph_jitter = 0;
  std::uint64_t seed = 0;

  void validate() const;
  bool is_zero() const { return pixel_flip_rate == 0.0 && spurious_blob_rate == 0.0 && morph_jitter == 0; }

  static NoiseModel zero() { return {}; }
  /// Calibrated so full-vessel Dice against the truth mask averages about 0.76.
  /// Spurious blobs are off by default: at this resolution they cost Dice faster
  /// than they perturb slice matching.
  static NoiseModel paper_default() { return {0.0025, 0.0, 10, 40, 1, 0}; }
};

enum class OracleKind : std::uint64_t { Full = 1, Branch = 2 };

Mask2 corrupt_mask(const Mask2& clean, const NoiseModel& noise, std::uint64_t frame_index, OracleKind kind);

/// Full-vessel oracle.
Mask2 segment_full(const UltrasoundFrame& frame, const NoiseModel& noise, std::uint64_t frame_index);
/// Branching-point oracle: only the main MHV and trunk near the branch point.
Mask2 segment_branch(const UltrasoundFrame& frame, const NoiseModel& noise, std::uint64_t frame_index);

}  // namespace usreg
