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

#include <cstdint>

namespace usreg {

/// Raw counts behind the overlap metrics.
struct OverlapCounts {
  std::uint64_t intersection = 0;
  std::uint64_t pred = 0;
  std::uint64_t truth = 0;
};

/// Throws ShapeMismatchError when the arrays differ in size.
OverlapCounts overlap_counts(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> truth);
OverlapCounts overlap_counts(const Mask2& pred, const Mask2& truth);
OverlapCounts overlap_counts(const MaskVolume& pred, const MaskVolume& truth);

// |pred ∩ truth| / |pred|, |pred ∩ truth| / |truth| and 2|∩| / (|pred| + |truth|).
// Both masks empty: 1. A zero denominator with the other mask nonempty: 0.
double precision(const OverlapCounts& c);
double recall(const OverlapCounts& c);
double dice(const OverlapCounts& c);

template <class M>
double precision(const M& pred, const M& truth) { return precision(overlap_counts(pred, truth)); }
template <class M>
double recall(const M& pred, const M& truth) { return recall(overlap_counts(pred, truth)); }
template <class M>
double dice(const M& pred, const M& truth) { return dice(overlap_counts(pred, truth)); }

struct SimilarityScores {
  double precision = 0.0;
  double recall = 0.0;
  double dice = 0.0;
};
SimilarityScores similarity(const OverlapCounts& c);

/// Optimal moving intersection area: the largest overlap count between
/// `truth` and any integer translation of `pred`. A smaller `pred` is
/// zero-padded to `truth`'s shape first; a larger one throws ShapeMismatchError.
std::uint64_t omia(const Mask2& pred, const Mask2& truth);

}  // namespace usreg
