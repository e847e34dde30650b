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
#include "usreg/components.hpp"
#include "usreg/noise.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace usreg {
namespace {

Mask2 frame_with_disc() {
  Mask2 m({216, 100}, Vec2(80.0 / 216.0, 0.8), 0);
  for (std::size_t i = 0; i < 216; ++i)
    for (std::size_t j = 0; j < 100; ++j)
      if (std::hypot(static_cast<double>(i) - 100.0, static_cast<double>(j) - 50.0) < 12.0) m(i, j) = 1;
  return m;
}

TEST(Noise, ZeroModelIsIdentity) {
  const Mask2 m = frame_with_disc();
  EXPECT_EQ(corrupt_mask(m, NoiseModel::zero(), 5, OracleKind::Full), m);
  EXPECT_TRUE(NoiseModel::zero().is_zero());
  EXPECT_FALSE(NoiseModel::paper_default().is_zero());
}

TEST(Noise, ReproduciblePerFrameAndOracle) {
  const Mask2 m = frame_with_disc();
  const NoiseModel n = NoiseModel::paper_default();
  EXPECT_EQ(corrupt_mask(m, n, 11, OracleKind::Full), corrupt_mask(m, n, 11, OracleKind::Full));
  bool differs = false;
  for (std::uint64_t f = 0; f < 8 && !differs; ++f)
    differs = corrupt_mask(m, n, f, OracleKind::Full) != corrupt_mask(m, n, f, OracleKind::Branch);
  EXPECT_TRUE(differs);
  NoiseModel other = n;
  other.seed = 99;
  differs = false;
  for (std::uint64_t f = 0; f < 8 && !differs; ++f)
    differs = corrupt_mask(m, n, f, OracleKind::Full) != corrupt_mask(m, other, f, OracleKind::Full);
  EXPECT_TRUE(differs);
}

TEST(Noise, FlipRateMatchesStatistically) {
  const Mask2 empty({216, 100}, Vec2::Ones(), 0);
  NoiseModel n;
  n.pixel_flip_rate = 0.1;
  const double N = 216.0 * 100.0;
  const double got = static_cast<double>(count_nonzero(corrupt_mask(empty, n, 3, OracleKind::Full)));
  const double sigma = std::sqrt(N * 0.1 * 0.9);
  EXPECT_NEAR(got, 0.1 * N, 5.0 * sigma);
}

TEST(Noise, JitterDilatesOrErodesByOnePixel) {
  Mask2 m({9, 9}, Vec2::Ones(), 0);
  for (std::size_t i = 3; i < 6; ++i)
    for (std::size_t j = 3; j < 6; ++j) m(i, j) = 1;
  NoiseModel n;
  n.morph_jitter = 1;
  bool saw_grow = false, saw_shrink = false, saw_same = false;
  for (std::uint64_t f = 0; f < 60; ++f) {
    const auto c = count_nonzero(corrupt_mask(m, n, f, OracleKind::Full));
    if (c == 9 + 12) saw_grow = true;       // 3x3 plus four edge rows of 3
    else if (c == 1) saw_shrink = true;     // only the center survives a cross erosion
    else if (c == 9) saw_same = true;
    else ADD_FAILURE() << "unexpected area " << c;
  }
  EXPECT_TRUE(saw_grow && saw_shrink && saw_same);
}

TEST(Noise, SpuriousBlobsStayBelowDetectionThreshold) {
  const Mask2 empty({216, 100}, Vec2::Ones(), 0);
  NoiseModel n;
  n.spurious_blob_rate = 1.0;
  std::size_t frames_with_blobs = 0;
  for (std::uint64_t f = 0; f < 200; ++f) {
    const Mask2 out = corrupt_mask(empty, n, f, OracleKind::Full);
    const auto area = count_nonzero(largest_connected_component(out));
    if (area > 0) ++frames_with_blobs;
    EXPECT_LT(area, 160u);
  }
  EXPECT_GT(frames_with_blobs, 50u);
}

TEST(Noise, SegmentUsesMatchingTruth) {
  UltrasoundFrame f;
  f.mask_truth = frame_with_disc();
  f.branch_truth = Mask2(f.mask_truth.shape, f.mask_truth.spacing, 0);
  EXPECT_EQ(segment_full(f, NoiseModel::zero(), 0), f.mask_truth);
  EXPECT_EQ(segment_branch(f, NoiseModel::zero(), 0), f.branch_truth);
}

TEST(Noise, ValidateRejectsBadParameters) {
  NoiseModel n;
  n.pixel_flip_rate = 1.5;
  EXPECT_THROW(n.validate(), ParameterError);
  n = {};
  n.spurious_blob_rate = 2.0;
  EXPECT_THROW(n.validate(), ParameterError);
  n = {};
  n.blob_min_px = 50;
  EXPECT_THROW(n.validate(), ParameterError);
  n = {};
  n.morph_jitter = -1;
  EXPECT_THROW(corrupt_mask(frame_with_disc(), n, 0, OracleKind::Full), ParameterError);
}

}  // namespace
}  // namespace usreg
