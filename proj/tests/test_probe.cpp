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
#include "usreg/probe.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace usreg {
namespace {

using testing::default_phantom;

Vec3 above_branch(const PhantomScene& s, double dx = 0.0) {
  const Vec3 b = s.physical_branch_point();
  return Vec3(b[0] + dx, b[1], *s.surface_height(b[0] + dx, b[1]));
}

TEST(Probe, InitialContactLiesOnSurfaceNearBranchPoint) {
  const auto& s = default_phantom();
  const ProbeState p = initial_contact(s);
  const Vec3 b = s.physical_branch_point();
  EXPECT_LE(std::hypot(p.position[0] - b[0], p.position[1] - b[1]), 10.0);
  EXPECT_DOUBLE_EQ(p.position[2], *s.surface_height(p.position[0], p.position[1]));
}

TEST(Probe, PixelGeometry) {
  const ProbeParams pp;
  const Vec3 pos(1.0, 2.0, 3.0);
  const Vec3 p00 = frame_pixel_position(pos, pp, 0, 0);
  EXPECT_TRUE((p00 - Vec3(1.0, 2.0 - 40.0, 3.0)).norm() < 1e-12);
  const Vec3 p = frame_pixel_position(pos, pp, 10, 5);
  EXPECT_NEAR(p[1], 2.0 - 40.0 + 10.0 * pp.pixel_spacing[0], 1e-12);
  EXPECT_NEAR(p[2], 3.0 - 5.0 * 0.8, 1e-12);
  EXPECT_DOUBLE_EQ(p[0], 1.0);
}

TEST(Probe, FrameShapesAndRanges) {
  const auto& s = default_phantom();
  const ProbeParams pp;
  const auto f = capture_us(s, {above_branch(s)}, pp);
  EXPECT_EQ(f.image.shape, pp.image_shape);
  EXPECT_EQ(f.mask_truth.shape, pp.image_shape);
  EXPECT_GT(count_nonzero(f.mask_truth), 0u);
  EXPECT_GT(count_nonzero(f.branch_truth), 0u);
  for (std::size_t n = 0; n < f.branch_truth.data.size(); ++n) {
    if (f.branch_truth.data[n]) ASSERT_TRUE(f.mask_truth.data[n]);
  }
  for (float v : f.image.data) {
    ASSERT_GE(v, 0.0f);
    ASSERT_LE(v, 1.0f);
  }
}

TEST(Probe, FramesAroundBranchPoint) {
  const auto& s = default_phantom();
  EXPECT_EQ(count_components(capture_us(s, {above_branch(s, -4.0)}, ProbeParams{}).mask_truth), 1u);
  EXPECT_GE(count_components(capture_us(s, {above_branch(s, 3.0)}, ProbeParams{}).mask_truth), 2u);
}

TEST(Probe, LateralShiftMovesContentByPixels) {
  const auto& s = default_phantom();
  const ProbeParams pp;
  const Vec3 p = above_branch(s);
  const std::size_t k = 7;
  const auto a = capture_us(s, {p}, pp);
  const auto b = capture_us(s, {p + Vec3(0.0, static_cast<double>(k) * pp.pixel_spacing[0], 0.0)}, pp);
  std::size_t mismatch = 0, compared = 0;
  for (std::size_t i = 0; i + k < pp.lx(); ++i)
    for (std::size_t j = 0; j < pp.ly(); ++j) {
      ++compared;
      if (b.mask_truth(i, j) != a.mask_truth(i + k, j)) ++mismatch;
    }
  // Allow a handful of nearest-neighbour ties to round differently.
  EXPECT_LE(mismatch, compared / 1000);
}

TEST(Probe, FarAwayFrameIsEmpty) {
  const auto& s = default_phantom();
  const auto f = capture_us(s, {Vec3(1000.0, 1000.0, 0.0)}, ProbeParams{});
  EXPECT_EQ(count_nonzero(f.mask_truth), 0u);
  for (float v : f.image.data) ASSERT_EQ(v, 0.0f);
}

TEST(Probe, ValidateRejectsInconsistentGeometry) {
  ProbeParams pp;
  pp.pixel_spacing[0] = 1.0;
  EXPECT_THROW(pp.validate(), ParameterError);
  pp = {};
  pp.image_shape = {0, 100};
  EXPECT_THROW(pp.validate(), ParameterError);
}

TEST(Probe, ExportsNetpbm) {
  const auto dir = std::filesystem::temp_directory_path() / "usreg_probe_test";
  std::filesystem::remove_all(dir);
  Mask2 m({3, 2}, Vec2::Ones(), 0);
  m(1, 0) = 1;
  m(2, 1) = 1;
  std::filesystem::create_directories(dir);
  write_pbm(m, dir / "m.pbm");
  std::ifstream in(dir / "m.pbm");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), "P1\n3 2\n0 1 0\n0 0 1\n");

  Gray2 g({2, 1}, Vec2::Ones(), 0.0f);
  g(1, 0) = 1.0f;
  write_pgm(g, dir / "g.pgm");
  std::ifstream gin(dir / "g.pgm", std::ios::binary);
  std::string body((std::istreambuf_iterator<char>(gin)), std::istreambuf_iterator<char>());
  EXPECT_EQ(body, std::string("P5\n2 1\n255\n") + '\0' + '\xff');

  const auto& s = default_phantom();
  export_frame(capture_us(s, {above_branch(s)}, ProbeParams{}), dir, "f");
  EXPECT_TRUE(std::filesystem::exists(dir / "f.pgm"));
  EXPECT_TRUE(std::filesystem::exists(dir / "f_mask.pbm"));
  EXPECT_TRUE(std::filesystem::exists(dir / "f_branch.pbm"));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace usreg
