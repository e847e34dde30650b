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

#include <gtest/gtest.h>

namespace usreg {
namespace {

Geometry3 unit_geometry(Shape3 shape) {
  Geometry3 g;
  g.shape = shape;
  return g;
}

TEST(Geometry, ValidateRejectsBadSpacingAndAxes) {
  Geometry3 g = unit_geometry({2, 2, 2});
  EXPECT_NO_THROW(g.validate());
  g.spacing = Vec3(1, 0, 1);
  EXPECT_THROW(g.validate(), ParameterError);
  g.spacing = Vec3::Ones();
  g.axes(0, 1) = 0.1;
  EXPECT_THROW(g.validate(), ParameterError);
}

TEST(Geometry, LeftHandedAxesAreAccepted) {
  Geometry3 g = unit_geometry({2, 2, 2});
  g.axes.col(2) = -Vec3::UnitZ();
  EXPECT_NO_THROW(g.validate());
}

TEST(VoxelToPhysical, OriginAndLinearity) {
  Geometry3 g = unit_geometry({4, 4, 4});
  EXPECT_TRUE(voxel_to_physical(g, {0, 0, 0}).isApprox(Vec3::Zero()));
  g.origin = Vec3(10, 0, 0);
  g.spacing = Vec3(2, 1, 1);
  EXPECT_EQ(voxel_to_physical(g, {3, 0, 0}), Vec3(16, 0, 0));
}

TEST(VoxelToPhysical, DownwardDepthAxis) {
  Geometry3 g = unit_geometry({1, 1, 6});
  g.axes.col(2) = -Vec3::UnitZ();
  g.origin = Vec3(0, 0, 100);
  EXPECT_EQ(voxel_to_physical(g, {0, 0, 5}), Vec3(0, 0, 95));
}

TEST(VoxelToPhysical, OutOfBoundsThrows) {
  const Geometry3 g = unit_geometry({2, 3, 4});
  EXPECT_THROW(voxel_to_physical(g, {2, 0, 0}), BoundsError);
  EXPECT_THROW(voxel_to_physical(g, {0, 0, 4}), BoundsError);
}

TEST(PhysicalToVoxel, HalfStepAlongFirstAxis) {
  Geometry3 g = unit_geometry({4, 4, 4});
  g.spacing = Vec3(3, 2, 1);
  g.origin = Vec3(-1, 5, 2);
  g.axes = RigidTransform3::euler_zyx(30, 10, -20);
  const Vec3 p = g.origin + 0.5 * g.spacing[0] * g.axes.col(0);
  EXPECT_TRUE(physical_to_voxel(g, p).isApprox(Vec3(0.5, 0, 0), 1e-12));
}

TEST(PhysicalToVoxel, RoundTripOnRandomGeometries) {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    Geometry3 g = unit_geometry({8, 9, 10});
    g.spacing = Vec3(rng.uniform(0.2, 4), rng.uniform(0.2, 4), rng.uniform(0.2, 4));
    g.origin = Vec3(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50));
    g.axes = RigidTransform3::euler_zyx(rng.uniform(-180, 180), rng.uniform(-90, 90), rng.uniform(-180, 180));
    const Index3 idx{3, 4, 5};
    const Vec3 back = physical_to_voxel(g, voxel_to_physical(g, idx));
    EXPECT_NEAR(back[0], 3, 1e-9);
    EXPECT_NEAR(back[1], 4, 1e-9);
    EXPECT_NEAR(back[2], 5, 1e-9);
  }
}

TEST(Volume, ConstructorChecksSizeAndBinarity) {
  const Geometry3 g = unit_geometry({2, 2, 2});
  EXPECT_THROW(MaskVolume(g, std::vector<std::uint8_t>(7, 0)), ShapeMismatchError);
  std::vector<std::uint8_t> bad(8, 0);
  bad[3] = 2;
  EXPECT_THROW(MaskVolume(g, bad), ParameterError);
  EXPECT_NO_THROW(IntensityVolume(g, std::vector<float>(8, 2.5f)));
}

TEST(Volume, IndexingIsAxisZeroMajor) {
  const Geometry3 g = unit_geometry({2, 3, 4});
  std::vector<float> d(24);
  for (std::size_t n = 0; n < d.size(); ++n) d[n] = static_cast<float>(n);
  const IntensityVolume v(g, d);
  EXPECT_EQ(v.at(1, 2, 3), 23.0f);
  EXPECT_EQ(v.at(0, 1, 0), 4.0f);
  EXPECT_EQ(v.at(1, 0, 0), 12.0f);
}

TEST(Volume, WithGeometrySharesDataAndChecksShape) {
  const MaskVolume v(unit_geometry({2, 2, 2}), std::vector<std::uint8_t>(8, 1));
  Geometry3 moved = v.geometry();
  moved.origin = Vec3(1, 2, 3);
  const auto w = v.with_geometry(moved);
  EXPECT_EQ(w.data().data(), v.data().data());
  EXPECT_THROW(v.with_geometry(unit_geometry({2, 2, 3})), ShapeMismatchError);
}

TEST(Centroid, SingleVoxelAndSymmetricPair) {
  Geometry3 g = unit_geometry({3, 3, 3});
  g.origin = Vec3(-1, -1, -1);
  std::vector<std::uint8_t> d(27, 0);
  d[g.linear(2, 0, 1)] = 1;
  EXPECT_TRUE(centroid(MaskVolume(g, d)).isApprox(voxel_to_physical(g, {2, 0, 1})));
  std::fill(d.begin(), d.end(), 0);
  d[g.linear(0, 1, 1)] = 1;
  d[g.linear(2, 1, 1)] = 1;
  EXPECT_NEAR(centroid(MaskVolume(g, d)).norm(), 0.0, 1e-12);
}

TEST(Centroid, LShape) {
  const Geometry3 g = unit_geometry({2, 2, 1});
  std::vector<std::uint8_t> d(4, 0);
  d[g.linear(0, 0, 0)] = d[g.linear(1, 0, 0)] = d[g.linear(0, 1, 0)] = 1;
  const Vec3 c = centroid(MaskVolume(g, d));
  EXPECT_NEAR(c.x(), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(c.y(), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(c.z(), 0.0, 1e-12);
}

TEST(Centroid, EmptyMaskThrows) {
  EXPECT_THROW(centroid(MaskVolume(unit_geometry({2, 2, 2}), std::vector<std::uint8_t>(8, 0))), EmptyMaskError);
}

TEST(TranslateVolume, ShiftsCentroidExactly) {
  Rng rng(5);
  const MaskVolume v = testing::random_volume(rng, {6, 7, 8}, 0.3);
  const Vec3 c = centroid(v);
  EXPECT_TRUE(translate_volume(v, Vec3::Zero()).same_data(v));
  EXPECT_EQ(translate_volume(v, Vec3::Zero()).geometry().origin, v.geometry().origin);
  const Vec3 d(5, 0, 0);
  EXPECT_NEAR((centroid(translate_volume(v, d)) - (c + d)).norm(), 0.0, 1e-9);
}

TEST(TranslateVolume, CentroidAlignment) {
  Rng rng(6);
  const MaskVolume a = testing::random_volume(rng, {5, 5, 5}, 0.4);
  const MaskVolume b = testing::random_volume(rng, {9, 4, 6}, 0.2, Vec3(2, 1, 0.5));
  const MaskVolume moved = translate_volume(b, centroid(a) - centroid(b));
  EXPECT_NEAR((centroid(moved) - centroid(a)).norm(), 0.0, 1e-9);
}

TEST(Image2, RowMajorLayout) {
  Mask2 m({3, 4}, Vec2(0.5, 0.8), 0);
  m(2, 1) = 1;
  EXPECT_EQ(m.data[2 * 4 + 1], 1);
  EXPECT_EQ(count_nonzero(m), 1u);
}

}  // namespace
}  // namespace usreg
