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

#include "usreg/rng.hpp"
#include "usreg/transform.hpp"

#include <Eigen/Geometry>
#include <gtest/gtest.h>

namespace usreg {
namespace {

RigidTransform3 random_transform(Rng& rng) {
  return {RigidTransform3::euler_zyx(rng.uniform(-180, 180), rng.uniform(-90, 90), rng.uniform(-180, 180)),
          Vec3(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50))};
}

TEST(RigidTransform, RejectsReflectionsAndShear) {
  Mat3 reflect = Mat3::Identity();
  reflect(2, 2) = -1;
  EXPECT_THROW(RigidTransform3(reflect, Vec3::Zero()), ParameterError);
  Mat3 shear = Mat3::Identity();
  shear(0, 1) = 1e-6;
  EXPECT_THROW(RigidTransform3(shear, Vec3::Zero()), ParameterError);
}

TEST(RigidTransform, IdentityComposition) {
  Rng rng(1);
  const auto t = random_transform(rng);
  for (int i = 0; i < 100; ++i) {
    const Vec3 p(rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-100, 100));
    EXPECT_NEAR((compose(RigidTransform3::identity(), t).apply(p) - t.apply(p)).norm(), 0.0, 1e-9);
  }
}

TEST(RigidTransform, TranslationsAdd) {
  const auto a = RigidTransform3::translation(Vec3(1, 2, 3));
  const auto b = RigidTransform3::translation(Vec3(-4, 0.5, 2));
  EXPECT_TRUE(compose(a, b).translation().isApprox(Vec3(-3, 2.5, 5)));
}

TEST(RigidTransform, RotateThenTranslate) {
  const RigidTransform3 rz(RigidTransform3::euler_zyx(90, 0, 0), Vec3::Zero());
  const auto t = compose(RigidTransform3::translation(Vec3(1, 0, 0)), rz);
  EXPECT_NEAR((apply_transform(t, Vec3(1, 0, 0)) - Vec3(1, 1, 0)).norm(), 0.0, 1e-12);
}

TEST(RigidTransform, EulerOrderIsZYX) {
  const Mat3 r = RigidTransform3::euler_zyx(30, 20, 10);
  const Mat3 expected = Eigen::AngleAxisd(deg2rad(30), Vec3::UnitZ()).toRotationMatrix() *
                        Eigen::AngleAxisd(deg2rad(20), Vec3::UnitY()).toRotationMatrix() *
                        Eigen::AngleAxisd(deg2rad(10), Vec3::UnitX()).toRotationMatrix();
  EXPECT_TRUE(r.isApprox(expected, 1e-12));
}

TEST(RigidTransform, InverseRoundTrip) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto t = random_transform(rng);
    const Vec3 p(rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-100, 100));
    EXPECT_NEAR((inverse(t).apply(t.apply(p)) - p).norm(), 0.0, 1e-9);
    EXPECT_NEAR((compose(t, inverse(t)).apply(p) - p).norm(), 0.0, 1e-9);
  }
}

TEST(RigidTransform, AboutCenterFixesCenter) {
  const Vec3 c(10, -4, 7);
  const auto t = RigidTransform3::about_center(RigidTransform3::euler_zyx(25, -5, 3), c, Vec3::Zero());
  EXPECT_NEAR((t.apply(c) - c).norm(), 0.0, 1e-12);
  EXPECT_NEAR(t.rotation_angle_deg(), RigidTransform3(t.rotation(), Vec3::Zero()).rotation_angle_deg(), 1e-12);
}

TEST(RigidTransform, RotationAngle) {
  EXPECT_NEAR(RigidTransform3(RigidTransform3::euler_zyx(7, 0, 0), Vec3::Zero()).rotation_angle_deg(), 7.0, 1e-9);
  EXPECT_NEAR(RigidTransform3::identity().rotation_angle_deg(), 0.0, 1e-9);
}

}  // namespace
}  // namespace usreg
