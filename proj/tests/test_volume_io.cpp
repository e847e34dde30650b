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
#include "usreg/volume_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace usreg {
namespace {

class VolumeIo : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("usreg_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

Geometry3 odd_geometry() {
  Geometry3 g;
  g.shape = {4, 5, 6};
  g.spacing = Vec3(0.5, 1.25, 2.0);
  g.origin = Vec3(-3.0, 7.5, 0.125);
  g.axes = RigidTransform3::euler_zyx(30.0, 0.0, 0.0);
  return g;
}

TEST_F(VolumeIo, MaskRoundTrip) {
  Rng rng(1);
  MaskVolume v = testing::random_volume(rng, {4, 5, 6}, 0.4).with_geometry(odd_geometry());
  write_volume(v, dir_ / "m.vol");
  EXPECT_TRUE(std::filesystem::exists(dir_ / "m.raw"));
  const MaskVolume r = read_mask_volume(dir_ / "m.vol");
  EXPECT_TRUE(r.same_data(v));
  EXPECT_EQ(r.shape(), v.shape());
  EXPECT_EQ(r.geometry().spacing, v.geometry().spacing);
  EXPECT_EQ(r.geometry().origin, v.geometry().origin);
  EXPECT_TRUE(r.geometry().axes.isApprox(v.geometry().axes, 1e-15));
}

TEST_F(VolumeIo, IntensityRoundTrip) {
  std::vector<float> d(4 * 5 * 6);
  for (std::size_t n = 0; n < d.size(); ++n) d[n] = 0.1f * static_cast<float>(n) - 3.0f;
  const IntensityVolume v(odd_geometry(), d);
  write_volume(v, dir_ / "ct.vol");
  EXPECT_TRUE(read_intensity_volume(dir_ / "ct.vol").same_data(v));
}

TEST_F(VolumeIo, DtypeMismatchThrows) {
  Rng rng(2);
  write_volume(testing::random_volume(rng, {4, 4, 4}, 0.5), dir_ / "m.vol");
  EXPECT_THROW(read_intensity_volume(dir_ / "m.vol"), IoError);
}

TEST_F(VolumeIo, TruncatedDataThrows) {
  Rng rng(3);
  write_volume(testing::random_volume(rng, {4, 4, 4}, 0.5), dir_ / "m.vol");
  std::filesystem::resize_file(dir_ / "m.raw", 10);
  EXPECT_THROW(read_mask_volume(dir_ / "m.vol"), IoError);
}

TEST_F(VolumeIo, BadHeaderThrows) {
  EXPECT_THROW(read_mask_volume(dir_ / "missing.vol"), IoError);
  std::ofstream(dir_ / "bad.vol") << "{ not json";
  EXPECT_THROW(read_mask_volume(dir_ / "bad.vol"), IoError);
  std::ofstream(dir_ / "partial.vol") << R"({"dtype": "u8"})";
  EXPECT_THROW(read_mask_volume(dir_ / "partial.vol"), IoError);
}

TEST_F(VolumeIo, ExportSceneWritesVolumes) {
  const auto& s = testing::default_phantom();
  export_scene(s, dir_);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "scene.json"));
  EXPECT_TRUE(read_mask_volume(dir_ / "hv.vol").same_data(s.hv_annotation));
  EXPECT_TRUE(read_intensity_volume(dir_ / "ct.vol").same_data(s.ct));
}

}  // namespace
}  // namespace usreg
