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


#include "usreg/metrics.hpp"
#include "usreg/phantom.hpp"
#include "usreg/probe.hpp"
#include "usreg/registration.hpp"
#include "usreg/resample.hpp"

#include <benchmark/benchmark.h>

namespace usreg {
namespace {

const PhantomScene& scene() {
  static const PhantomScene s = generate_phantom(7);
  return s;
}

Vec3 above_branch() {
  const Vec3 b = scene().physical_branch_point();
  return Vec3(b.x() + 5.0, b.y(), *scene().surface_height(b.x() + 5.0, b.y()));
}

void BM_CaptureFrame(benchmark::State& state) {
  const ProbeParams pp;
  const ProbeState probe{above_branch()};
  for (auto _ : state) benchmark::DoNotOptimize(capture_us(scene(), probe, pp));
}
BENCHMARK(BM_CaptureFrame)->Unit(benchmark::kMillisecond);

void BM_Omia(benchmark::State& state) {
  const ProbeParams pp;
  const Mask2 pred = capture_us(scene(), {above_branch()}, pp).mask_truth;
  const Mask2 truth = capture_us(scene(), {above_branch() + Vec3(2.0, 0.0, 0.0)}, pp).mask_truth;
  for (auto _ : state) benchmark::DoNotOptimize(omia(pred, truth));
}
BENCHMARK(BM_Omia)->Unit(benchmark::kMillisecond);

void BM_MutualInformation(benchmark::State& state) {
  const MaskVolume f = scene().ct_frame_annotation();
  const auto T = RigidTransform3::about_center(RigidTransform3::euler_zyx(3.0, 0.0, 0.0), centroid(f),
                                               Vec3(2.0, -1.0, 0.5));
  for (auto _ : state) benchmark::DoNotOptimize(mutual_information(f, f, T));
}
BENCHMARK(BM_MutualInformation)->Unit(benchmark::kMillisecond);

void BM_RegisterRigid(benchmark::State& state) {
  const MaskVolume f = scene().ct_frame_annotation();
  const auto a = RigidTransform3::about_center(RigidTransform3::euler_zyx(4.0, 0.0, 0.0), centroid(f),
                                               Vec3(5.0, -3.0, 2.0));
  const MaskVolume m = resample_onto(f, f.geometry(), a);
  RegistrationConfig cfg;
  cfg.restarts = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(register_rigid(f, m, RigidTransform3::identity(), cfg));
}
BENCHMARK(BM_RegisterRigid)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace usreg

BENCHMARK_MAIN();
