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

#include "usreg/probe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace usreg {

void ProbeParams::validate() const {
  if (!(fov_width_mm > 0.0 && fov_depth_mm > 0.0)) throw ParameterError("probe field of view must be positive");
  if (image_shape[0] == 0 || image_shape[1] == 0) throw ParameterError("probe image shape must be positive");
  if (!(pixel_spacing[0] > 0.0 && pixel_spacing[1] > 0.0)) throw ParameterError("probe pixel spacing must be positive");
  if (std::abs(static_cast<double>(image_shape[0]) * pixel_spacing[0] - fov_width_mm) > pixel_spacing[0]) {
    throw ParameterError("image width times lateral spacing must match the field of view");
  }
}

ProbeState initial_contact(const PhantomScene& scene) {
  // The camera sees the body from above; its footprint is the set of
  // columns holding any body voxel.
  const Geometry3& g = scene.intrinsic;
  const auto body = scene.body.data();
  Vec3 sum = Vec3::Zero();
  std::size_t n = 0;
  for (std::size_t i = 0; i < g.shape[0]; ++i) {
    for (std::size_t j = 0; j < g.shape[1]; ++j) {
      const std::size_t row = g.linear(i, j, 0);
      const bool any = std::any_of(body.begin() + static_cast<std::ptrdiff_t>(row),
                                   body.begin() + static_cast<std::ptrdiff_t>(row + g.shape[2]),
                                   [](std::uint8_t v) { return v != 0; });
      if (any) {
        sum += index_to_physical(g, Vec3(static_cast<double>(i), static_cast<double>(j), 0.0));
        ++n;
      }
    }
  }
  if (n == 0) throw EmptyMaskError("body footprint is empty");
  const Vec3 c = scene.placement.apply(sum / static_cast<double>(n));
  const auto z = scene.surface_height(c[0], c[1]);
  if (!z) throw EmptyMaskError("footprint centroid is not on the body");
  return {Vec3(c[0], c[1], *z)};
}

Vec3 frame_pixel_position(const Vec3& position, const ProbeParams& params, double i, double j) {
  return position + Vec3(0.0, -0.5 * params.fov_width_mm + i * params.pixel_spacing[0], -j * params.pixel_spacing[1]);
}

namespace {

inline std::int64_t nearest(double x) { return static_cast<std::int64_t>(std::floor(x + 0.5)); }

}  // namespace

UltrasoundFrame capture_us(const PhantomScene& scene, const ProbeState& probe, const ProbeParams& params) {
  params.validate();
  UltrasoundFrame f;
  f.capture_position = probe.position;
  f.image = Gray2(params.image_shape, params.pixel_spacing, 0.0f);
  f.mask_truth = Mask2(params.image_shape, params.pixel_spacing, 0);
  f.branch_truth = Mask2(params.image_shape, params.pixel_spacing, 0);

  const Geometry3& g = scene.ct.geometry();
  const Vec3 base = physical_to_voxel(g, frame_pixel_position(probe.position, params, 0.0, 0.0));
  const Mat3 to_idx = g.spacing.cwiseInverse().asDiagonal() * g.axes.transpose();
  const Vec3 di = to_idx * Vec3(0.0, params.pixel_spacing[0], 0.0);
  const Vec3 dj = to_idx * Vec3(0.0, 0.0, -params.pixel_spacing[1]);
  const auto n0 = static_cast<std::int64_t>(g.shape[0]), n1 = static_cast<std::int64_t>(g.shape[1]),
             n2 = static_cast<std::int64_t>(g.shape[2]);
  const auto ct = scene.ct.data();
  const auto hv = scene.hv_annotation.data();
  const auto br = scene.branch_region.data();

  for (std::size_t i = 0; i < params.image_shape[0]; ++i) {
    for (std::size_t j = 0; j < params.image_shape[1]; ++j) {
      const Vec3 idx = base + static_cast<double>(i) * di + static_cast<double>(j) * dj;
      const auto a = nearest(idx[0]), b = nearest(idx[1]), c = nearest(idx[2]);
      if (a >= 0 && b >= 0 && c >= 0 && a < n0 && b < n1 && c < n2) {
        const auto v = static_cast<std::size_t>((a * n1 + b) * n2 + c);
        f.mask_truth(i, j) = hv[v];
        f.branch_truth(i, j) = br[v];
      }
      // Trilinear intensity.
      const double fa = std::floor(idx[0]), fb = std::floor(idx[1]), fc = std::floor(idx[2]);
      const auto a0 = static_cast<std::int64_t>(fa), b0 = static_cast<std::int64_t>(fb),
                 c0 = static_cast<std::int64_t>(fc);
      const double wa = idx[0] - fa, wb = idx[1] - fb, wc = idx[2] - fc;
      double acc = 0.0;
      for (int da = 0; da < 2; ++da) {
        for (int db = 0; db < 2; ++db) {
          for (int dc = 0; dc < 2; ++dc) {
            const auto aa = a0 + da, bb = b0 + db, cc = c0 + dc;
            if (aa < 0 || bb < 0 || cc < 0 || aa >= n0 || bb >= n1 || cc >= n2) continue;
            const double w = (da ? wa : 1.0 - wa) * (db ? wb : 1.0 - wb) * (dc ? wc : 1.0 - wc);
            acc += w * ct[static_cast<std::size_t>((aa * n1 + bb) * n2 + cc)];
          }
        }
      }
      f.image(i, j) = static_cast<float>(acc);
    }
  }
  return f;
}

void write_pbm(const Mask2& mask, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  // Rows of the stored image are depth lines, so the picture looks like a scan.
  out << "P1\n" << mask.shape[0] << ' ' << mask.shape[1] << '\n';
  for (std::size_t j = 0; j < mask.shape[1]; ++j) {
    for (std::size_t i = 0; i < mask.shape[0]; ++i) out << (mask(i, j) ? '1' : '0') << (i + 1 < mask.shape[0] ? " " : "");
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_pgm(const Gray2& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << image.shape[0] << ' ' << image.shape[1] << "\n255\n";
  for (std::size_t j = 0; j < image.shape[1]; ++j) {
    for (std::size_t i = 0; i < image.shape[0]; ++i) {
      const double v = std::clamp(static_cast<double>(image(i, j)), 0.0, 1.0);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void export_frame(const UltrasoundFrame& frame, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  write_pgm(frame.image, dir / (stem + ".pgm"));
  write_pbm(frame.mask_truth, dir / (stem + "_mask.pbm"));
  write_pbm(frame.branch_truth, dir / (stem + "_branch.pbm"));
}

}  // namespace usreg
