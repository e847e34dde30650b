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

#include "usreg/resample.hpp"

#include <algorithm>
#include <cmath>

namespace usreg {

namespace {

inline std::int64_t nearest(double x) { return static_cast<std::int64_t>(std::floor(x + 0.5)); }

inline bool inside(const Shape3& s, std::int64_t i, std::int64_t j, std::int64_t k) {
  return i >= 0 && j >= 0 && k >= 0 && i < static_cast<std::int64_t>(s[0]) &&
         j < static_cast<std::int64_t>(s[1]) && k < static_cast<std::int64_t>(s[2]);
}

// Affine map from target voxel index to source continuous index.
struct IndexMap {
  Mat3 linear;
  Vec3 offset;
};

IndexMap index_map(const Geometry3& src, const Geometry3& target, const RigidTransform3& T) {
  const Mat3 to_src = src.spacing.cwiseInverse().asDiagonal() * src.axes.transpose();
  IndexMap m;
  m.linear = to_src * T.rotation() * target.index_to_offset();
  m.offset = to_src * (T.apply(target.origin) - src.origin);
  return m;
}

template <class T, class Sampler>
std::vector<T> sample_grid(const Geometry3& target, const IndexMap& m, Sampler&& sample) {
  std::vector<T> out(element_count(target.shape), T{});
  const Vec3 di = m.linear.col(0), dj = m.linear.col(1), dk = m.linear.col(2);
  std::size_t n = 0;
  for (std::size_t i = 0; i < target.shape[0]; ++i) {
    const Vec3 pi = m.offset + static_cast<double>(i) * di;
    for (std::size_t j = 0; j < target.shape[1]; ++j) {
      Vec3 p = pi + static_cast<double>(j) * dj;
      for (std::size_t k = 0; k < target.shape[2]; ++k, ++n) {
        out[n] = sample(p);
        p += dk;
      }
    }
  }
  return out;
}

std::uint8_t nearest_at(const MaskVolume& vol, const Vec3& idx) {
  const auto i = nearest(idx[0]), j = nearest(idx[1]), k = nearest(idx[2]);
  const auto& s = vol.shape();
  if (!inside(s, i, j, k)) return 0;
  return vol.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k));
}

float trilinear_at(const IntensityVolume& vol, const Vec3& idx) {
  const auto& s = vol.shape();
  const double fi = std::floor(idx[0]), fj = std::floor(idx[1]), fk = std::floor(idx[2]);
  const auto i0 = static_cast<std::int64_t>(fi), j0 = static_cast<std::int64_t>(fj),
             k0 = static_cast<std::int64_t>(fk);
  const double wi = idx[0] - fi, wj = idx[1] - fj, wk = idx[2] - fk;
  // Exactly on a voxel centre: no blending (keeps identity resamples exact).
  double acc = 0.0;
  bool any = false;
  for (int a = 0; a < 2; ++a) {
    const double w_a = a ? wi : 1.0 - wi;
    if (w_a == 0.0) continue;
    for (int b = 0; b < 2; ++b) {
      const double w_b = b ? wj : 1.0 - wj;
      if (w_b == 0.0) continue;
      for (int c = 0; c < 2; ++c) {
        const double w_c = c ? wk : 1.0 - wk;
        if (w_c == 0.0) continue;
        const auto ii = i0 + a, jj = j0 + b, kk = k0 + c;
        if (!inside(s, ii, jj, kk)) continue;
        any = true;
        acc += w_a * w_b * w_c *
               vol.at(static_cast<std::size_t>(ii), static_cast<std::size_t>(jj), static_cast<std::size_t>(kk));
      }
    }
  }
  return any ? static_cast<float>(acc) : 0.0f;
}

}  // namespace

std::uint8_t sample_nearest(const MaskVolume& vol, const Vec3& p) {
  return nearest_at(vol, physical_to_voxel(vol.geometry(), p));
}

float sample_trilinear(const IntensityVolume& vol, const Vec3& p) {
  return trilinear_at(vol, physical_to_voxel(vol.geometry(), p));
}

Geometry3 centered_geometry(const Mat3& axes, const Vec3& spacing, const Shape3& shape, const Vec3& center) {
  for (std::size_t a = 0; a < 3; ++a) {
    if (shape[a] == 0) throw ParameterError("target shape must be positive");
  }
  Geometry3 g;
  g.shape = shape;
  g.spacing = spacing;
  g.axes = axes;
  const Vec3 half(0.5 * (static_cast<double>(shape[0]) - 1.0), 0.5 * (static_cast<double>(shape[1]) - 1.0),
                  0.5 * (static_cast<double>(shape[2]) - 1.0));
  g.origin = center - g.index_to_offset() * half;
  g.validate();
  return g;
}

MaskVolume resample_crop(const MaskVolume& vol, const Vec3& target_spacing, const Shape3& target_shape,
                         const Vec3& center) {
  const Geometry3 target = centered_geometry(vol.geometry().axes, target_spacing, target_shape, center);
  return resample_onto(vol, target, RigidTransform3::identity());
}

IntensityVolume resample_crop(const IntensityVolume& vol, const Vec3& target_spacing,
                              const Shape3& target_shape, const Vec3& center) {
  const Geometry3 target = centered_geometry(vol.geometry().axes, target_spacing, target_shape, center);
  const IndexMap m = index_map(vol.geometry(), target, RigidTransform3::identity());
  auto data = sample_grid<float>(target, m, [&](const Vec3& idx) { return trilinear_at(vol, idx); });
  return {target, std::move(data)};
}

MaskVolume resample_onto(const MaskVolume& src, const Geometry3& target, const RigidTransform3& T) {
  const IndexMap m = index_map(src.geometry(), target, T);
  auto data = sample_grid<std::uint8_t>(target, m, [&](const Vec3& idx) { return nearest_at(src, idx); });
  return {target, std::move(data)};
}

MaskVolume downsample_max(const MaskVolume& vol, std::size_t factor) {
  if (factor == 0) throw ParameterError("downsample factor must be positive");
  if (factor == 1) return vol;
  const auto& g = vol.geometry();
  Geometry3 out_g = g;
  for (std::size_t a = 0; a < 3; ++a) out_g.shape[a] = (g.shape[a] + factor - 1) / factor;
  out_g.spacing = g.spacing * static_cast<double>(factor);
  const double shift = 0.5 * (static_cast<double>(factor) - 1.0);
  out_g.origin = index_to_physical(g, Vec3(shift, shift, shift));
  std::vector<std::uint8_t> out(element_count(out_g.shape), 0);
  const auto data = vol.data();
  for (std::size_t i = 0; i < g.shape[0]; ++i) {
    for (std::size_t j = 0; j < g.shape[1]; ++j) {
      for (std::size_t k = 0; k < g.shape[2]; ++k) {
        if (data[g.linear(i, j, k)]) out[out_g.linear(i / factor, j / factor, k / factor)] = 1;
      }
    }
  }
  return {out_g, std::move(out)};
}

}  // namespace usreg
