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

#include "usreg/volume.hpp"

#include <cmath>

namespace usreg {

namespace {
constexpr double kAxisTol = 1e-9;
}

void Geometry3::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) {
      throw ParameterError("spacing components must be strictly positive");
    }
  }
  const Mat3 gram = axes.transpose() * axes;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      const double expect = r == c ? 1.0 : 0.0;
      if (std::abs(gram(r, c) - expect) > kAxisTol) {
        throw ParameterError("volume axes must be orthonormal");
      }
    }
  }
}

Vec3 Geometry3::center() const {
  const Vec3 last(static_cast<double>(shape[0]) - 1.0, static_cast<double>(shape[1]) - 1.0,
                  static_cast<double>(shape[2]) - 1.0);
  return index_to_physical(*this, 0.5 * last);
}

Vec3 voxel_to_physical(const Geometry3& g, const Index3& idx) {
  if (!g.contains(idx)) throw BoundsError("voxel index out of bounds");
  const Vec3 v(static_cast<double>(idx[0]), static_cast<double>(idx[1]), static_cast<double>(idx[2]));
  return index_to_physical(g, v);
}

Vec3 physical_to_voxel(const Geometry3& g, const Vec3& p) {
  // Orthonormal axes: the inverse of A diag(s) is diag(1/s) A^T.
  Vec3 local = g.axes.transpose() * (p - g.origin);
  return local.cwiseQuotient(g.spacing);
}

std::size_t count_nonzero(std::span<const std::uint8_t> m) {
  std::size_t n = 0;
  for (auto v : m) n += v != 0;
  return n;
}

Vec3 centroid(const MaskVolume& mask) {
  const auto& g = mask.geometry();
  const auto data = mask.data();
  Vec3 sum = Vec3::Zero();
  std::size_t n = 0;
  for (std::size_t i = 0; i < g.shape[0]; ++i) {
    for (std::size_t j = 0; j < g.shape[1]; ++j) {
      const std::size_t row = g.linear(i, j, 0);
      for (std::size_t k = 0; k < g.shape[2]; ++k) {
        if (data[row + k]) {
          sum += Vec3(static_cast<double>(i), static_cast<double>(j), static_cast<double>(k));
          ++n;
        }
      }
    }
  }
  if (n == 0) throw EmptyMaskError("centroid of an empty mask");
  // Mean index then map: the index->physical map is affine.
  return index_to_physical(g, sum / static_cast<double>(n));
}

}  // namespace usreg
