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

#include "usreg/common.hpp"

#include <memory>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

namespace usreg {

/// Placement of a voxel array in physical space: the (H, s, O, axes) tuple
/// minus the array itself. Column `a` of `axes` is the unit direction of array
/// axis `a`; voxel (0,0,0) sits at `origin`.
struct Geometry3 {
  Shape3 shape{};
  Vec3 spacing = Vec3::Ones();
  Vec3 origin = Vec3::Zero();
  Mat3 axes = Mat3::Identity();

  /// Throws ParameterError if spacing is not positive or axes are not orthonormal.
  void validate() const;

  std::size_t linear(std::size_t i, std::size_t j, std::size_t k) const {
    return (i * shape[1] + j) * shape[2] + k;
  }
  bool contains(const Index3& idx) const {
    return idx[0] >= 0 && idx[1] >= 0 && idx[2] >= 0 &&
           idx[0] < static_cast<std::int64_t>(shape[0]) &&
           idx[1] < static_cast<std::int64_t>(shape[1]) &&
           idx[2] < static_cast<std::int64_t>(shape[2]);
  }
  /// Physical midpoint between the first and last voxel centers.
  Vec3 center() const;
  /// Axes scaled by spacing: continuous index -> physical offset.
  Mat3 index_to_offset() const { return axes * spacing.asDiagonal(); }
};

Vec3 voxel_to_physical(const Geometry3& g, const Index3& idx);
/// Continuous index of a physical point. Never throws; result may lie outside the array.
Vec3 physical_to_voxel(const Geometry3& g, const Vec3& p);
/// Unchecked continuous version of voxel_to_physical.
inline Vec3 index_to_physical(const Geometry3& g, const Vec3& idx) {
  return g.origin + g.index_to_offset() * idx;
}

template <class T>
class Volume3 {
 public:
  using value_type = T;

  Volume3() = default;
  Volume3(Geometry3 geometry, std::vector<T> data)
      : geom_(std::move(geometry)),
        data_(std::make_shared<const std::vector<T>>(std::move(data))) {
    geom_.validate();
    if (data_->size() != element_count(geom_.shape)) {
      throw ShapeMismatchError("volume data size does not match shape");
    }
    if constexpr (std::is_same_v<T, std::uint8_t>) {
      for (auto v : *data_) {
        if (v > 1) throw ParameterError("mask volume contains values other than 0/1");
      }
    }
  }

  const Geometry3& geometry() const { return geom_; }
  const Shape3& shape() const { return geom_.shape; }
  std::span<const T> data() const {
    return data_ ? std::span<const T>(*data_) : std::span<const T>();
  }
  std::size_t size() const { return data_ ? data_->size() : 0; }
  T operator[](std::size_t n) const { return (*data_)[n]; }
  T at(std::size_t i, std::size_t j, std::size_t k) const { return (*data_)[geom_.linear(i, j, k)]; }

  /// Same voxels placed differently; the data buffer is shared, not copied.
  Volume3 with_geometry(Geometry3 g) const {
    if (g.shape != geom_.shape) throw ShapeMismatchError("with_geometry: shape differs");
    g.validate();
    Volume3 out;
    out.geom_ = std::move(g);
    out.data_ = data_;
    return out;
  }

  bool same_data(const Volume3& other) const {
    return data_ == other.data_ || (data_ && other.data_ && *data_ == *other.data_);
  }

 private:
  Geometry3 geom_;
  std::shared_ptr<const std::vector<T>> data_;
};

using MaskVolume = Volume3<std::uint8_t>;
using IntensityVolume = Volume3<float>;

inline Vec3 voxel_to_physical(const MaskVolume& v, const Index3& idx) {
  return voxel_to_physical(v.geometry(), idx);
}
inline Vec3 voxel_to_physical(const IntensityVolume& v, const Index3& idx) {
  return voxel_to_physical(v.geometry(), idx);
}
inline Vec3 physical_to_voxel(const MaskVolume& v, const Vec3& p) {
  return physical_to_voxel(v.geometry(), p);
}
inline Vec3 physical_to_voxel(const IntensityVolume& v, const Vec3& p) {
  return physical_to_voxel(v.geometry(), p);
}

/// 2D image: axis 0 is the lateral (width) axis, axis 1 the depth axis for
/// ultrasound frames. Pixel (i, j) is stored at data[i * shape[1] + j].
template <class T>
struct Image2 {
  Shape2 shape{};
  Vec2 spacing = Vec2::Ones();
  std::vector<T> data;

  Image2() = default;
  Image2(Shape2 s, Vec2 sp, T fill = T{}) : shape(s), spacing(sp), data(element_count(s), fill) {
    if (!(sp[0] > 0.0 && sp[1] > 0.0)) throw ParameterError("image spacing must be positive");
  }

  T& operator()(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
  T operator()(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }
  bool operator==(const Image2& o) const {
    return shape == o.shape && spacing == o.spacing && data == o.data;
  }
};

using Mask2 = Image2<std::uint8_t>;
using Gray2 = Image2<float>;

std::size_t count_nonzero(std::span<const std::uint8_t> m);
inline std::size_t count_nonzero(const Mask2& m) { return count_nonzero(std::span<const std::uint8_t>(m.data)); }
inline std::size_t count_nonzero(const MaskVolume& m) { return count_nonzero(m.data()); }

/// Centroid (mean physical position) of the nonzero voxels. Throws EmptyMaskError.
Vec3 centroid(const MaskVolume& mask);

/// Same array, origin moved by `delta`.
template <class T>
Volume3<T> translate_volume(const Volume3<T>& vol, const Vec3& delta) {
  Geometry3 g = vol.geometry();
  g.origin += delta;
  return vol.with_geometry(std::move(g));
}

}  // namespace usreg
