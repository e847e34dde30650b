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

namespace usreg {

/// Rigid map p -> R p + t between two coordinate frames.
class RigidTransform3 {
 public:
  RigidTransform3() = default;
  /// Throws ParameterError unless `rotation` is orthonormal with det +1 (within 1e-9).
  RigidTransform3(const Mat3& rotation, const Vec3& translation);

  static RigidTransform3 identity() { return {}; }
  static RigidTransform3 translation(const Vec3& t) { return {Mat3::Identity(), t}; }
  /// Intrinsic z-y-x Euler angles (degrees): R = Rz(yaw) * Ry(pitch) * Rx(roll).
  static Mat3 euler_zyx(double yaw_deg, double pitch_deg, double roll_deg);
  /// Rotation about `center`, followed by translation `t`.
  static RigidTransform3 about_center(const Mat3& rotation, const Vec3& center, const Vec3& t);

  const Mat3& rotation() const { return rot_; }
  const Vec3& translation() const { return trans_; }

  Vec3 apply(const Vec3& p) const { return rot_ * p + trans_; }
  Vec3 operator()(const Vec3& p) const { return apply(p); }

  /// (A.compose(B))(p) == A(B(p)).
  RigidTransform3 compose(const RigidTransform3& inner) const;
  RigidTransform3 inverse() const;

  /// Rotation angle of R in degrees, in [0, 180].
  double rotation_angle_deg() const;

 private:
  Mat3 rot_ = Mat3::Identity();
  Vec3 trans_ = Vec3::Zero();
};

inline RigidTransform3 compose(const RigidTransform3& a, const RigidTransform3& b) { return a.compose(b); }
inline RigidTransform3 inverse(const RigidTransform3& t) { return t.inverse(); }
inline Vec3 apply_transform(const RigidTransform3& t, const Vec3& p) { return t.apply(p); }

}  // namespace usreg
