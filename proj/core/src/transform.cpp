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

#include "usreg/transform.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

namespace usreg {

RigidTransform3::RigidTransform3(const Mat3& rotation, const Vec3& translation)
    : rot_(rotation), trans_(translation) {
  const Mat3 gram = rot_.transpose() * rot_;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ParameterError("rotation is not orthonormal");
  }
  if (std::abs(rot_.determinant() - 1.0) > 1e-9) throw ParameterError("rotation determinant must be +1");
}

Mat3 RigidTransform3::euler_zyx(double yaw_deg, double pitch_deg, double roll_deg) {
  const Eigen::AngleAxisd rz(deg2rad(yaw_deg), Vec3::UnitZ());
  const Eigen::AngleAxisd ry(deg2rad(pitch_deg), Vec3::UnitY());
  const Eigen::AngleAxisd rx(deg2rad(roll_deg), Vec3::UnitX());
  return (rz * ry * rx).toRotationMatrix();
}

RigidTransform3 RigidTransform3::about_center(const Mat3& rotation, const Vec3& center, const Vec3& t) {
  return {rotation, center - rotation * center + t};
}

RigidTransform3 RigidTransform3::compose(const RigidTransform3& inner) const {
  RigidTransform3 out;
  out.rot_ = rot_ * inner.rot_;
  out.trans_ = rot_ * inner.trans_ + trans_;
  return out;
}

RigidTransform3 RigidTransform3::inverse() const {
  RigidTransform3 out;
  out.rot_ = rot_.transpose();
  out.trans_ = -(out.rot_ * trans_);
  return out;
}

double RigidTransform3::rotation_angle_deg() const {
  // atan2 stays accurate near 0 and 180 degrees where acos of the trace does not.
  const Vec3 v(rot_(2, 1) - rot_(1, 2), rot_(0, 2) - rot_(2, 0), rot_(1, 0) - rot_(0, 1));
  return rad2deg(std::atan2(0.5 * v.norm(), 0.5 * (rot_.trace() - 1.0)));
}

}  // namespace usreg
