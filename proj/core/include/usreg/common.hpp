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

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace usreg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec2 = Eigen::Vector2d;

/// Array extents, axis-0-major (axis 0 varies slowest in memory).
using Shape3 = std::array<std::size_t, 3>;
using Shape2 = std::array<std::size_t, 2>;
using Index3 = std::array<std::int64_t, 3>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double deg2rad(double d) { return d * kPi / 180.0; }
inline constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

inline std::size_t element_count(const Shape3& s) { return s[0] * s[1] * s[2]; }
inline std::size_t element_count(const Shape2& s) { return s[0] * s[1]; }

// Error hierarchy. Everything derives from std::runtime_error so callers that
// do not care about the category can catch one type.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BoundsError : Error {
  using Error::Error;
};
struct EmptyMaskError : Error {
  using Error::Error;
};
struct ShapeMismatchError : Error {
  using Error::Error;
};
struct ParameterError : Error {
  using Error::Error;
};
struct ConvergenceError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

}  // namespace usreg
