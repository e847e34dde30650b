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

#include "usreg/metrics.hpp"
#include "usreg/noise.hpp"
#include "usreg/phantom.hpp"
#include "usreg/probe.hpp"
#include "usreg/registration.hpp"

#include <optional>
#include <string>
#include <vector>

namespace usreg {

// ---------------------------------------------------------------------------
// Frame identifiers. Every simulated capture that feeds an oracle gets a
// stable id so noise draws are independent of scheduling.
// ---------------------------------------------------------------------------
enum class Stage : std::uint64_t { Search = 1, Centralize = 2, Acquire = 3, SliceMatch = 4 };

constexpr std::uint64_t frame_id(Stage stage, std::uint64_t a, std::uint64_t b = 0) {
  return (static_cast<std::uint64_t>(stage) << 56) | ((a & 0xffffffULL) << 32) | (b & 0xffffffffULL);
}

// ---------------------------------------------------------------------------
// HV search and centralisation
// ---------------------------------------------------------------------------
enum class WaypointPattern { Line, Grid };

struct SearchParams {
  /// Detection threshold on the largest component, pixels.
  double eps0_px = 160.0;
  /// Centralisation tolerance on the column centroid, pixels.
  double eps1_px = 4.32;
  /// Lateral feedback step, mm.
  double step_mm = 1.0;
  WaypointPattern pattern = WaypointPattern::Line;
  double extent_mm = 40.0;   // half-extent of the waypoint pattern
  double spacing_mm = 5.0;   // between waypoints
  int max_feedback_iterations = 200;

  /// Full-resolution threshold of 4000 px at 1080x500 scaled by image area;
  /// eps1 = 2% of the image width.
  static SearchParams for_probe(const ProbeParams& probe);
  void validate() const;
};

/// Waypoints around p0 (z left at p0.z), nearest first.
std::vector<Vec3> search_waypoints(const Vec3& p0, const SearchParams& sp);

struct SearchOutcome {
  bool found = false;
  std::string failure_reason;
  Vec3 p_branch = Vec3::Zero();
  std::size_t waypoints_visited = 0;
  std::size_t feedback_iterations = 0;
  /// Largest component of the last branch mask and its statistics.
  Mask2 last_mask;
  std::size_t last_area = 0;
  double last_column_centroid = 0.0;

  explicit operator bool() const { return found; }
};

/// Failure is returned as a value; a centralisation loop that does not settle
/// within max_feedback_iterations throws ConvergenceError.
SearchOutcome hv_search(const PhantomScene& scene, const ProbeParams& probe, const NoiseModel& noise, const Vec3& p0,
                        const SearchParams& sp);

/// Mean lateral (axis-0) index of the nonzero pixels; nullopt if empty.
std::optional<double> column_centroid(const Mask2& mask);

// ---------------------------------------------------------------------------
// HV acquisition
// ---------------------------------------------------------------------------
struct AcquisitionResult {
  MaskVolume volume;  // axes [x, y, -z]; slice i is the full-vessel mask at waypoints[i]
  std::vector<Vec3> waypoints;
  Vec3 p_branch = Vec3::Zero();
};

/// n equally spaced frames along the inferior-superior axis spanning L mm
/// centred on p_branch. Slice spacing is L / (n - 1).
AcquisitionResult hv_acquire(const PhantomScene& scene, const ProbeParams& probe, const NoiseModel& noise,
                             const Vec3& p_branch, std::size_t n, double length_mm);

// ---------------------------------------------------------------------------
// CT -> physical coordinate mapping
// ---------------------------------------------------------------------------
struct HarmonizeParams {
  Vec3 spacing = Vec3::Constant(2.0);
  Shape3 shape{64, 96, 64};
};

/// Robot base frame expressed in the coordinates ultrasound volumes use.
struct PhysicalFrame {
  Vec3 origin = Vec3::Zero();
  Mat3 axes = Mat3::Identity();
};

struct CoordinateMap {
  RigidTransform3 pTc;        // CT frame -> robot base frame
  RigidTransform3 uTc;        // CT frame -> translated ultrasound frame
  RigidTransform3 pTu;        // ultrasound frame -> robot base frame
  Vec3 g_us = Vec3::Zero();   // centroids after harmonisation
  Vec3 g_ct = Vec3::Zero();
  SimilarityScores before;    // H_CT vs translated H_US
  SimilarityScores after;     // H_CT vs registered H_US
  double score_before = 0.0;
  double score_after = 0.0;
  bool converged = true;
};

/// Resample/crop both volumes onto one grid, align centroids, register and
/// compose pTc = pTu * Translation(g_us - g_ct) * uTc.
CoordinateMap coordinate_map(const MaskVolume& h_us, const MaskVolume& h_ct, const RegistrationConfig& cfg,
                             const HarmonizeParams& harmonize, const PhysicalFrame& frame = {});

// ---------------------------------------------------------------------------
// Target localisation and imaging
// ---------------------------------------------------------------------------

/// Axial slice of `h_ct` containing `g` (CT frame), resampled to the probe's
/// pixel spacing: axis 0 along +y, axis 1 along -z. Never smaller than a frame.
Mask2 ct_axial_slice(const MaskVolume& h_ct, const Vec3& g, const ProbeParams& probe);

struct SliceMatchResult {
  Vec3 g_hat = Vec3::Zero();
  Vec3 r_hat = Vec3::Zero();
  double q_x = 0.0;
  std::uint64_t best_score = 0;
  std::vector<std::pair<double, std::uint64_t>> scores;  // (waypoint x, OMIA), evaluation order
};

/// Slice-matching waypoints: n_wp points spanning [gx - S/2, gx + S/2] plus gx itself.
std::vector<double> slice_match_waypoints(double g_hat_x, double search_mm, std::size_t n_wp);

SliceMatchResult slice_match(const PhantomScene& scene, const ProbeParams& probe, const NoiseModel& noise,
                             const Vec3& g, const RigidTransform3& pTc, const Vec3& p_branch, double search_mm,
                             std::size_t n_wp, const MaskVolume& h_ct, std::uint64_t target_id = 0);

/// v_i = [r_x - eps + 2 i eps / N, r_y, Z] for i = 0..N-1.
std::vector<Vec3> imaging_waypoints(const Vec3& r_hat, double eps_mm, std::size_t n, double surface_z);

std::vector<UltrasoundFrame> target_imaging(const PhantomScene& scene, const ProbeParams& probe, const Vec3& r_hat,
                                            double eps_mm, std::size_t n, double surface_z);

/// Some frame lies within tol_x of the true target along x, and the target's
/// (y, depth) falls inside that frame's field of view.
bool judge_success(const std::vector<UltrasoundFrame>& frames, const Vec3& true_target_physical, double tol_x);

}  // namespace usreg
