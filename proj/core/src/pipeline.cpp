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

#include "usreg/pipeline.hpp"

#include "usreg/components.hpp"
#include "usreg/resample.hpp"

#include <algorithm>
#include <cmath>

namespace usreg {

SearchParams SearchParams::for_probe(const ProbeParams& probe) {
  SearchParams sp;
  const double area = static_cast<double>(probe.lx() * probe.ly());
  sp.eps0_px = 4000.0 * area / (1080.0 * 500.0);
  sp.eps1_px = 0.02 * static_cast<double>(probe.lx());
  return sp;
}

void SearchParams::validate() const {
  if (!(eps0_px > 0.0)) throw ParameterError("eps0 must be positive");
  if (!(eps1_px > 0.0)) throw ParameterError("eps1 must be positive");
  if (!(step_mm > 0.0)) throw ParameterError("feedback step must be positive");
  if (!(spacing_mm > 0.0)) throw ParameterError("waypoint spacing must be positive");
  if (!(extent_mm >= 0.0)) throw ParameterError("waypoint extent must be non-negative");
  if (max_feedback_iterations <= 0) throw ParameterError("max_feedback_iterations must be positive");
}

std::vector<Vec3> search_waypoints(const Vec3& p0, const SearchParams& sp) {
  sp.validate();
  const int k_max = static_cast<int>(std::floor(sp.extent_mm / sp.spacing_mm + 1e-9));
  struct Cand {
    int kx, ky;
  };
  std::vector<Cand> cands;
  for (int kx = -k_max; kx <= k_max; ++kx) {
    if (sp.pattern == WaypointPattern::Line) {
      cands.push_back({kx, 0});
    } else {
      for (int ky = -k_max; ky <= k_max; ++ky) cands.push_back({kx, ky});
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    const int da = a.kx * a.kx + a.ky * a.ky;
    const int db = b.kx * b.kx + b.ky * b.ky;
    if (da != db) return da < db;
    if (a.kx != b.kx) return a.kx < b.kx;
    return a.ky < b.ky;
  });
  std::vector<Vec3> out;
  out.reserve(cands.size());
  for (const auto& c : cands) out.push_back(p0 + Vec3(c.kx * sp.spacing_mm, c.ky * sp.spacing_mm, 0.0));
  return out;
}

std::optional<double> column_centroid(const Mask2& mask) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.shape[0]; ++i) {
    for (std::size_t j = 0; j < mask.shape[1]; ++j) {
      if (mask(i, j)) {
        sum += static_cast<double>(i);
        ++n;
      }
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

namespace {

std::optional<Vec3> on_surface(const PhantomScene& scene, double x, double y) {
  auto z = scene.surface_height(x, y);
  if (!z) return std::nullopt;
  return Vec3(x, y, *z);
}

UltrasoundFrame capture_at(const PhantomScene& scene, const ProbeParams& probe, const Vec3& p) {
  return capture_us(scene, ProbeState{p}, probe);
}

}  // namespace

SearchOutcome hv_search(const PhantomScene& scene, const ProbeParams& probe, const NoiseModel& noise, const Vec3& p0,
                        const SearchParams& sp) {
  probe.validate();
  noise.validate();
  sp.validate();
  SearchOutcome out;
  const double half_width = 0.5 * static_cast<double>(probe.lx());

  const auto waypoints = search_waypoints(p0, sp);
  std::optional<Vec3> hit;
  for (std::size_t n = 0; n < waypoints.size(); ++n) {
    auto w = on_surface(scene, waypoints[n].x(), waypoints[n].y());
    if (!w) continue;
    ++out.waypoints_visited;
    const auto frame = capture_at(scene, probe, *w);
    Mask2 h = largest_connected_component(segment_branch(frame, noise, frame_id(Stage::Search, n)));
    const std::size_t area = count_nonzero(h);
    out.last_mask = std::move(h);
    out.last_area = area;
    if (static_cast<double>(area) >= sp.eps0_px) {
      hit = *w;
      break;
    }
  }
  if (!hit) {
    out.failure_reason = "no waypoint met the detection threshold";
    return out;
  }

  Vec3 pos = *hit;
  for (int it = 0; it < sp.max_feedback_iterations; ++it) {
    const auto frame = capture_at(scene, probe, pos);
    Mask2 h = largest_connected_component(
        segment_branch(frame, noise, frame_id(Stage::Centralize, static_cast<std::uint64_t>(it))));
    const auto cx = column_centroid(h);
    out.feedback_iterations = static_cast<std::size_t>(it) + 1;
    out.last_area = count_nonzero(h);
    out.last_mask = std::move(h);
    if (!cx) {
      out.failure_reason = "branching point lost during centralisation";
      return out;
    }
    out.last_column_centroid = *cx;
    if (std::abs(*cx - half_width) <= sp.eps1_px) {
      out.found = true;
      out.p_branch = pos;
      return out;
    }
    const double dy = *cx >= half_width ? sp.step_mm : -sp.step_mm;
    auto next = on_surface(scene, pos.x(), pos.y() + dy);
    if (!next) {
      out.failure_reason = "centralisation left the body surface";
      return out;
    }
    pos = *next;
  }
  throw ConvergenceError("centralisation did not settle within " + std::to_string(sp.max_feedback_iterations) +
                         " iterations");
}

AcquisitionResult hv_acquire(const PhantomScene& scene, const ProbeParams& probe, const NoiseModel& noise,
                             const Vec3& p_branch, std::size_t n, double length_mm) {
  if (n < 2) throw ParameterError("acquisition needs at least two frames");
  if (!(length_mm > 0.0)) throw ParameterError("acquisition length must be positive");
  probe.validate();
  noise.validate();
  const std::size_t lx = probe.lx();
  const std::size_t ly = probe.ly();
  const double dx = length_mm / static_cast<double>(n - 1);

  AcquisitionResult out;
  out.p_branch = p_branch;
  std::vector<std::uint8_t> data(n * lx * ly, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 w = p_branch + Vec3(-0.5 * length_mm + static_cast<double>(i) * dx, 0.0, 0.0);
    out.waypoints.push_back(w);
    const auto frame = capture_at(scene, probe, w);
    const Mask2 y = segment_full(frame, noise, frame_id(Stage::Acquire, i));
    std::copy(y.data.begin(), y.data.end(), data.begin() + static_cast<std::ptrdiff_t>(i * lx * ly));
  }
  Geometry3 g;
  g.shape = {n, lx, ly};
  g.spacing = Vec3(dx, probe.pixel_spacing[0], probe.pixel_spacing[1]);
  g.axes.col(0) = Vec3::UnitX();
  g.axes.col(1) = Vec3::UnitY();
  g.axes.col(2) = -Vec3::UnitZ();
  g.origin = out.waypoints.front() - 0.5 * static_cast<double>(lx) * probe.pixel_spacing[0] * Vec3::UnitY();
  out.volume = MaskVolume(g, std::move(data));
  return out;
}

namespace {

MaskVolume harmonize(const MaskVolume& vol, const HarmonizeParams& hp) {
  const Geometry3 target = centered_geometry(Mat3::Identity(), hp.spacing, hp.shape, vol.geometry().center());
  return resample_onto(vol, target, RigidTransform3::identity());
}

}  // namespace

CoordinateMap coordinate_map(const MaskVolume& h_us, const MaskVolume& h_ct, const RegistrationConfig& cfg,
                             const HarmonizeParams& hp, const PhysicalFrame& frame) {
  if (!(hp.spacing.minCoeff() > 0.0)) throw ParameterError("harmonised spacing must be positive");
  const MaskVolume us_r = harmonize(h_us, hp);
  const MaskVolume ct_r = harmonize(h_ct, hp);

  CoordinateMap out;
  out.g_us = centroid(us_r);
  out.g_ct = centroid(ct_r);
  const MaskVolume us_t = translate_volume(us_r, out.g_ct - out.g_us);

  const auto reg = register_rigid(ct_r, us_t, RigidTransform3::identity(), cfg);
  out.uTc = reg.transform;
  out.score_before = reg.score_init;
  out.score_after = reg.score;
  out.converged = reg.converged;
  out.before = similarity(overlap_counts(resample_onto(us_t, ct_r.geometry(), RigidTransform3::identity()), ct_r));
  out.after = similarity(overlap_counts(resample_onto(us_t, ct_r.geometry(), out.uTc), ct_r));

  // Coordinates of a world point p in the base frame: axes^T (p - origin).
  const Mat3 r = frame.axes.transpose();
  out.pTu = RigidTransform3(r, -r * frame.origin);
  out.pTc = out.pTu.compose(RigidTransform3::translation(out.g_us - out.g_ct)).compose(out.uTc);
  return out;
}

Mask2 ct_axial_slice(const MaskVolume& h_ct, const Vec3& g, const ProbeParams& probe) {
  probe.validate();
  const Geometry3& geo = h_ct.geometry();
  // Snap to the voxel plane nearest `g` along the array axis closest to x.
  Eigen::Index a = 0;
  geo.axes.row(0).cwiseAbs().maxCoeff(&a);
  Vec3 idx = physical_to_voxel(geo, g);
  idx[a] = std::clamp(std::round(idx[a]), 0.0, static_cast<double>(geo.shape[static_cast<std::size_t>(a)] - 1));
  const double xs = index_to_physical(geo, idx).x();

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (int c = 0; c < 8; ++c) {
    Vec3 corner;
    for (int d = 0; d < 3; ++d) {
      corner[d] = (c >> d) & 1 ? static_cast<double>(geo.shape[static_cast<std::size_t>(d)]) - 0.5 : -0.5;
    }
    const Vec3 p = index_to_physical(geo, corner);
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double vx = probe.pixel_spacing[0];
  const double vy = probe.pixel_spacing[1];
  Mask2 out;
  out.spacing = probe.pixel_spacing;
  out.shape = {std::max(probe.lx(), static_cast<std::size_t>(std::ceil((hi.y() - lo.y()) / vx)) + 1),
               std::max(probe.ly(), static_cast<std::size_t>(std::ceil((hi.z() - lo.z()) / vy)) + 1)};
  out.data.assign(out.shape[0] * out.shape[1], 0);
  for (std::size_t i = 0; i < out.shape[0]; ++i) {
    for (std::size_t j = 0; j < out.shape[1]; ++j) {
      const Vec3 p(xs, lo.y() + static_cast<double>(i) * vx, hi.z() - static_cast<double>(j) * vy);
      out(i, j) = sample_nearest(h_ct, p);
    }
  }
  return out;
}

std::vector<double> slice_match_waypoints(double g_hat_x, double search_mm, std::size_t n_wp) {
  if (n_wp < 1) throw ParameterError("slice matching needs at least one waypoint");
  if (!(search_mm >= 0.0)) throw ParameterError("slice search range must be non-negative");
  std::vector<double> xs;
  for (std::size_t w = 0; w < n_wp; ++w) {
    const double t = n_wp == 1 ? 0.5 : static_cast<double>(w) / static_cast<double>(n_wp - 1);
    xs.push_back(g_hat_x - 0.5 * search_mm + t * search_mm);
  }
  if (std::none_of(xs.begin(), xs.end(), [&](double x) { return std::abs(x - g_hat_x) < 1e-9; })) {
    xs.push_back(g_hat_x);
  }
  return xs;
}

SliceMatchResult slice_match(const PhantomScene& scene, const ProbeParams& probe, const NoiseModel& noise,
                             const Vec3& g, const RigidTransform3& pTc, const Vec3& p_branch, double search_mm,
                             std::size_t n_wp, const MaskVolume& h_ct, std::uint64_t target_id) {
  SliceMatchResult out;
  out.g_hat = pTc.apply(g);
  const Mask2 ct_slice = ct_axial_slice(h_ct, g, probe);
  const auto xs = slice_match_waypoints(out.g_hat.x(), search_mm, n_wp);

  bool have = false;
  for (std::size_t w = 0; w < xs.size(); ++w) {
    const Vec3 pos(xs[w], p_branch.y(), p_branch.z());
    const auto frame = capture_at(scene, probe, pos);
    const Mask2 y = segment_full(frame, noise, frame_id(Stage::SliceMatch, target_id, w));
    const std::uint64_t score = omia(y, ct_slice);
    out.scores.emplace_back(xs[w], score);
    const double d_new = std::abs(xs[w] - out.g_hat.x());
    const double d_old = std::abs(out.q_x - out.g_hat.x());
    const bool better = !have || score > out.best_score ||
                        (score == out.best_score && (d_new < d_old || (d_new == d_old && xs[w] < out.q_x)));
    if (better) {
      have = true;
      out.best_score = score;
      out.q_x = xs[w];
    }
  }
  out.r_hat = Vec3(out.q_x, out.g_hat.y(), out.g_hat.z());
  return out;
}

std::vector<Vec3> imaging_waypoints(const Vec3& r_hat, double eps_mm, std::size_t n, double surface_z) {
  if (n < 1) throw ParameterError("target imaging needs at least one frame");
  if (!(eps_mm >= 0.0)) throw ParameterError("imaging margin must be non-negative");
  std::vector<Vec3> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = r_hat.x() - eps_mm + 2.0 * static_cast<double>(i) * eps_mm / static_cast<double>(n);
    out.emplace_back(x, r_hat.y(), surface_z);
  }
  return out;
}

std::vector<UltrasoundFrame> target_imaging(const PhantomScene& scene, const ProbeParams& probe, const Vec3& r_hat,
                                            double eps_mm, std::size_t n, double surface_z) {
  std::vector<UltrasoundFrame> frames;
  for (const auto& v : imaging_waypoints(r_hat, eps_mm, n, surface_z)) frames.push_back(capture_at(scene, probe, v));
  return frames;
}

bool judge_success(const std::vector<UltrasoundFrame>& frames, const Vec3& t, double tol_x) {
  for (const auto& f : frames) {
    const Vec3& c = f.capture_position;
    const double half_w = 0.5 * static_cast<double>(f.image.shape[0]) * f.image.spacing[0];
    const double depth = static_cast<double>(f.image.shape[1]) * f.image.spacing[1];
    const double d = c.z() - t.z();
    if (std::abs(c.x() - t.x()) <= tol_x && std::abs(t.y() - c.y()) <= half_w && d >= 0.0 && d <= depth) return true;
  }
  return false;
}

}  // namespace usreg
