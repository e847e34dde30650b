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

#include "usreg/phantom.hpp"

#include "usreg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace usreg {

std::string to_string(VesselLabel label) {
  switch (label) {
    case VesselLabel::Trunk: return "trunk";
    case VesselLabel::MHV: return "MHV";
    case VesselLabel::LHV: return "LHV";
    case VesselLabel::RHV: return "RHV";
  }
  return "unknown";
}

void PhantomParams::validate() const {
  for (auto n : volume_shape) {
    if (n < 16) throw ParameterError("phantom volume must be at least 16 voxels along every axis");
  }
  if (!(spacing_mm > 0.0)) throw ParameterError("phantom spacing must be positive");
  if (!(radii.trunk > 0.0 && radii.mhv > 0.0 && radii.lhv > 0.0 && radii.rhv > 0.0)) {
    throw ParameterError("vessel radii must be positive");
  }
  for (double a : {lhv_angle_deg, rhv_angle_deg}) {
    if (!(a > 0.0 && a <= 90.0)) throw ParameterError("branch angles must lie in (0, 90] degrees");
  }
  if (noise_texture_level < 0.0) throw ParameterError("noise_texture_level must be nonnegative");
  if (tributaries < 0) throw ParameterError("tributary count must be nonnegative");
  if (!(branch_oracle_distance_mm > 0.0)) throw ParameterError("branch oracle distance must be positive");
}

std::optional<double> PhantomScene::surface_height(double x, double y) const {
  const Vec3 q = placement.inverse().apply(Vec3(x, y, 0.0));
  const Vec3 idx = physical_to_voxel(surface.grid, q);
  const auto i = static_cast<std::int64_t>(std::floor(idx[0] + 0.5));
  const auto j = static_cast<std::int64_t>(std::floor(idx[1] + 0.5));
  const auto& s = surface.grid.shape;
  if (i < 0 || j < 0 || i >= static_cast<std::int64_t>(s[0]) || j >= static_cast<std::int64_t>(s[1])) {
    return std::nullopt;
  }
  const double top = surface.top[static_cast<std::size_t>(i) * s[1] + static_cast<std::size_t>(j)];
  if (std::isnan(top)) return std::nullopt;
  return placement.apply(Vec3(q[0], q[1], top))[2];
}

namespace {

Heightfield heightfield_from_body(const MaskVolume& body_intrinsic) {
  const Geometry3& g = body_intrinsic.geometry();
  Heightfield hf;
  hf.grid = g;
  hf.top.assign(g.shape[0] * g.shape[1], std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < g.shape[0]; ++i) {
    for (std::size_t j = 0; j < g.shape[1]; ++j) {
      for (std::size_t k = g.shape[2]; k-- > 0;) {
        if (body_intrinsic.at(i, j, k)) {
          const Vec3 face = index_to_physical(
              g, Vec3(static_cast<double>(i), static_cast<double>(j), static_cast<double>(k) + 0.5));
          hf.top[i * g.shape[1] + j] = face[2];
          break;
        }
      }
    }
  }
  return hf;
}

// Visits every voxel whose centre lies within `radius` of segment [a, b];
// `arc` receives the arc length (from a) of the closest centreline point.
void rasterize_segment(const Geometry3& g, const Vec3& a, const Vec3& b, double radius,
                       const std::function<void(std::size_t, double)>& visit) {
  const Vec3 lo_p = a.cwiseMin(b) - Vec3::Constant(radius);
  const Vec3 hi_p = a.cwiseMax(b) + Vec3::Constant(radius);
  Vec3 lo = physical_to_voxel(g, lo_p), hi = physical_to_voxel(g, hi_p);
  const Vec3 mn = lo.cwiseMin(hi), mx = lo.cwiseMax(hi);
  std::array<std::int64_t, 3> from{}, to{};
  for (int d = 0; d < 3; ++d) {
    from[d] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(mn[d])));
    to[d] = std::min<std::int64_t>(static_cast<std::int64_t>(g.shape[d]) - 1,
                                   static_cast<std::int64_t>(std::ceil(mx[d])));
  }
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double len = std::sqrt(len2);
  for (std::int64_t i = from[0]; i <= to[0]; ++i) {
    for (std::int64_t j = from[1]; j <= to[1]; ++j) {
      for (std::int64_t k = from[2]; k <= to[2]; ++k) {
        const Vec3 p = index_to_physical(g, Vec3(static_cast<double>(i), static_cast<double>(j), static_cast<double>(k)));
        const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
        if ((p - (a + t * ab)).norm() <= radius) {
          visit(g.linear(static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k)),
                t * len);
        }
      }
    }
  }
}

Vec3 point_along(const std::vector<Vec3>& poly, double fraction) {
  double total = 0.0;
  for (std::size_t n = 1; n < poly.size(); ++n) total += (poly[n] - poly[n - 1]).norm();
  double want = fraction * total;
  for (std::size_t n = 1; n < poly.size(); ++n) {
    const double seg = (poly[n] - poly[n - 1]).norm();
    if (want <= seg || n + 1 == poly.size()) {
      return poly[n - 1] + (poly[n] - poly[n - 1]) * (seg > 0.0 ? std::min(1.0, want / seg) : 0.0);
    }
    want -= seg;
  }
  return poly.back();
}

// Subdivides each polyline segment so consecutive points are at most `max_gap` apart.
std::vector<Vec3> densify(const std::vector<Vec3>& poly, double max_gap) {
  std::vector<Vec3> out{poly.front()};
  for (std::size_t n = 1; n < poly.size(); ++n) {
    const Vec3 d = poly[n] - poly[n - 1];
    const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(d.norm() / max_gap)));
    for (std::size_t m = 1; m <= pieces; ++m) out.push_back(poly[n - 1] + d * (static_cast<double>(m) / pieces));
  }
  return out;
}

VesselTree build_tree(const PhantomParams& p, const Vec3& ext, double body_top, Rng& rng) {
  VesselTree tree;
  const double s = p.spacing_mm;
  // Branch point on a voxel boundary along the inferior axis so that the
  // neighbouring axial slices split cleanly into separate lobes.
  const double bx = (std::floor(0.45 * ext[0] / s) + 0.5) * s;
  const Vec3 B(bx, std::round(0.5 * ext[1] / s) * s, body_top - 0.3 * ext[2]);
  tree.branch_point = B;

  const double lx = ext[0], ly = ext[1], lz = ext[2];
  const double gap = 0.5 * std::min({p.radii.trunk, p.radii.mhv, p.radii.lhv, p.radii.rhv});

  VesselBranch trunk{{B, B + Vec3(-0.22 * lx, 0.0, -0.03 * lz), B + Vec3(-0.42 * lx, 0.01 * ly, -0.06 * lz)},
                     p.radii.trunk, VesselLabel::Trunk};
  VesselBranch mhv{{B, B + Vec3(0.2 * lx, 0.01 * ly, 0.015 * lz), B + Vec3(0.44 * lx, 0.035 * ly, 0.04 * lz)},
                   p.radii.mhv, VesselLabel::MHV};

  auto side_vein = [&](double angle_deg, double sign, double radius, VesselLabel label, double dz) {
    const double a = deg2rad(angle_deg);
    const double stub = 0.075 * ly;
    const Vec3 bend = B + stub * Vec3(std::cos(a), sign * std::sin(a), 0.0);
    const Vec3 mid = bend + Vec3(0.2 * lx, sign * 0.05 * ly, 0.5 * dz * lz);
    const Vec3 end = bend + Vec3(0.4 * lx, sign * 0.14 * ly, dz * lz);
    return VesselBranch{{B, bend, mid, end}, radius, label};
  };
  tree.branches.push_back(trunk);
  tree.branches.push_back(mhv);
  tree.branches.push_back(side_vein(p.lhv_angle_deg, +1.0, p.radii.lhv, VesselLabel::LHV, 0.06));
  tree.branches.push_back(side_vein(p.rhv_angle_deg, -1.0, p.radii.rhv, VesselLabel::RHV, -0.04));

  for (int t = 0; t < p.tributaries; ++t) {
    const auto& parent = tree.branches[static_cast<std::size_t>(1 + rng.uniform_int(0, 2))];
    const Vec3 root = point_along(parent.polyline, rng.uniform(0.35, 0.85));
    const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
    Vec3 dir(rng.uniform(0.3, 0.8), side * rng.uniform(0.5, 1.0), rng.uniform(-0.5, 0.5));
    dir.normalize();
    const double length = rng.uniform(0.12, 0.22) * lx;
    Vec3 kink = root + 0.5 * length * dir;
    Vec3 tip = kink + 0.5 * length * (dir + Vec3(0.3, 0.0, rng.uniform(-0.3, 0.3))).normalized();
    for (Vec3* q : {&kink, &tip}) {
      (*q)[0] = std::clamp((*q)[0], 0.08 * lx, 0.92 * lx);
      (*q)[1] = std::clamp((*q)[1], 0.15 * ly, 0.85 * ly);
      (*q)[2] = std::clamp((*q)[2], 0.15 * lz, body_top - 0.12 * lz);
    }
    tree.branches.push_back({{root, kink, tip}, 0.65 * parent.radius, parent.label, true});
  }
  for (auto& b : tree.branches) b.polyline = densify(b.polyline, gap);
  return tree;
}

}  // namespace

PhantomScene make_scene(IntensityVolume ct, MaskVolume hv_annotation, MaskVolume branch_region, MaskVolume body,
                        VesselTree tree, PhantomParams params, std::uint64_t seed) {
  const Geometry3 g = ct.geometry();
  for (const Geometry3* other : {&hv_annotation.geometry(), &branch_region.geometry(), &body.geometry()}) {
    if (other->shape != g.shape) throw ShapeMismatchError("scene volumes must share one grid");
  }
  PhantomScene scene;
  scene.seed = seed;
  scene.params = params;
  scene.intrinsic = g;
  scene.surface = heightfield_from_body(body);
  scene.ct = std::move(ct);
  scene.hv_annotation = std::move(hv_annotation);
  scene.branch_region = std::move(branch_region);
  scene.body = std::move(body);
  scene.tree = std::move(tree);
  return scene;
}

PhantomScene generate_phantom(std::uint64_t seed, const PhantomParams& params) {
  params.validate();
  Rng rng(mix_seed(seed, 0x70686e74));  // "phnt"

  Geometry3 g;
  g.shape = params.volume_shape;
  g.spacing = Vec3::Constant(params.spacing_mm);
  const Vec3 ext(static_cast<double>(g.shape[0] - 1) * params.spacing_mm,
                 static_cast<double>(g.shape[1] - 1) * params.spacing_mm,
                 static_cast<double>(g.shape[2] - 1) * params.spacing_mm);

  // Body: a box with a flat anterior surface.
  const Vec3 body_lo(0.03 * ext[0], 0.1 * ext[1], 0.06 * ext[2]);
  const Vec3 body_hi(0.97 * ext[0], 0.9 * ext[1], 0.85 * ext[2]);
  const std::size_t n = element_count(g.shape);
  std::vector<std::uint8_t> body(n, 0);
  double top_center = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.shape[0]; ++i) {
    for (std::size_t j = 0; j < g.shape[1]; ++j) {
      for (std::size_t k = 0; k < g.shape[2]; ++k) {
        const Vec3 p = index_to_physical(g, Vec3(static_cast<double>(i), static_cast<double>(j), static_cast<double>(k)));
        if ((p.array() >= body_lo.array()).all() && (p.array() <= body_hi.array()).all()) {
          body[g.linear(i, j, k)] = 1;
          top_center = std::max(top_center, p[2]);
        }
      }
    }
  }
  const double body_top = top_center + 0.5 * params.spacing_mm;

  VesselTree tree = build_tree(params, ext, body_top, rng);

  std::vector<std::uint8_t> annotation(n, 0), branch(n, 0);
  if (params.with_vessels) {
    for (const auto& b : tree.branches) {
      const bool oracle = !b.tributary && (b.label == VesselLabel::MHV || b.label == VesselLabel::Trunk);
      double arc0 = 0.0;
      for (std::size_t s = 1; s < b.polyline.size(); ++s) {
        const Vec3& a = b.polyline[s - 1];
        const Vec3& c = b.polyline[s];
        rasterize_segment(g, a, c, b.radius, [&](std::size_t v, double arc) {
          if (!body[v]) return;
          annotation[v] = 1;
          if (oracle && arc0 + arc <= params.branch_oracle_distance_mm) branch[v] = 1;
        });
        arc0 += (c - a).norm();
      }
    }
  }

  std::vector<float> ct(n, 0.0f);
  const double two_pi = 2.0 * kPi;
  for (std::size_t i = 0; i < g.shape[0]; ++i) {
    for (std::size_t j = 0; j < g.shape[1]; ++j) {
      for (std::size_t k = 0; k < g.shape[2]; ++k) {
        const std::size_t v = g.linear(i, j, k);
        const double texture = params.noise_texture_level * rng.normal();
        if (!body[v]) continue;
        const Vec3 p = index_to_physical(g, Vec3(static_cast<double>(i), static_cast<double>(j), static_cast<double>(k)));
        const double smooth = 0.04 * std::sin(two_pi * p[0] / ext[0]) * std::cos(two_pi * p[1] / ext[1]);
        const double base = annotation[v] ? 0.2 : 0.6 + smooth;
        ct[v] = static_cast<float>(std::clamp(base + texture, 0.01, 1.0));
      }
    }
  }

  return make_scene(IntensityVolume(g, std::move(ct)), MaskVolume(g, std::move(annotation)),
                    MaskVolume(g, std::move(branch)), MaskVolume(g, std::move(body)), std::move(tree), params, seed);
}

PhantomScene place_phantom(const PhantomScene& scene, const Vec3& translation, double yaw_deg) {
  if (std::abs(yaw_deg) > 10.0) throw ParameterError("placement yaw must lie within +-10 degrees");
  PhantomScene out = scene;
  out.placement = RigidTransform3(RigidTransform3::euler_zyx(yaw_deg, 0.0, 0.0), translation);
  Geometry3 placed = scene.intrinsic;
  placed.origin = out.placement.apply(scene.intrinsic.origin);
  placed.axes = out.placement.rotation() * scene.intrinsic.axes;
  out.ct = scene.ct.with_geometry(placed);
  out.hv_annotation = scene.hv_annotation.with_geometry(placed);
  out.branch_region = scene.branch_region.with_geometry(placed);
  out.body = scene.body.with_geometry(placed);
  return out;
}

std::vector<Vec3> target_grid(const PhantomScene& scene) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& b : scene.tree.branches) {
    for (const auto& p : b.polyline) {
      lo = std::min(lo, p[0] - b.radius);
      hi = std::max(hi, p[0] + b.radius);
    }
  }
  if (!(hi > lo)) throw ParameterError("target grid needs a vessel tree");
  const double scale = std::min(1.0, (hi - lo) / kReferenceLiverExtentMm);
  const double span_x = 100.0 * scale, span_y = 20.0 * scale;
  const Vec3& B = scene.tree.branch_point;
  std::vector<Vec3> out;
  out.reserve(kGridRows * kGridCols);
  for (std::size_t r = 0; r < kGridRows; ++r) {
    const double x = B[0] - 0.5 * span_x + span_x * static_cast<double>(r) / static_cast<double>(kGridRows - 1);
    for (std::size_t c = 0; c < kGridCols; ++c) {
      const double y = B[1] - 0.5 * span_y + span_y * static_cast<double>(c) / static_cast<double>(kGridCols - 1);
      out.emplace_back(x, y, B[2]);
    }
  }
  const auto& g = scene.intrinsic;
  for (const auto& t : out) {
    const Vec3 idx = physical_to_voxel(g, t);
    for (int d = 0; d < 3; ++d) {
      if (idx[d] < 0.0 || idx[d] > static_cast<double>(g.shape[d]) - 1.0) {
        throw ParameterError("target grid leaves the CT volume");
      }
    }
    const auto h = scene.surface_height(scene.to_physical(t)[0], scene.to_physical(t)[1]);
    if (!h || scene.to_physical(t)[2] >= *h) throw ParameterError("target grid point lies above the body surface");
  }
  return out;
}

}  // namespace usreg
