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

#include "usreg/volume_io.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstring>
#include <fstream>

namespace usreg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little, "raw volume I/O assumes a little-endian host");

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 json_vec(const json& j) {
  if (!j.is_array() || j.size() != 3) throw IoError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json geometry_json(const Geometry3& g) {
  json axes = json::array();
  for (int c = 0; c < 3; ++c) axes.push_back(vec_json(g.axes.col(c)));
  return {{"shape", {g.shape[0], g.shape[1], g.shape[2]}},
          {"spacing", vec_json(g.spacing)},
          {"origin", vec_json(g.origin)},
          {"axes", axes}};
}

Geometry3 json_geometry(const json& j) {
  Geometry3 g;
  const auto& s = j.at("shape");
  if (!s.is_array() || s.size() != 3) throw IoError("shape must have three entries");
  for (int a = 0; a < 3; ++a) g.shape[static_cast<std::size_t>(a)] = s[static_cast<std::size_t>(a)].get<std::size_t>();
  g.spacing = json_vec(j.at("spacing"));
  g.origin = json_vec(j.at("origin"));
  const auto& axes = j.at("axes");
  if (!axes.is_array() || axes.size() != 3) throw IoError("axes must have three columns");
  for (int c = 0; c < 3; ++c) g.axes.col(c) = json_vec(axes[static_cast<std::size_t>(c)]);
  return g;
}

template <class T>
void write_impl(const Volume3<T>& vol, const fs::path& header, const char* dtype) {
  fs::path raw = header;
  raw.replace_extension(".raw");
  json h = geometry_json(vol.geometry());
  h["dtype"] = dtype;
  h["data_file"] = raw.filename().string();
  {
    std::ofstream out(header);
    if (!out) throw IoError("cannot open " + header.string());
    out << h.dump(2) << '\n';
  }
  std::ofstream out(raw, std::ios::binary);
  if (!out) throw IoError("cannot open " + raw.string());
  const auto d = vol.data();
  out.write(reinterpret_cast<const char*>(d.data()), static_cast<std::streamsize>(d.size() * sizeof(T)));
  if (!out) throw IoError("short write to " + raw.string());
}

template <class T>
Volume3<T> read_impl(const fs::path& header, const char* dtype) {
  std::ifstream in(header);
  if (!in) throw IoError("cannot open " + header.string());
  json h;
  try {
    h = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(header.string() + ": " + e.what());
  }
  try {
    if (h.at("dtype").get<std::string>() != dtype) {
      throw IoError(header.string() + ": expected dtype " + dtype);
    }
    Geometry3 g = json_geometry(h);
    const fs::path raw = header.parent_path() / h.at("data_file").get<std::string>();
    std::ifstream rin(raw, std::ios::binary);
    if (!rin) throw IoError("cannot open " + raw.string());
    std::vector<T> data(element_count(g.shape));
    rin.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(T)));
    if (rin.gcount() != static_cast<std::streamsize>(data.size() * sizeof(T))) {
      throw IoError(raw.string() + ": truncated data");
    }
    return Volume3<T>(std::move(g), std::move(data));
  } catch (const json::exception& e) {
    throw IoError(header.string() + ": " + e.what());
  }
}

}  // namespace

void write_volume(const MaskVolume& vol, const fs::path& header) { write_impl(vol, header, "u8"); }
void write_volume(const IntensityVolume& vol, const fs::path& header) { write_impl(vol, header, "f32"); }
MaskVolume read_mask_volume(const fs::path& header) { return read_impl<std::uint8_t>(header, "u8"); }
IntensityVolume read_intensity_volume(const fs::path& header) { return read_impl<float>(header, "f32"); }

void export_scene(const PhantomScene& scene, const fs::path& dir) {
  fs::create_directories(dir);
  write_volume(scene.ct.with_geometry(scene.intrinsic), dir / "ct.vol");
  write_volume(scene.ct_frame_annotation(), dir / "hv.vol");
  const auto& p = scene.params;
  json rot = json::array();
  for (int r = 0; r < 3; ++r) rot.push_back(vec_json(scene.placement.rotation().row(r)));
  json targets = json::array();
  for (const auto& t : target_grid(scene)) targets.push_back(vec_json(t));
  json j = {{"seed", scene.seed},
            {"params",
             {{"volume_shape", {p.volume_shape[0], p.volume_shape[1], p.volume_shape[2]}},
              {"spacing_mm", p.spacing_mm},
              {"lhv_angle_deg", p.lhv_angle_deg},
              {"rhv_angle_deg", p.rhv_angle_deg},
              {"radii", {{"trunk", p.radii.trunk}, {"mhv", p.radii.mhv}, {"lhv", p.radii.lhv}, {"rhv", p.radii.rhv}}},
              {"noise_texture_level", p.noise_texture_level},
              {"tributaries", p.tributaries}}},
            {"placement", {{"rotation", rot}, {"translation", vec_json(scene.placement.translation())}}},
            {"branch_point_ct", vec_json(scene.tree.branch_point)},
            {"branch_point_physical", vec_json(scene.physical_branch_point())},
            {"targets_ct", targets}};
  std::ofstream out(dir / "scene.json");
  if (!out) throw IoError("cannot write scene.json");
  out << j.dump(2) << '\n';
}

}  // namespace usreg
