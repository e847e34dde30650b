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

#include "usreg/noise.hpp"

#include "usreg/rng.hpp"

#include <vector>

namespace usreg {

void NoiseModel::validate() const {
  if (!(pixel_flip_rate >= 0.0 && pixel_flip_rate <= 1.0)) throw ParameterError("pixel_flip_rate must lie in [0, 1]");
  if (!(spurious_blob_rate >= 0.0 && spurious_blob_rate <= 1.0)) {
    throw ParameterError("spurious_blob_rate must lie in [0, 1]");
  }
  if (blob_min_px == 0 || blob_min_px > blob_max_px) throw ParameterError("blob size range is invalid");
  if (morph_jitter < 0) throw ParameterError("morph_jitter must be nonnegative");
}

namespace {

Mask2 morph_step(const Mask2& in, bool dilate) {
  Mask2 out = in;
  const std::size_t w = in.shape[0], h = in.shape[1];
  for (std::size_t i = 0; i < w; ++i) {
    for (std::size_t j = 0; j < h; ++j) {
      const std::uint8_t c = in(i, j);
      // Out-of-frame neighbours count as background.
      const std::uint8_t up = i > 0 ? in(i - 1, j) : 0, dn = i + 1 < w ? in(i + 1, j) : 0;
      const std::uint8_t lf = j > 0 ? in(i, j - 1) : 0, rt = j + 1 < h ? in(i, j + 1) : 0;
      out(i, j) = dilate ? static_cast<std::uint8_t>(c | up | dn | lf | rt)
                         : static_cast<std::uint8_t>(c & up & dn & lf & rt);
    }
  }
  return out;
}

void add_blob(Mask2& m, Rng& rng, std::size_t size) {
  const std::size_t w = m.shape[0], h = m.shape[1];
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  std::vector<std::uint8_t> taken(w * h, 0);
  const auto ci = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(w) - 1));
  const auto cj = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(h) - 1));
  cells.emplace_back(ci, cj);
  taken[ci * h + cj] = 1;
  // Random accretion; bounded so a blob wedged in a corner still terminates.
  for (std::size_t attempt = 0; cells.size() < size && attempt < 20 * size; ++attempt) {
    const auto& [i, j] = cells[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(cells.size()) - 1))];
    const auto dir = rng.uniform_int(0, 3);
    std::int64_t ni = static_cast<std::int64_t>(i) + (dir == 0) - (dir == 1);
    std::int64_t nj = static_cast<std::int64_t>(j) + (dir == 2) - (dir == 3);
    if (ni < 0 || nj < 0 || ni >= static_cast<std::int64_t>(w) || nj >= static_cast<std::int64_t>(h)) continue;
    const auto idx = static_cast<std::size_t>(ni) * h + static_cast<std::size_t>(nj);
    if (taken[idx]) continue;
    taken[idx] = 1;
    cells.emplace_back(static_cast<std::size_t>(ni), static_cast<std::size_t>(nj));
  }
  for (const auto& [i, j] : cells) m(i, j) = 1;
}

}  // namespace

Mask2 corrupt_mask(const Mask2& clean, const NoiseModel& noise, std::uint64_t frame_index, OracleKind kind) {
  noise.validate();
  if (noise.is_zero()) return clean;
  Rng rng(mix_seed(noise.seed, frame_index, static_cast<std::uint64_t>(kind)));
  Mask2 out = clean;

  if (noise.morph_jitter > 0) {
    const auto r = rng.uniform_int(-noise.morph_jitter, noise.morph_jitter);
    for (std::int64_t s = 0; s < (r < 0 ? -r : r); ++s) out = morph_step(out, r > 0);
  }
  if (noise.pixel_flip_rate > 0.0) {
    for (auto& v : out.data) {
      if (rng.uniform() < noise.pixel_flip_rate) v = static_cast<std::uint8_t>(1 - v);
    }
  }
  const auto blobs = rng.poisson(noise.spurious_blob_rate);
  for (std::int64_t b = 0; b < blobs; ++b) {
    const auto size = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(noise.blob_min_px), static_cast<std::int64_t>(noise.blob_max_px)));
    add_blob(out, rng, size);
  }
  return out;
}

Mask2 segment_full(const UltrasoundFrame& frame, const NoiseModel& noise, std::uint64_t frame_index) {
  return corrupt_mask(frame.mask_truth, noise, frame_index, OracleKind::Full);
}

Mask2 segment_branch(const UltrasoundFrame& frame, const NoiseModel& noise, std::uint64_t frame_index) {
  return corrupt_mask(frame.branch_truth, noise, frame_index, OracleKind::Branch);
}

}  // namespace usreg
