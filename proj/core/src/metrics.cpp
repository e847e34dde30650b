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

#include "usreg/metrics.hpp"

#include <algorithm>
#include <vector>

namespace usreg {

OverlapCounts overlap_counts(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> truth) {
  if (pred.size() != truth.size()) throw ShapeMismatchError("overlap metrics need equally sized masks");
  OverlapCounts c;
  for (std::size_t n = 0; n < pred.size(); ++n) {
    const bool p = pred[n] != 0, t = truth[n] != 0;
    c.pred += p;
    c.truth += t;
    c.intersection += p && t;
  }
  return c;
}

OverlapCounts overlap_counts(const Mask2& pred, const Mask2& truth) {
  if (pred.shape != truth.shape) throw ShapeMismatchError("overlap metrics need equally shaped masks");
  return overlap_counts(std::span<const std::uint8_t>(pred.data), std::span<const std::uint8_t>(truth.data));
}

OverlapCounts overlap_counts(const MaskVolume& pred, const MaskVolume& truth) {
  if (pred.shape() != truth.shape()) throw ShapeMismatchError("overlap metrics need equally shaped masks");
  return overlap_counts(pred.data(), truth.data());
}

namespace {
double ratio(std::uint64_t num, std::uint64_t den, const OverlapCounts& c) {
  if (c.pred == 0 && c.truth == 0) return 1.0;
  if (den == 0) return 0.0;
  return static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

double precision(const OverlapCounts& c) { return ratio(c.intersection, c.pred, c); }
double recall(const OverlapCounts& c) { return ratio(c.intersection, c.truth, c); }
double dice(const OverlapCounts& c) { return ratio(2 * c.intersection, c.pred + c.truth, c); }

SimilarityScores similarity(const OverlapCounts& c) { return {precision(c), recall(c), dice(c)}; }

namespace {

struct Run {
  std::int64_t start;
  std::int64_t length;
};

// Runs of ones along axis 1, one list per axis-0 row.
std::vector<std::vector<Run>> row_runs(const Mask2& m) {
  std::vector<std::vector<Run>> rows(m.shape[0]);
  const auto w = static_cast<std::int64_t>(m.shape[1]);
  for (std::size_t i = 0; i < m.shape[0]; ++i) {
    const std::uint8_t* row = m.data.data() + i * m.shape[1];
    std::int64_t j = 0;
    while (j < w) {
      if (!row[j]) {
        ++j;
        continue;
      }
      const std::int64_t start = j;
      while (j < w && row[j]) ++j;
      rows[i].push_back({start, j - start});
    }
  }
  return rows;
}

}  // namespace

std::uint64_t omia(const Mask2& pred, const Mask2& truth) {
  if (pred.shape[0] > truth.shape[0] || pred.shape[1] > truth.shape[1]) {
    throw ShapeMismatchError("omia: prediction larger than the reference slice");
  }
  // Zero padding does not change the set of achievable overlaps, so the
  // unpadded prediction is used directly; offsets cover every pair of rows.
  const auto pr = row_runs(pred);
  const auto tr = row_runs(truth);
  const auto hp = static_cast<std::int64_t>(pred.shape[0]), ht = static_cast<std::int64_t>(truth.shape[0]);
  const auto wp = static_cast<std::int64_t>(pred.shape[1]), wt = static_cast<std::int64_t>(truth.shape[1]);
  // Offset d = truth position - pred position. Row offsets span [-(hp-1), ht-1],
  // column offsets [-(wp-1), wt-1]; the second-difference table needs two
  // extra slots past the end.
  const std::int64_t nrow = hp + ht - 1, ncol = wp + wt + 2;
  const std::int64_t col0 = wp - 1;
  std::vector<std::int64_t> diff(static_cast<std::size_t>(nrow * ncol), 0);
  bool any = false;
  for (std::int64_t a = 0; a < hp; ++a) {
    if (pr[a].empty()) continue;
    for (std::int64_t b = 0; b < ht; ++b) {
      if (tr[b].empty()) continue;
      any = true;
      std::int64_t* d = diff.data() + (b - a + hp - 1) * ncol + col0;
      for (const Run& p : pr[a]) {
        for (const Run& t : tr[b]) {
          // Overlap of [p.start + s, +p.length) with [t.start, +t.length) as a
          // function of s is a trapezoid; encode its slope changes.
          const std::int64_t base = t.start - p.start;
          const std::int64_t m = std::min(p.length, t.length);
          d[base - p.length + 1] += 1;
          d[base - p.length + 1 + m] -= 1;
          d[base + t.length - m + 1] -= 1;
          d[base + t.length + 1] += 1;
        }
      }
    }
  }
  if (!any) return 0;
  std::int64_t best = 0;
  for (std::int64_t r = 0; r < nrow; ++r) {
    const std::int64_t* d = diff.data() + r * ncol;
    std::int64_t slope = 0, value = 0;
    for (std::int64_t c = 0; c < ncol; ++c) {
      slope += d[c];
      value += slope;
      best = std::max(best, value);
    }
  }
  return static_cast<std::uint64_t>(best);
}

}  // namespace usreg
