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

#include "usreg/registration.hpp"

#include "usreg/resample.hpp"
#include "usreg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace usreg {

std::string to_string(Objective o) {
  return o == Objective::MutualInformation ? "mutual_information" : "negative_dice";
}

Objective objective_from_string(const std::string& s) {
  if (s == "mutual_information") return Objective::MutualInformation;
  if (s == "negative_dice") return Objective::NegativeDice;
  throw ParameterError("unknown registration objective: " + s);
}

void RegistrationConfig::validate() const {
  if (histogram_bins < 2) throw ParameterError("histogram_bins must be at least 2");
  if (pyramid_levels < 1) throw ParameterError("pyramid_levels must be at least 1");
  if (max_iterations < 1) throw ParameterError("max_iterations must be positive");
  if (!(tolerance_mm > 0.0 && tolerance_deg > 0.0)) throw ParameterError("tolerances must be positive");
  if (!(bound_mm > 0.0 && bound_deg > 0.0)) throw ParameterError("search bounds must be positive");
  if (!(initial_step_mm > 0.0 && initial_step_deg > 0.0)) throw ParameterError("initial steps must be positive");
  if (restarts < 0) throw ParameterError("restarts must be nonnegative");
}

JointHistogram joint_histogram(const MaskVolume& fixed, const MaskVolume& moving, const RigidTransform3& T, int bins) {
  JointHistogram h;
  h.bins = bins;
  h.counts.assign(static_cast<std::size_t>(bins * bins), 0);
  const Geometry3& fg = fixed.geometry();
  const Geometry3& mg = moving.geometry();
  const Mat3 to_m = mg.spacing.cwiseInverse().asDiagonal() * mg.axes.transpose();
  const Mat3 lin = to_m * T.rotation() * fg.index_to_offset();
  const Vec3 off = to_m * (T.apply(fg.origin) - mg.origin);
  const Vec3 di = lin.col(0), dj = lin.col(1), dk = lin.col(2);
  const double lim0 = static_cast<double>(mg.shape[0]) - 0.5, lim1 = static_cast<double>(mg.shape[1]) - 0.5,
               lim2 = static_cast<double>(mg.shape[2]) - 0.5;
  const std::size_t m1 = mg.shape[1], m2 = mg.shape[2];
  const auto fd = fixed.data();
  const auto md = moving.data();
  const auto top = static_cast<std::uint8_t>(bins - 1);
  // Binary fast path accumulates four counters.
  std::uint64_t c[4] = {0, 0, 0, 0};
  std::uint64_t inside = 0;
  std::size_t v = 0;
  for (std::size_t i = 0; i < fg.shape[0]; ++i) {
    const Vec3 pi = off + static_cast<double>(i) * di;
    for (std::size_t j = 0; j < fg.shape[1]; ++j) {
      double x = pi[0] + static_cast<double>(j) * dj[0];
      double y = pi[1] + static_cast<double>(j) * dj[1];
      double z = pi[2] + static_cast<double>(j) * dj[2];
      for (std::size_t k = 0; k < fg.shape[2]; ++k, ++v, x += dk[0], y += dk[1], z += dk[2]) {
        const std::uint8_t fv = std::min(fd[v], top);
        std::uint8_t mv = 0;
        // Outside the moving grid reads as background, so every fixed voxel
        // counts and the marginals do not depend on the pose.
        if (x >= -0.5 && y >= -0.5 && z >= -0.5 && x < lim0 && y < lim1 && z < lim2) {
          const auto a = static_cast<std::size_t>(x + 0.5), b = static_cast<std::size_t>(y + 0.5),
                     cc = static_cast<std::size_t>(z + 0.5);
          mv = std::min(md[(a * m1 + b) * m2 + cc], top);
          ++inside;
        }
        if (bins == 2) {
          ++c[fv * 2 + mv];
        } else {
          ++h.counts[static_cast<std::size_t>(fv) * static_cast<std::size_t>(bins) + mv];
        }
      }
    }
  }
  if (bins == 2) {
    for (int n = 0; n < 4; ++n) h.counts[static_cast<std::size_t>(n)] = c[n];
  }
  h.overlap = inside;
  return h;
}

double mutual_information(const JointHistogram& h) {
  if (h.overlap == 0) return 0.0;
  const auto bins = static_cast<std::size_t>(h.bins);
  std::vector<double> pf(bins, 0.0), pm(bins, 0.0);
  double total = 0.0;
  for (auto n : h.counts) total += static_cast<double>(n);
  for (std::size_t f = 0; f < bins; ++f) {
    for (std::size_t m = 0; m < bins; ++m) {
      const double p = static_cast<double>(h.counts[f * bins + m]) / total;
      pf[f] += p;
      pm[m] += p;
    }
  }
  double mi = 0.0;
  for (std::size_t f = 0; f < bins; ++f) {
    for (std::size_t m = 0; m < bins; ++m) {
      const double p = static_cast<double>(h.counts[f * bins + m]) / total;
      if (p > 0.0) mi += p * std::log(p / (pf[f] * pm[m]));
    }
  }
  return std::max(0.0, mi);
}

MutualInformation mutual_information(const MaskVolume& fixed, const MaskVolume& moving, const RigidTransform3& T,
                                     int bins) {
  if (bins < 2) throw ParameterError("histogram_bins must be at least 2");
  const JointHistogram h = joint_histogram(fixed, moving, T, bins);
  MutualInformation out;
  out.overlap = h.overlap;
  out.empty_overlap = h.overlap == 0;
  out.value = mutual_information(h);
  return out;
}

namespace {

double score_of(const JointHistogram& h, Objective objective) {
  if (objective == Objective::MutualInformation) return mutual_information(h);
  // Dice over the overlap region; the binary bins are 0 and 1.
  const auto b = static_cast<std::size_t>(h.bins);
  std::uint64_t inter = 0, f1 = 0, m1 = 0;
  for (std::size_t f = 0; f < b; ++f) {
    for (std::size_t m = 0; m < b; ++m) {
      const auto n = h.counts[f * b + m];
      if (f > 0 && m > 0) inter += n;
      if (f > 0) f1 += n;
      if (m > 0) m1 += n;
    }
  }
  return f1 + m1 == 0 ? 0.0 : 2.0 * static_cast<double>(inter) / static_cast<double>(f1 + m1);
}

using Params = std::array<double, 6>;

RigidTransform3 make_transform(const Params& p, const RigidTransform3& init, const Vec3& pivot) {
  const Mat3 R = RigidTransform3::euler_zyx(p[3], p[4], p[5]);
  return RigidTransform3::about_center(R, pivot, Vec3(p[0], p[1], p[2])).compose(init);
}

struct Level {
  MaskVolume fixed;
  MaskVolume moving;
};

struct Search {
  const RegistrationConfig& cfg;
  const RigidTransform3& init;
  Vec3 pivot;
  std::size_t evaluations = 0;

  double eval(const Level& lv, const Params& p) {
    ++evaluations;
    return score_of(joint_histogram(lv.fixed, lv.moving, make_transform(p, init, pivot), cfg.histogram_bins),
                    cfg.objective);
  }

  bool in_bounds(const Params& p) const {
    for (int d = 0; d < 3; ++d) {
      if (std::abs(p[static_cast<std::size_t>(d)]) > cfg.bound_mm) return false;
      if (std::abs(p[static_cast<std::size_t>(d + 3)]) > cfg.bound_deg) return false;
    }
    return true;
  }

  // Coordinate-wise pattern search with step halving.
  double run_level(const Level& lv, Params& p, double step_mm, double step_deg, double stop_mm, double stop_deg,
                   std::vector<double>& trace, bool& converged) {
    double best = eval(lv, p);
    trace.push_back(best);
    int iter = 0;
    for (; iter < cfg.max_iterations; ++iter) {
      bool improved = false;
      for (std::size_t d = 0; d < 6; ++d) {
        const double step = d < 3 ? step_mm : step_deg;
        for (double sign : {1.0, -1.0}) {
          Params cand = p;
          cand[d] += sign * step;
          if (!in_bounds(cand)) continue;
          const double v = eval(lv, cand);
          if (v > best) {
            best = v;
            p = cand;
            improved = true;
            break;
          }
        }
      }
      trace.push_back(best);
      if (!improved) {
        if (step_mm <= stop_mm && step_deg <= stop_deg) break;
        step_mm *= 0.5;
        step_deg *= 0.5;
      }
    }
    if (iter == cfg.max_iterations) converged = false;
    return best;
  }
};

}  // namespace

double registration_score(const MaskVolume& fixed, const MaskVolume& moving, const RigidTransform3& T,
                          const RegistrationConfig& cfg) {
  return score_of(joint_histogram(fixed, moving, T, cfg.histogram_bins), cfg.objective);
}

RegistrationResult register_rigid(const MaskVolume& fixed, const MaskVolume& moving, const RigidTransform3& init,
                                  const RegistrationConfig& cfg) {
  cfg.validate();
  if (fixed.shape() != moving.shape() || !fixed.geometry().spacing.isApprox(moving.geometry().spacing, 1e-9)) {
    throw ShapeMismatchError("register_rigid needs volumes resampled to one spacing and shape");
  }
  if (count_nonzero(fixed) == 0 || count_nonzero(moving) == 0) throw EmptyMaskError("register_rigid on an empty mask");

  // Pyramid, coarsest first.
  std::vector<Level> levels;
  for (int l = cfg.pyramid_levels - 1; l >= 0; --l) {
    const std::size_t factor = std::size_t{1} << l;
    levels.push_back({downsample_max(fixed, factor), downsample_max(moving, factor)});
  }
  const double voxel = fixed.geometry().spacing.maxCoeff();

  Search search{cfg, init, init.apply(centroid(fixed))};
  RegistrationResult out;
  out.score_init = search.eval(levels.back(), Params{});

  Rng rng(mix_seed(cfg.seed, 0x72656721));
  double best_score = -std::numeric_limits<double>::infinity();
  for (int r = 0; r <= cfg.restarts; ++r) {
    Params p{};
    if (r > 0) {
      for (std::size_t d = 0; d < 3; ++d) p[d] = rng.uniform(-cfg.bound_mm / 3.0, cfg.bound_mm / 3.0);
      for (std::size_t d = 3; d < 6; ++d) p[d] = rng.uniform(-cfg.bound_deg / 2.0, cfg.bound_deg / 2.0);
    }
    std::vector<std::vector<double>> trace;
    bool converged = true;
    double score = 0.0;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const double factor = static_cast<double>(std::size_t{1} << (levels.size() - 1 - l));
      const bool finest = l + 1 == levels.size();
      // Coarse levels stop at half a coarse voxel; the finest at the tolerance.
      const double stop_mm = finest ? cfg.tolerance_mm : 0.5 * voxel * factor;
      const double stop_deg = finest ? cfg.tolerance_deg : std::max(cfg.tolerance_deg, 0.5 * factor);
      trace.emplace_back();
      score = search.run_level(levels[l], p, cfg.initial_step_mm * factor, cfg.initial_step_deg * factor, stop_mm,
                               stop_deg, trace.back(), converged);
    }
    if (score > best_score) {
      best_score = score;
      out.params = p;
      out.best_restart = static_cast<std::size_t>(r);
      out.converged = converged;
      out.level_trace = std::move(trace);
    }
  }
  if (best_score < out.score_init) {
    // Coarse levels can lead every start away from a better initial pose.
    best_score = out.score_init;
    out.params = Params{};
  }
  out.score = best_score;
  out.transform = make_transform(out.params, init, search.pivot);
  out.evaluations = search.evaluations;
  return out;
}

}  // namespace usreg
