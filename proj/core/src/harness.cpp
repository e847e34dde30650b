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

#include "usreg/harness.hpp"

#include "usreg/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace usreg {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Config serialisation
// ---------------------------------------------------------------------------
namespace {

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

// Walks a JSON object, filling fields that are present and rejecting keys it
// was never asked about.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }
  ~Reader() = default;

  template <class T>
  void get(const char* key, T& out) {
    seen_.push_back(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type");
    }
  }
  void get(const char* key, Vec3& out) {
    std::vector<double> v;
    get(key, v);
    if (!j_.contains(key)) return;
    if (v.size() != 3) throw ConfigError(path_ + "." + key + ": expected 3 numbers");
    out = Vec3(v[0], v[1], v[2]);
  }
  void get(const char* key, Shape3& out) {
    std::vector<std::size_t> v;
    get(key, v);
    if (!j_.contains(key)) return;
    if (v.size() != 3) throw ConfigError(path_ + "." + key + ": expected 3 integers");
    out = {v[0], v[1], v[2]};
  }
  void get(const char* key, Shape2& out) {
    std::vector<std::size_t> v;
    get(key, v);
    if (!j_.contains(key)) return;
    if (v.size() != 2) throw ConfigError(path_ + "." + key + ": expected 2 integers");
    out = {v[0], v[1]};
  }
  void get(const char* key, Vec2& out) {
    std::vector<double> v;
    get(key, v);
    if (!j_.contains(key)) return;
    if (v.size() != 2) throw ConfigError(path_ + "." + key + ": expected 2 numbers");
    out = Vec2(v[0], v[1]);
  }
  void get(const char* key, std::optional<double>& out) {
    seen_.push_back(key);
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    if (v.is_null()) {
      out.reset();
    } else if (v.is_number()) {
      out = v.get<double>();
    } else {
      throw ConfigError(path_ + "." + key + ": expected a number or null");
    }
  }
  std::optional<Reader> child(const char* key) {
    seen_.push_back(key);
    if (!j_.contains(key)) return std::nullopt;
    return Reader(j_.at(key), path_ + "." + key);
  }
  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), k) == seen_.end()) {
        throw ConfigError(path_ + ": unknown key '" + k + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

json noise_json(const NoiseModel& n) {
  return {{"pixel_flip_rate", n.pixel_flip_rate}, {"spurious_blob_rate", n.spurious_blob_rate},
          {"blob_min_px", n.blob_min_px},         {"blob_max_px", n.blob_max_px},
          {"morph_jitter", n.morph_jitter},       {"seed", n.seed}};
}

void read_noise(Reader r, NoiseModel& n) {
  r.get("pixel_flip_rate", n.pixel_flip_rate);
  r.get("spurious_blob_rate", n.spurious_blob_rate);
  r.get("blob_min_px", n.blob_min_px);
  r.get("blob_max_px", n.blob_max_px);
  r.get("morph_jitter", n.morph_jitter);
  r.get("seed", n.seed);
  r.finish();
}

json phantom_json(const PhantomParams& p) {
  return {{"volume_shape", {p.volume_shape[0], p.volume_shape[1], p.volume_shape[2]}},
          {"spacing_mm", p.spacing_mm},
          {"lhv_angle_deg", p.lhv_angle_deg},
          {"rhv_angle_deg", p.rhv_angle_deg},
          {"radii", {{"trunk", p.radii.trunk}, {"mhv", p.radii.mhv}, {"lhv", p.radii.lhv}, {"rhv", p.radii.rhv}}},
          {"noise_texture_level", p.noise_texture_level},
          {"tributaries", p.tributaries},
          {"branch_oracle_distance_mm", p.branch_oracle_distance_mm},
          {"with_vessels", p.with_vessels}};
}

void read_phantom(Reader r, PhantomParams& p) {
  r.get("volume_shape", p.volume_shape);
  r.get("spacing_mm", p.spacing_mm);
  r.get("lhv_angle_deg", p.lhv_angle_deg);
  r.get("rhv_angle_deg", p.rhv_angle_deg);
  if (auto c = r.child("radii")) {
    c->get("trunk", p.radii.trunk);
    c->get("mhv", p.radii.mhv);
    c->get("lhv", p.radii.lhv);
    c->get("rhv", p.radii.rhv);
    c->finish();
  }
  r.get("noise_texture_level", p.noise_texture_level);
  r.get("tributaries", p.tributaries);
  r.get("branch_oracle_distance_mm", p.branch_oracle_distance_mm);
  r.get("with_vessels", p.with_vessels);
  r.finish();
}

json registration_json(const RegistrationConfig& c) {
  return {{"objective", to_string(c.objective)},
          {"histogram_bins", c.histogram_bins},
          {"pyramid_levels", c.pyramid_levels},
          {"max_iterations", c.max_iterations},
          {"tolerance_mm", c.tolerance_mm},
          {"tolerance_deg", c.tolerance_deg},
          {"restarts", c.restarts},
          {"bound_mm", c.bound_mm},
          {"bound_deg", c.bound_deg},
          {"initial_step_mm", c.initial_step_mm},
          {"initial_step_deg", c.initial_step_deg},
          {"seed", c.seed}};
}

void read_registration(Reader r, RegistrationConfig& c) {
  std::string objective = to_string(c.objective);
  r.get("objective", objective);
  try {
    c.objective = objective_from_string(objective);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  r.get("histogram_bins", c.histogram_bins);
  r.get("pyramid_levels", c.pyramid_levels);
  r.get("max_iterations", c.max_iterations);
  r.get("tolerance_mm", c.tolerance_mm);
  r.get("tolerance_deg", c.tolerance_deg);
  r.get("restarts", c.restarts);
  r.get("bound_mm", c.bound_mm);
  r.get("bound_deg", c.bound_deg);
  r.get("initial_step_mm", c.initial_step_mm);
  r.get("initial_step_deg", c.initial_step_deg);
  r.get("seed", c.seed);
  r.finish();
}

json pipeline_json(const PipelineParams& p) {
  const auto& pr = p.probe;
  const auto& s = p.search;
  json tol = p.tol_x_mm ? json(*p.tol_x_mm) : json(nullptr);
  return {
      {"probe",
       {{"fov_width_mm", pr.fov_width_mm},
        {"fov_depth_mm", pr.fov_depth_mm},
        {"image_shape", {pr.image_shape[0], pr.image_shape[1]}},
        {"pixel_spacing", {pr.pixel_spacing[0], pr.pixel_spacing[1]}}}},
      {"search",
       {{"eps0_px", s.eps0_px},
        {"eps1_px", s.eps1_px},
        {"step_mm", s.step_mm},
        {"pattern", s.pattern == WaypointPattern::Line ? "line" : "grid"},
        {"extent_mm", s.extent_mm},
        {"spacing_mm", s.spacing_mm},
        {"max_feedback_iterations", s.max_feedback_iterations}}},
      {"acquisition_frames", p.acquisition_frames},
      {"acquisition_length_mm", p.acquisition_length_mm},
      {"registration", registration_json(p.registration)},
      {"harmonize",
       {{"spacing", vec3_json(p.harmonize.spacing)},
        {"shape", {p.harmonize.shape[0], p.harmonize.shape[1], p.harmonize.shape[2]}}}},
      {"slice_search_mm", p.slice_search_mm},
      {"slice_waypoints", p.slice_waypoints},
      {"imaging_step_mm", p.imaging_step_mm},
      {"tol_x_mm", tol}};
}

void read_pipeline(Reader r, PipelineParams& p) {
  if (auto c = r.child("probe")) {
    c->get("fov_width_mm", p.probe.fov_width_mm);
    c->get("fov_depth_mm", p.probe.fov_depth_mm);
    c->get("image_shape", p.probe.image_shape);
    c->get("pixel_spacing", p.probe.pixel_spacing);
    c->finish();
  }
  if (auto c = r.child("search")) {
    c->get("eps0_px", p.search.eps0_px);
    c->get("eps1_px", p.search.eps1_px);
    c->get("step_mm", p.search.step_mm);
    std::string pattern = p.search.pattern == WaypointPattern::Line ? "line" : "grid";
    c->get("pattern", pattern);
    if (pattern == "line") {
      p.search.pattern = WaypointPattern::Line;
    } else if (pattern == "grid") {
      p.search.pattern = WaypointPattern::Grid;
    } else {
      throw ConfigError("pipeline.search.pattern: expected 'line' or 'grid'");
    }
    c->get("extent_mm", p.search.extent_mm);
    c->get("spacing_mm", p.search.spacing_mm);
    c->get("max_feedback_iterations", p.search.max_feedback_iterations);
    c->finish();
  }
  r.get("acquisition_frames", p.acquisition_frames);
  r.get("acquisition_length_mm", p.acquisition_length_mm);
  if (auto c = r.child("registration")) read_registration(*c, p.registration);
  if (auto c = r.child("harmonize")) {
    c->get("spacing", p.harmonize.spacing);
    c->get("shape", p.harmonize.shape);
    c->finish();
  }
  r.get("slice_search_mm", p.slice_search_mm);
  r.get("slice_waypoints", p.slice_waypoints);
  r.get("imaging_step_mm", p.imaging_step_mm);
  r.get("tol_x_mm", p.tol_x_mm);
  r.finish();
}

json parse_text(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace

void SweepConfig::validate() const {
  try {
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (eps_mm.empty()) throw ConfigError("eps list must not be empty");
    for (std::size_t i = 0; i < eps_mm.size(); ++i) {
      if (!(eps_mm[i] >= 0.0)) throw ConfigError("eps values must be non-negative");
      if (i > 0 && !(eps_mm[i] > eps_mm[i - 1])) throw ConfigError("eps list must be sorted ascending");
    }
    if (!(placement.tx_mm >= 0.0 && placement.ty_mm >= 0.0)) throw ConfigError("placement bounds must be >= 0");
    if (!(placement.yaw_deg >= 0.0 && placement.yaw_deg <= 10.0)) throw ConfigError("placement yaw must be in [0, 10]");
    noise.validate();
    phantom.validate();
    pipeline.probe.validate();
    pipeline.search.validate();
    pipeline.registration.validate();
    if (pipeline.acquisition_frames < 2) throw ConfigError("acquisition_frames must be at least 2");
    if (!(pipeline.acquisition_length_mm > 0.0)) throw ConfigError("acquisition_length_mm must be positive");
    if (!(pipeline.harmonize.spacing.minCoeff() > 0.0)) throw ConfigError("harmonize spacing must be positive");
    if (element_count(pipeline.harmonize.shape) == 0) throw ConfigError("harmonize shape must be positive");
    if (!(pipeline.slice_search_mm >= 0.0)) throw ConfigError("slice_search_mm must be non-negative");
    if (pipeline.slice_waypoints < 1) throw ConfigError("slice_waypoints must be at least 1");
    if (!(pipeline.imaging_step_mm > 0.0)) throw ConfigError("imaging_step_mm must be positive");
    if (pipeline.tol_x_mm && !(*pipeline.tol_x_mm >= 0.0)) throw ConfigError("tol_x_mm must be non-negative");
  } catch (const ConfigError&) {
    throw;
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
}

NoiseModel SweepConfig::noise_preset(std::string_view name) {
  if (name == "zero") return NoiseModel::zero();
  if (name == "paper") return NoiseModel::paper_default();
  throw ConfigError("unknown noise preset '" + std::string(name) + "' (expected zero or paper)");
}

SweepConfig SweepConfig::preset(std::string_view name) {
  SweepConfig cfg;
  cfg.noise = noise_preset(name);
  return cfg;
}

std::string SweepConfig::to_json() const {
  json j = {{"schema_version", kSchemaVersion},
            {"trials", trials},
            {"seed", seed},
            {"phantom_seed", phantom_seed},
            {"noise", noise_json(noise)},
            {"eps_mm", eps_mm},
            {"placement", {{"tx_mm", placement.tx_mm}, {"ty_mm", placement.ty_mm}, {"yaw_deg", placement.yaw_deg}}},
            {"phantom", phantom_json(phantom)},
            {"pipeline", pipeline_json(pipeline)}};
  return j.dump(2) + "\n";
}

SweepConfig SweepConfig::from_json(const std::string& text) {
  const json j = parse_text(text, "config");
  SweepConfig cfg;
  Reader r(j, "config");
  int version = kSchemaVersion;
  r.get("schema_version", version);
  if (version != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " + std::to_string(version));
  }
  r.get("trials", cfg.trials);
  r.get("seed", cfg.seed);
  r.get("phantom_seed", cfg.phantom_seed);
  if (auto c = r.child("noise")) read_noise(*c, cfg.noise);
  r.get("eps_mm", cfg.eps_mm);
  if (auto c = r.child("placement")) {
    c->get("tx_mm", cfg.placement.tx_mm);
    c->get("ty_mm", cfg.placement.ty_mm);
    c->get("yaw_deg", cfg.placement.yaw_deg);
    c->finish();
  }
  if (auto c = r.child("phantom")) read_phantom(*c, cfg.phantom);
  if (auto c = r.child("pipeline")) read_pipeline(*c, cfg.pipeline);
  r.finish();
  cfg.validate();
  return cfg;
}

SweepConfig SweepConfig::load(const fs::path& path) { return from_json(read_file(path)); }

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

double TrialReport::success_rate(std::size_t e) const {
  if (targets.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& t : targets) ok += t.success.at(e) ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(targets.size());
}

TrialSetup make_trial_setup(const SweepConfig& cfg, std::size_t trial_index, const PhantomScene& base) {
  Rng rng(mix_seed(cfg.seed, trial_index, 0x504c41ULL));
  const double tx = rng.uniform(-cfg.placement.tx_mm, cfg.placement.tx_mm);
  const double ty = rng.uniform(-cfg.placement.ty_mm, cfg.placement.ty_mm);
  const double yaw = cfg.placement.yaw_deg > 0.0 ? rng.uniform(-cfg.placement.yaw_deg, cfg.placement.yaw_deg) : 0.0;
  TrialSetup setup{place_phantom(base, Vec3(tx, ty, 0.0), yaw), cfg.noise, cfg.pipeline.registration};
  setup.noise.seed = mix_seed(cfg.noise.seed, cfg.seed, trial_index);
  setup.registration.seed = mix_seed(cfg.pipeline.registration.seed, cfg.seed, trial_index);
  return setup;
}

TrialReport run_trial(const SweepConfig& cfg, std::size_t trial_index) {
  cfg.validate();
  return run_trial(cfg, trial_index, generate_phantom(cfg.phantom_seed, cfg.phantom));
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Imaging frames at identical positions are identical, so nested eps ranges
// reuse captures.
class FrameCache {
 public:
  FrameCache(const PhantomScene& scene, const ProbeParams& probe) : scene_(scene), probe_(probe) {}
  std::vector<UltrasoundFrame> frames(const std::vector<Vec3>& positions) {
    std::vector<UltrasoundFrame> out;
    out.reserve(positions.size());
    for (const auto& p : positions) {
      const auto key = std::make_tuple(p.x(), p.y(), p.z());
      auto it = cache_.find(key);
      if (it == cache_.end()) it = cache_.emplace(key, capture_us(scene_, ProbeState{p}, probe_)).first;
      out.push_back(it->second);
    }
    return out;
  }

 private:
  const PhantomScene& scene_;
  const ProbeParams& probe_;
  std::map<std::tuple<double, double, double>, UltrasoundFrame> cache_;
};

}  // namespace

TrialReport run_trial(const SweepConfig& cfg, std::size_t trial_index, const PhantomScene& base, std::size_t workers) {
  const auto& pp = cfg.pipeline;
  TrialReport rep;
  rep.trial_index = trial_index;
  rep.eps_mm = cfg.eps_mm;
  rep.tol_x_mm = pp.tol_x();

  auto t0 = Clock::now();
  const TrialSetup setup = make_trial_setup(cfg, trial_index, base);
  const PhantomScene& scene = setup.scene;
  rep.noise_seed = setup.noise.seed;
  rep.placement_translation = scene.placement.translation();
  rep.placement_yaw_deg = rad2deg(std::atan2(scene.placement.rotation()(1, 0), scene.placement.rotation()(0, 0)));
  rep.p0 = initial_contact(scene).position;
  rep.timing.contact_ms = ms_since(t0);

  t0 = Clock::now();
  SearchOutcome so;
  try {
    so = hv_search(scene, pp.probe, setup.noise, rep.p0, pp.search);
  } catch (const ConvergenceError& e) {
    so.failure_reason = e.what();
  }
  rep.timing.search_ms = ms_since(t0);
  rep.search_found = so.found;
  rep.failure_reason = so.failure_reason;
  rep.search_waypoints = so.waypoints_visited;
  rep.feedback_iterations = so.feedback_iterations;
  if (!so.found) return rep;
  rep.p_branch = so.p_branch;

  t0 = Clock::now();
  const auto acq = hv_acquire(scene, pp.probe, setup.noise, so.p_branch, pp.acquisition_frames, pp.acquisition_length_mm);
  rep.timing.acquire_ms = ms_since(t0);

  t0 = Clock::now();
  const MaskVolume h_ct = scene.ct_frame_annotation();
  CoordinateMap cm;
  try {
    cm = coordinate_map(acq.volume, h_ct, setup.registration, pp.harmonize);
  } catch (const EmptyMaskError& e) {
    rep.failure_reason = std::string("coordinate mapping: ") + e.what();
    rep.timing.map_ms = ms_since(t0);
    return rep;
  }
  rep.timing.map_ms = ms_since(t0);
  rep.mapped = true;
  rep.before = cm.before;
  rep.after = cm.after;
  rep.score_before = cm.score_before;
  rep.score_after = cm.score_after;
  rep.registration_converged = cm.converged;
  rep.pTc = cm.pTc;
  rep.branch_point_error_mm = (cm.pTc.apply(scene.tree.branch_point) - scene.physical_branch_point()).norm();

  t0 = Clock::now();
  const auto grid = target_grid(scene);
  rep.targets.resize(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t k) {
    TargetRecord& rec = rep.targets[k];
    rec.id = k;
    rec.g_ct = grid[k];
    rec.g_true = scene.to_physical(grid[k]);
    const auto sm = slice_match(scene, pp.probe, setup.noise, grid[k], cm.pTc, so.p_branch, pp.slice_search_mm,
                                pp.slice_waypoints, h_ct, k);
    rec.g_hat = sm.g_hat;
    rec.r_hat = sm.r_hat;
    rec.best_score = sm.best_score;
    const double z = scene.surface_height(sm.r_hat.x(), sm.r_hat.y()).value_or(so.p_branch.z());
    FrameCache cache(scene, pp.probe);
    for (const double eps : cfg.eps_mm) {
      const auto n = static_cast<std::size_t>(std::max(1.0, std::round(2.0 * eps / pp.imaging_step_mm)));
      const auto frames = cache.frames(imaging_waypoints(sm.r_hat, eps, n, z));
      rec.success.push_back(judge_success(frames, rec.g_true, rep.tol_x_mm));
    }
  });
  rep.timing.targets_ms = ms_since(t0);
  return rep;
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

bool RegistrationRow::operator==(const RegistrationRow& o) const {
  auto eq = [](const SimilarityScores& a, const SimilarityScores& b) {
    return a.precision == b.precision && a.recall == b.recall && a.dice == b.dice;
  };
  return trial == o.trial && mapped == o.mapped && eq(before, o.before) && eq(after, o.after) &&
         score_before == o.score_before && score_after == o.score_after && converged == o.converged;
}

bool SweepSummary::operator==(const SweepSummary& o) const {
  auto eq = [](const SimilarityScores& a, const SimilarityScores& b) {
    return a.precision == b.precision && a.recall == b.recall && a.dice == b.dice;
  };
  return schema_version == o.schema_version && trials == o.trials && targets_per_trial == o.targets_per_trial &&
         search_failures == o.search_failures && tol_x_mm == o.tol_x_mm && success == o.success &&
         per_trial_rates == o.per_trial_rates && registration == o.registration && eq(mean_before, o.mean_before) &&
         eq(mean_after, o.mean_after);
}

SweepSummary summarize(const std::vector<TrialReport>& reports, const std::vector<double>& eps_mm) {
  SweepSummary s;
  s.trials = reports.size();
  for (const auto& r : reports) {
    s.targets_per_trial = std::max(s.targets_per_trial, r.targets.size());
    if (!r.search_found) ++s.search_failures;
    s.tol_x_mm = r.tol_x_mm;
    std::vector<double> rates;
    for (std::size_t e = 0; e < eps_mm.size(); ++e) rates.push_back(r.success_rate(e));
    s.per_trial_rates.push_back(std::move(rates));
    s.registration.push_back(
        {r.trial_index, r.mapped, r.before, r.after, r.score_before, r.score_after, r.registration_converged});
  }
  for (std::size_t e = 0; e < eps_mm.size(); ++e) {
    EpsStat st{eps_mm[e], 0.0, 1.0, 0.0};
    for (const auto& rates : s.per_trial_rates) {
      st.mean += rates[e];
      st.min = std::min(st.min, rates[e]);
      st.max = std::max(st.max, rates[e]);
    }
    if (s.per_trial_rates.empty()) {
      st.min = 0.0;
    } else {
      st.mean /= static_cast<double>(s.per_trial_rates.size());
    }
    s.success.push_back(st);
  }
  std::size_t mapped = 0;
  for (const auto& row : s.registration) {
    if (!row.mapped) continue;
    ++mapped;
    s.mean_before.precision += row.before.precision;
    s.mean_before.recall += row.before.recall;
    s.mean_before.dice += row.before.dice;
    s.mean_after.precision += row.after.precision;
    s.mean_after.recall += row.after.recall;
    s.mean_after.dice += row.after.dice;
  }
  if (mapped > 0) {
    const double n = static_cast<double>(mapped);
    for (auto* m : {&s.mean_before, &s.mean_after}) {
      m->precision /= n;
      m->recall /= n;
      m->dice /= n;
    }
  }
  return s;
}

SweepResult run_sweep(const SweepConfig& cfg, std::size_t workers) {
  cfg.validate();
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  const PhantomScene base = generate_phantom(cfg.phantom_seed, cfg.phantom);
  SweepResult out;
  out.reports.resize(cfg.trials);
  const std::size_t inner = cfg.trials == 1 ? workers : 1;
  parallel_for(cfg.trials, workers, [&](std::size_t t) { out.reports[t] = run_trial(cfg, t, base, inner); });
  out.summary = summarize(out.reports, cfg.eps_mm);
  return out;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t err_index = n;
  std::exception_ptr err;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------
namespace {

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

json scores_json(const SimilarityScores& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"dice", s.dice}};
}

SimilarityScores json_scores(const json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("dice").get<double>()};
}

}  // namespace

std::string SweepSummary::to_json() const {
  json succ = json::array();
  for (const auto& s : success) succ.push_back({{"eps_mm", s.eps_mm}, {"mean", s.mean}, {"min", s.min}, {"max", s.max}});
  json reg = json::array();
  for (const auto& r : registration) {
    reg.push_back({{"trial", r.trial},
                   {"mapped", r.mapped},
                   {"before", scores_json(r.before)},
                   {"after", scores_json(r.after)},
                   {"score_before", r.score_before},
                   {"score_after", r.score_after},
                   {"converged", r.converged}});
  }
  json j = {{"schema_version", schema_version},
            {"trials", trials},
            {"targets_per_trial", targets_per_trial},
            {"search_failures", search_failures},
            {"tol_x_mm", tol_x_mm},
            {"success", succ},
            {"per_trial_rates", per_trial_rates},
            {"registration", reg},
            {"mean_before", scores_json(mean_before)},
            {"mean_after", scores_json(mean_after)}};
  return j.dump(2) + "\n";
}

SweepSummary SweepSummary::from_json(const std::string& text) {
  const json j = parse_text(text, "summary");
  SweepSummary s;
  try {
    s.schema_version = j.at("schema_version").get<int>();
    s.trials = j.at("trials").get<std::size_t>();
    s.targets_per_trial = j.at("targets_per_trial").get<std::size_t>();
    s.search_failures = j.at("search_failures").get<std::size_t>();
    s.tol_x_mm = j.at("tol_x_mm").get<double>();
    for (const auto& e : j.at("success")) {
      s.success.push_back({e.at("eps_mm").get<double>(), e.at("mean").get<double>(), e.at("min").get<double>(),
                           e.at("max").get<double>()});
    }
    s.per_trial_rates = j.at("per_trial_rates").get<std::vector<std::vector<double>>>();
    for (const auto& r : j.at("registration")) {
      s.registration.push_back({r.at("trial").get<std::size_t>(), r.at("mapped").get<bool>(),
                                json_scores(r.at("before")), json_scores(r.at("after")),
                                r.at("score_before").get<double>(), r.at("score_after").get<double>(),
                                r.at("converged").get<bool>()});
    }
    s.mean_before = json_scores(j.at("mean_before"));
    s.mean_after = json_scores(j.at("mean_after"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("summary: ") + e.what());
  }
  return s;
}

SweepSummary SweepSummary::load(const fs::path& path) { return from_json(read_file(path)); }

std::string trials_csv(const std::vector<TrialReport>& reports) {
  std::string out =
      "trial,target,eps_mm,success,true_x,true_y,true_z,g_hat_x,g_hat_y,g_hat_z,r_hat_x,r_hat_y,r_hat_z,"
      "x_error_mm,omia\n";
  for (const auto& r : reports) {
    for (const auto& t : r.targets) {
      for (std::size_t e = 0; e < r.eps_mm.size(); ++e) {
        out += std::to_string(r.trial_index) + ',' + std::to_string(t.id) + ',' + fmt(r.eps_mm[e], 3) + ',' +
               (t.success[e] ? "1" : "0");
        for (const Vec3* v : {&t.g_true, &t.g_hat, &t.r_hat}) {
          for (int d = 0; d < 3; ++d) out += ',' + fmt((*v)[d]);
        }
        out += ',' + fmt(t.r_hat.x() - t.g_true.x()) + ',' + std::to_string(t.best_score) + '\n';
      }
    }
  }
  return out;
}

std::string registration_csv(const SweepSummary& s) {
  std::string out =
      "trial,mapped,pre_precision,pre_recall,pre_dice,post_precision,post_recall,post_dice,score_before,"
      "score_after,converged\n";
  auto row = [&](const std::string& label, const std::string& mapped, const SimilarityScores& b,
                 const SimilarityScores& a, const std::string& tail) {
    out += label + ',' + mapped + ',' + fmt(b.precision) + ',' + fmt(b.recall) + ',' + fmt(b.dice) + ',' +
           fmt(a.precision) + ',' + fmt(a.recall) + ',' + fmt(a.dice) + ',' + tail + '\n';
  };
  for (const auto& r : s.registration) {
    row(std::to_string(r.trial), r.mapped ? "1" : "0", r.before, r.after,
        fmt(r.score_before) + ',' + fmt(r.score_after) + ',' + (r.converged ? "1" : "0"));
  }
  row("mean", "", s.mean_before, s.mean_after, ",,");
  return out;
}

std::string success_curve_svg(const SweepSummary& s) {
  const double w = 640, h = 400, left = 60, right = 20, top = 20, bottom = 50;
  const double pw = w - left - right, ph = h - top - bottom;
  double e_lo = s.success.empty() ? 0.0 : s.success.front().eps_mm;
  double e_hi = s.success.empty() ? 1.0 : s.success.back().eps_mm;
  if (e_hi <= e_lo) e_hi = e_lo + 1.0;
  auto px = [&](double e) { return left + (e - e_lo) / (e_hi - e_lo) * pw; };
  auto py = [&](double r) { return top + (1.0 - r) * ph; };
  auto pts = [&](auto value) {
    std::string p;
    for (const auto& st : s.success) {
      if (!p.empty()) p += ' ';
      p += fmt(px(st.eps_mm), 2) + ',' + fmt(py(value(st)), 2);
    }
    return p;
  };
  std::string band = pts([](const EpsStat& st) { return st.max; });
  for (auto it = s.success.rbegin(); it != s.success.rend(); ++it) {
    band += ' ' + fmt(px(it->eps_mm), 2) + ',' + fmt(py(it->min), 2);
  }
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"white\"/>\n";
  out += "<line x1=\"" + fmt(left, 2) + "\" y1=\"" + fmt(top + ph, 2) + "\" x2=\"" + fmt(left + pw, 2) + "\" y2=\"" +
         fmt(top + ph, 2) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + fmt(left, 2) + "\" y1=\"" + fmt(top, 2) + "\" x2=\"" + fmt(left, 2) + "\" y2=\"" +
         fmt(top + ph, 2) + "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double r = 0.25 * k;
    out += "<text x=\"" + fmt(left - 8, 2) + "\" y=\"" + fmt(py(r) + 4, 2) +
           "\" font-size=\"11\" text-anchor=\"end\">" + fmt(r, 2) + "</text>\n";
  }
  for (const auto& st : s.success) {
    out += "<text x=\"" + fmt(px(st.eps_mm), 2) + "\" y=\"" + fmt(top + ph + 16, 2) +
           "\" font-size=\"11\" text-anchor=\"middle\">" + fmt(st.eps_mm, 1) + "</text>\n";
  }
  out += "<text x=\"" + fmt(left + pw / 2, 2) + "\" y=\"" + fmt(h - 10, 2) +
         "\" font-size=\"12\" text-anchor=\"middle\">scan range eps (mm)</text>\n";
  out += "<text x=\"14\" y=\"" + fmt(top + ph / 2, 2) + "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         fmt(top + ph / 2, 2) + ")\">success rate</text>\n";
  out += "<polygon id=\"band\" points=\"" + band + "\" fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\"/>\n";
  out += "<polyline id=\"min\" points=\"" + pts([](const EpsStat& st) { return st.min; }) +
         "\" fill=\"none\" stroke=\"#6baed6\" stroke-dasharray=\"4 3\"/>\n";
  out += "<polyline id=\"max\" points=\"" + pts([](const EpsStat& st) { return st.max; }) +
         "\" fill=\"none\" stroke=\"#6baed6\" stroke-dasharray=\"4 3\"/>\n";
  out += "<polyline id=\"mean\" points=\"" + pts([](const EpsStat& st) { return st.mean; }) +
         "\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\"/>\n";
  out += "</svg>\n";
  return out;
}

void emit_reports(const SweepResult& result, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  write_file(out_dir / "trials.csv", trials_csv(result.reports));
  write_file(out_dir / "summary.json", result.summary.to_json());
  write_file(out_dir / "success_curve.svg", success_curve_svg(result.summary));
  write_file(out_dir / "registration.csv", registration_csv(result.summary));
  json timing = json::array();
  for (const auto& r : result.reports) {
    timing.push_back({{"trial", r.trial_index},
                      {"contact_ms", r.timing.contact_ms},
                      {"search_ms", r.timing.search_ms},
                      {"acquire_ms", r.timing.acquire_ms},
                      {"map_ms", r.timing.map_ms},
                      {"targets_ms", r.timing.targets_ms}});
  }
  write_file(out_dir / "timing.json", timing.dump(2) + "\n");
}

}  // namespace usreg
