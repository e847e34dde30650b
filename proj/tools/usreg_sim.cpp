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

// usreg-sim: command line front end for the follow-up scan simulator.
//
// Exit codes: 0 success, 1 runtime error, 2 configuration error,
// 3 pipeline failure in single-trial mode.

#include "usreg/harness.hpp"
#include "usreg/resample.hpp"
#include "usreg/volume_io.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace usreg;
namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitFailure = 3;

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 json_vec(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

json transform_json(const RigidTransform3& t) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) rot.push_back(vec_json(t.rotation().row(r)));
  return {{"rotation", rot}, {"translation", vec_json(t.translation())}};
}

RigidTransform3 json_transform(const json& j) {
  Mat3 r;
  for (int i = 0; i < 3; ++i) r.row(i) = json_vec(j.at("rotation").at(static_cast<std::size_t>(i)));
  return {r, json_vec(j.at("translation"))};
}

json scores_json(const SimilarityScores& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"dice", s.dice}};
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
}

json report_json(const TrialReport& r) {
  json targets = json::array();
  for (const auto& t : r.targets) {
    targets.push_back({{"id", t.id},
                       {"g_ct", vec_json(t.g_ct)},
                       {"g_true", vec_json(t.g_true)},
                       {"g_hat", vec_json(t.g_hat)},
                       {"r_hat", vec_json(t.r_hat)},
                       {"omia", t.best_score},
                       {"success", t.success}});
  }
  std::vector<double> rates;
  for (std::size_t e = 0; e < r.eps_mm.size(); ++e) rates.push_back(r.success_rate(e));
  return {{"trial", r.trial_index},
          {"noise_seed", r.noise_seed},
          {"placement", {{"translation", vec_json(r.placement_translation)}, {"yaw_deg", r.placement_yaw_deg}}},
          {"p0", vec_json(r.p0)},
          {"search", {{"found", r.search_found},
                      {"failure_reason", r.failure_reason},
                      {"p_branch", vec_json(r.p_branch)},
                      {"waypoints", r.search_waypoints},
                      {"feedback_iterations", r.feedback_iterations}}},
          {"registration", {{"mapped", r.mapped},
                            {"before", scores_json(r.before)},
                            {"after", scores_json(r.after)},
                            {"score_before", r.score_before},
                            {"score_after", r.score_after},
                            {"converged", r.registration_converged},
                            {"pTc", transform_json(r.pTc)},
                            {"branch_point_error_mm", r.branch_point_error_mm}}},
          {"tol_x_mm", r.tol_x_mm},
          {"eps_mm", r.eps_mm},
          {"success_rate", rates},
          {"targets", targets},
          {"timing_ms", {{"contact", r.timing.contact_ms},
                         {"search", r.timing.search_ms},
                         {"acquire", r.timing.acquire_ms},
                         {"map", r.timing.map_ms},
                         {"targets", r.timing.targets_ms}}}};
}

// Options shared by every subcommand that needs a configured trial.
struct Common {
  std::string config;
  std::string noise_preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::size_t trial = 0;

  void add(CLI::App* app, bool with_trial) {
    app->add_option("--config", config, "sweep configuration JSON");
    app->add_option("--noise-preset", noise_preset, "zero or paper")->check(CLI::IsMember({"zero", "paper"}));
    app->add_option("--seed", seed, "master seed override");
    if (with_trial) app->add_option("--trial", trial, "trial index");
  }

  SweepConfig load() const {
    SweepConfig cfg = config.empty() ? SweepConfig{} : SweepConfig::load(config);
    if (!noise_preset.empty()) {
      const auto seed_keep = cfg.noise.seed;
      cfg.noise = SweepConfig::noise_preset(noise_preset);
      cfg.noise.seed = seed_keep;
    }
    if (seed) cfg.seed = *seed;
    if (trials) cfg.trials = *trials;
    cfg.validate();
    return cfg;
  }
};

TrialSetup setup_for(const SweepConfig& cfg, std::size_t trial) {
  return make_trial_setup(cfg, trial, generate_phantom(cfg.phantom_seed, cfg.phantom));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"usreg-sim: simulated robotic ultrasound follow-up scans"};
  app.require_subcommand(0, 1);
  bool print_config = false;
  std::string print_preset = "paper";
  app.add_flag("--print-config", print_config, "print the default configuration and exit");
  app.add_option("--preset", print_preset, "preset used by --print-config")->check(CLI::IsMember({"zero", "paper"}));

  // sweep
  Common sweep_c;
  std::string sweep_out = "out";
  std::size_t jobs = 0;
  auto* sweep = app.add_subcommand("sweep", "run the multi-trial success-rate sweep");
  sweep_c.add(sweep, false);
  sweep->add_option("--trials", sweep_c.trials, "number of trials");
  sweep->add_option("--out", sweep_out, "output directory");
  sweep->add_option("--jobs", jobs, "worker threads (0 = all cores)");

  // run-trial
  Common trial_c;
  std::string trial_out;
  auto* run_trial_cmd = app.add_subcommand("run-trial", "run one trial and print its report");
  trial_c.add(run_trial_cmd, true);
  run_trial_cmd->add_option("--out", trial_out, "report path (default stdout)");

  // register
  std::string fixed_path, moving_path, reg_config, reg_out;
  auto* reg = app.add_subcommand("register", "rigidly register two .vol masks");
  reg->add_option("--fixed", fixed_path, "fixed mask .vol")->required();
  reg->add_option("--moving", moving_path, "moving mask .vol")->required();
  reg->add_option("--config", reg_config, "sweep config whose registration block is used");
  reg->add_option("--out", reg_out, "result path (default stdout)");

  // phantom gen
  auto* phantom = app.add_subcommand("phantom", "phantom utilities");
  phantom->require_subcommand(1);
  Common gen_c;
  std::string gen_out = "scene";
  bool gen_placed = false;
  auto* gen = phantom->add_subcommand("gen", "write ct.vol, hv.vol and scene.json");
  gen_c.add(gen, true);
  gen->add_option("--out", gen_out, "output directory");
  gen->add_flag("--placed", gen_placed, "apply the trial placement (scene.json only)");

  // pipeline stages
  Common stage_c;
  std::string stage_out, contact_in, search_in, us_in, map_in;
  std::size_t target_id = 0;
  auto* contact = app.add_subcommand("contact", "initial probe contact point");
  auto* search = app.add_subcommand("search", "HV search and centralisation");
  auto* acquire = app.add_subcommand("acquire", "sweep frames into an ultrasound HV volume");
  auto* map = app.add_subcommand("map", "CT to physical coordinate mapping");
  auto* target = app.add_subcommand("target", "slice-matched localisation and imaging of one target");
  for (auto* c : {contact, search, acquire, map, target}) {
    stage_c.add(c, true);
    c->add_option("--out", stage_out, "output path");
  }
  search->add_option("--contact", contact_in, "contact.json (default: recompute)");
  acquire->add_option("--search", search_in, "search.json")->required();
  map->add_option("--us", us_in, "ultrasound HV volume (.vol)")->required();
  target->add_option("--search", search_in, "search.json")->required();
  target->add_option("--map", map_in, "map.json")->required();
  target->add_option("--target", target_id, "target index in the grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (print_config) {
      std::cout << SweepConfig::preset(print_preset).to_json();
      return 0;
    }
    if (*sweep) {
      const SweepConfig cfg = sweep_c.load();
      const auto result = run_sweep(cfg, jobs);
      emit_reports(result, sweep_out);
      for (const auto& st : result.summary.success) {
        std::cout << "eps " << st.eps_mm << " mm: mean " << st.mean << " min " << st.min << " max " << st.max << '\n';
      }
      std::cout << "dice before " << result.summary.mean_before.dice << " after " << result.summary.mean_after.dice
                << '\n';
      return 0;
    }
    if (*run_trial_cmd) {
      const SweepConfig cfg = trial_c.load();
      const auto rep = run_trial(cfg, trial_c.trial);
      write_json(report_json(rep), trial_out);
      return rep.search_found && rep.mapped ? 0 : kExitFailure;
    }
    if (*reg) {
      SweepConfig cfg = reg_config.empty() ? SweepConfig{} : SweepConfig::load(reg_config);
      const MaskVolume fixed = read_mask_volume(fixed_path);
      const MaskVolume moving = read_mask_volume(moving_path);
      const auto res = register_rigid(fixed, moving, RigidTransform3::identity(), cfg.pipeline.registration);
      const auto before = dice(resample_onto(moving, fixed.geometry(), RigidTransform3::identity()), fixed);
      const auto after = dice(resample_onto(moving, fixed.geometry(), res.transform), fixed);
      json out = transform_json(res.transform);
      out["score_before"] = res.score_init;
      out["score_after"] = res.score;
      out["dice_before"] = before;
      out["dice_after"] = after;
      out["converged"] = res.converged;
      write_json(out, reg_out);
      return 0;
    }
    if (*gen) {
      const SweepConfig cfg = gen_c.load();
      const PhantomScene base = generate_phantom(cfg.phantom_seed, cfg.phantom);
      export_scene(gen_placed ? make_trial_setup(cfg, gen_c.trial, base).scene : base, gen_out);
      std::cout << "wrote " << gen_out << '\n';
      return 0;
    }

    const SweepConfig cfg = stage_c.load();
    const auto& pp = cfg.pipeline;
    const TrialSetup setup = setup_for(cfg, stage_c.trial);
    if (*contact) {
      write_json({{"p0", vec_json(initial_contact(setup.scene).position)}}, stage_out);
      return 0;
    }
    if (*search) {
      const Vec3 p0 = contact_in.empty() ? initial_contact(setup.scene).position
                                         : json_vec(read_json(contact_in).at("p0"));
      SearchOutcome so;
      try {
        so = hv_search(setup.scene, pp.probe, setup.noise, p0, pp.search);
      } catch (const ConvergenceError& e) {
        so.failure_reason = e.what();
      }
      write_json({{"found", so.found},
                  {"failure_reason", so.failure_reason},
                  {"p_branch", vec_json(so.p_branch)},
                  {"waypoints", so.waypoints_visited},
                  {"feedback_iterations", so.feedback_iterations},
                  {"area", so.last_area},
                  {"column_centroid", so.last_column_centroid}},
                 stage_out);
      return so.found ? 0 : kExitFailure;
    }
    const json sj = search_in.empty() ? json() : read_json(search_in);
    if (!sj.is_null() && !sj.at("found").get<bool>()) {
      std::cerr << "search did not find the branching point\n";
      return kExitFailure;
    }
    if (*acquire) {
      const auto acq = hv_acquire(setup.scene, pp.probe, setup.noise, json_vec(sj.at("p_branch")),
                                  pp.acquisition_frames, pp.acquisition_length_mm);
      write_volume(acq.volume, stage_out.empty() ? "hus.vol" : stage_out);
      return 0;
    }
    if (*map) {
      const auto cm = coordinate_map(read_mask_volume(us_in), setup.scene.ct_frame_annotation(), setup.registration,
                                     pp.harmonize);
      write_json({{"pTc", transform_json(cm.pTc)},
                  {"uTc", transform_json(cm.uTc)},
                  {"g_us", vec_json(cm.g_us)},
                  {"g_ct", vec_json(cm.g_ct)},
                  {"before", scores_json(cm.before)},
                  {"after", scores_json(cm.after)},
                  {"score_before", cm.score_before},
                  {"score_after", cm.score_after},
                  {"converged", cm.converged}},
                 stage_out);
      return 0;
    }
    if (*target) {
      const auto grid = target_grid(setup.scene);
      if (target_id >= grid.size()) throw ConfigError("target index out of range");
      const RigidTransform3 pTc = json_transform(read_json(map_in).at("pTc"));
      const Vec3 p_branch = json_vec(sj.at("p_branch"));
      const Vec3 g = grid[target_id];
      const auto sm = slice_match(setup.scene, pp.probe, setup.noise, g, pTc, p_branch, pp.slice_search_mm,
                                  pp.slice_waypoints, setup.scene.ct_frame_annotation(), target_id);
      const Vec3 truth = setup.scene.to_physical(g);
      const double z = setup.scene.surface_height(sm.r_hat.x(), sm.r_hat.y()).value_or(p_branch.z());
      std::vector<bool> ok;
      for (double eps : cfg.eps_mm) {
        const auto n = static_cast<std::size_t>(std::max(1.0, std::round(2.0 * eps / pp.imaging_step_mm)));
        ok.push_back(judge_success(target_imaging(setup.scene, pp.probe, sm.r_hat, eps, n, z), truth, pp.tol_x()));
      }
      write_json({{"target", target_id},
                  {"g_hat", vec_json(sm.g_hat)},
                  {"r_hat", vec_json(sm.r_hat)},
                  {"true", vec_json(truth)},
                  {"omia", sm.best_score},
                  {"eps_mm", cfg.eps_mm},
                  {"success", ok}},
                 stage_out);
      return 0;
    }
    std::cout << app.help();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
