// Copyright 2026 The Kinonav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kinonav/cli.h"

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "kinonav/metrics.h"
#include "kinonav/scanfuse.h"
#include "kinonav/sysid.h"
#include "kinonav/textio.h"
#include "kinonav/world.h"

namespace kinonav::cli {
namespace {

namespace fs = std::filesystem;
using Setter = std::function<void(RunConfig&, std::string_view)>;

Setter Real(double sim::SimConfig::*field) {
  return [field](RunConfig& c, std::string_view v) { c.sim.*field = textio::ParseDouble(v, "value"); };
}

Setter Real(double policy::MpcConfig::*field) {
  return [field](RunConfig& c, std::string_view v) { c.mpc.*field = textio::ParseDouble(v, "value"); };
}

Setter Int(int sim::SimConfig::*field) {
  return [field](RunConfig& c, std::string_view v) {
    c.sim.*field = static_cast<int>(textio::ParseInt(v, "value"));
  };
}

Setter Int(int policy::MpcConfig::*field) {
  return [field](RunConfig& c, std::string_view v) {
    c.mpc.*field = static_cast<int>(textio::ParseInt(v, "value"));
  };
}

const std::map<std::string, Setter>& Setters() {
  using S = sim::SimConfig;
  using M = policy::MpcConfig;
  static const std::map<std::string, Setter> setters = {
      {"sim.success_radius", Real(&S::success_radius)},
      {"sim.success_speed_linear", Real(&S::success_speed_linear)},
      {"sim.success_speed_angular", Real(&S::success_speed_angular)},
      {"sim.success_hold", Int(&S::success_hold)},
      {"sim.reward_success", Real(&S::reward_success)},
      {"sim.slack_cost", Real(&S::slack_cost)},
      {"sim.collision_cost", Real(&S::collision_cost)},
      {"sim.max_steps", Int(&S::max_steps)},
      {"sim.recovery_block_time", Real(&S::recovery_block_time)},
      {"sim.recovery_min_motion", Real(&S::recovery_min_motion)},
      {"sim.recovery_speed", Real(&S::recovery_speed)},
      {"sim.recovery_duration", Real(&S::recovery_duration)},
      {"sim.robot_radius", Real(&S::robot_radius)},
      {"sim.lidar_max_range", Real(&S::lidar_max_range)},
      {"sim.decision_hz",
       [](RunConfig& c, std::string_view v) {
         c.sim.physics.decision_hz = textio::ParseDouble(v, "value");
       }},
      {"sim.physics_hz",
       [](RunConfig& c, std::string_view v) {
         c.sim.physics.physics_hz = textio::ParseDouble(v, "value");
       }},
      {"noise.odom_mean_forward",
       [](RunConfig& c, std::string_view v) {
         c.sim.odom_noise.mean[0] = textio::ParseDouble(v, "value");
       }},
      {"noise.odom_mean_heading",
       [](RunConfig& c, std::string_view v) {
         c.sim.odom_noise.mean[1] = textio::ParseDouble(v, "value");
       }},
      {"noise.absloc_period_lo",
       [](RunConfig& c, std::string_view v) {
         c.sim.absloc_noise.period_lo = static_cast<int>(textio::ParseInt(v, "value"));
       }},
      {"noise.absloc_period_hi",
       [](RunConfig& c, std::string_view v) {
         c.sim.absloc_noise.period_hi = static_cast<int>(textio::ParseInt(v, "value"));
       }},
      {"mpc.horizon", Int(&M::horizon)},
      {"mpc.waypoint_lookahead", Real(&M::waypoint_lookahead)},
      {"mpc.baseline_lookahead", Real(&M::baseline_lookahead)},
      {"mpc.w_dist", Real(&M::w_dist)},
      {"mpc.w_heading", Real(&M::w_heading)},
      {"mpc.w_collision", Real(&M::w_collision)},
      {"mpc.replan_period", Int(&M::replan_period)},
      {"mpc.stop_fraction", Real(&M::stop_fraction)},
      {"mpc.clearance_margin", Real(&M::clearance_margin)},
      {"mpc.w_clearance", Real(&M::w_clearance)},
      {"mpc.w_path", Real(&M::w_path)},
      {"mpc.plan_margin", Real(&M::plan_margin)},
      {"mpc.coast_windows", Int(&M::coast_windows)},
      {"mpc.stuck_steps", Int(&M::stuck_steps)},
      {"mpc.stuck_motion", Real(&M::stuck_motion)},
      {"mpc.escape_horizon", Int(&M::escape_horizon)},
  };
  return setters;
}

void EnsureDirectory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

dynamics::SecondOrderParams ModelOrDefault(const fs::path& model) {
  return model.empty() ? dynamics::DefaultParams() : dynamics::LoadParams(model);
}

Pose2 ParsePose(const std::string& text) {
  const std::vector<std::string_view> parts = textio::Split(text, ',');
  if (parts.size() != 3) throw InvalidArgument("--initial expects x,y,theta");
  return {textio::ParseDouble(parts[0], "--initial x"),
          textio::ParseDouble(parts[1], "--initial y"),
          textio::ParseDouble(parts[2], "--initial theta")};
}

std::string CommandLog(const std::vector<sim::TraceRow>& trace) {
  std::string out = "t,v_cmd,w_cmd\n";
  for (std::size_t i = 1; i < trace.size(); ++i) {
    out += fmt::format("{},{},{}\n", trace[i - 1].t, trace[i].command.v_star,
                       trace[i].command.w_star);
  }
  return out;
}

// --- subcommands ---

struct IdentifyArgs {
  std::vector<std::string> logs;
  int window = 21;
  bool adjust_damping = false;
  double zeta_target = 0.7;
  std::string output;
};

int RunIdentify(const IdentifyArgs& a, std::ostream& out) {
  std::vector<sysid::TrajectoryLog> logs;
  for (const std::string& path : a.logs) logs.push_back(sysid::LoadLog(path));
  sysid::IdentifyOptions options;
  options.window = a.window;
  sysid::IdentifiedModel model = sysid::Identify(logs, options);
  if (a.adjust_damping) model = sysid::AdjustDamping(model, a.zeta_target);
  textio::WriteFile(a.output, sysid::FormatModel(model));
  out << fmt::format("{:<22}  {:>12}  {:>8}\n", "regime", "residual", "samples");
  for (int i = 0; i < sysid::kNumRegimes; ++i) {
    out << fmt::format("{:<22}  {:>12.6g}  {:>8}\n",
                       sysid::RegimeName(static_cast<sysid::RegimeId>(i)),
                       model.residuals[i], model.counts[i]);
  }
  return kExitOk;
}

struct SynthArgs {
  std::string model;
  int count = 8;
  double hold = 3.0;
  double noise = 0.0;
  std::string output;
};

int RunSynthLogs(const SynthArgs& a, const RunConfig& config, std::ostream& out) {
  if (a.count < 1) throw InvalidArgument("--count must be >= 1");
  const dynamics::SecondOrderParams params = ModelOrDefault(a.model);
  EnsureDirectory(a.output);
  for (int i = 0; i < a.count; ++i) {
    sysid::SynthesisOptions options;
    options.hold_s = a.hold;
    options.noise_sigma = a.noise;
    options.noise_seed = DeriveSeed(config.seed, "measurement", i);
    const auto script = sysid::StepScript(DeriveSeed(config.seed, "script", i));
    const fs::path path = fs::path(a.output) / fmt::format("log_{:02}.csv", i);
    textio::WriteFile(path, sysid::FormatLog(sysid::SynthesizeLog(params, script, options)));
  }
  out << fmt::format("wrote {} logs to {}\n", a.count, a.output);
  return kExitOk;
}

struct ReplayArgs {
  std::string model;
  std::string commands;
  std::string initial = "0,0,0";
  std::string output;
};

int RunReplay(const ReplayArgs& a, const RunConfig& config, std::ostream& out) {
  const dynamics::SecondOrderParams params = ModelOrDefault(a.model);
  const Pose2 start = ParsePose(a.initial);
  const textio::CsvTable table = textio::ParseCsv(textio::ReadFile(a.commands), a.commands);
  const std::size_t ct = table.Column("t");
  const std::size_t cv = table.Column("v_cmd");
  const std::size_t cw = table.Column("w_cmd");
  if (table.rows.empty()) throw DataError(a.commands + ": no commands");
  std::vector<dynamics::TimedCommand> commands;
  for (const auto& row : table.rows) commands.push_back({row[ct], {row[cv], row[cw]}});

  dynamics::MotionState initial;
  initial.x = start.x;
  initial.y = start.y;
  initial.theta = NormalizeAngle(start.theta);
  const std::vector<dynamics::MotionState> trace =
      dynamics::ReplayOpenLoop(initial, commands, params, config.sim.physics);
  std::string csv = "t,x,y,theta,v,w\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const dynamics::MotionState& s = trace[k];
    csv += fmt::format("{},{},{},{},{},{}\n",
                       commands.front().t + k / config.sim.physics.physics_hz, s.x, s.y,
                       s.theta, s.v, s.w);
  }
  textio::WriteFile(a.output, csv);
  out << fmt::format("replayed {} commands into {} states\n", commands.size(), trace.size());
  return kExitOk;
}

struct WorldsArgs {
  int count = 20;
  double size = 10.0;
  double clutter = 0.05;
  int per_world = 1;
  double min_geodesic = 3.0;
  double max_geodesic = 12.0;
  std::string output;
};

int RunMakeWorlds(const WorldsArgs& a, const RunConfig& config, std::ostream& out) {
  if (a.count < 1 || a.per_world < 1) throw InvalidArgument("counts must be >= 1");
  EnsureDirectory(a.output);
  world::RoomsSpec spec;
  spec.width = a.size;
  spec.height = a.size;
  spec.clutter = a.clutter;
  std::vector<world::Episode> all;
  for (int w = 0; w < a.count; ++w) {
    const world::OccupancyGrid grid =
        world::GenerateRooms(DeriveSeed(config.seed, "world", w), spec);
    const std::string name = fmt::format("world_{:03}.grid", w);
    world::SaveGrid(grid, fs::path(a.output) / name);
    std::vector<world::Episode> episodes =
        world::SampleEpisodes(grid, a.per_world, DeriveSeed(config.seed, "episodes", w),
                              a.min_geodesic, a.max_geodesic, config.sim.robot_radius);
    for (std::size_t e = 0; e < episodes.size(); ++e) {
      episodes[e].id = fmt::format("w{:03}-{}", w, e);
      episodes[e].grid = name;
      all.push_back(episodes[e]);
    }
  }
  world::SaveEpisodes(all, fs::path(a.output) / "episodes.jsonl");
  out << fmt::format("wrote {} worlds and {} episodes to {}\n", a.count, all.size(), a.output);
  return kExitOk;
}

struct ScanArgs {
  std::vector<std::string> depth;
  std::string cams;
  int bins = scanfuse::kNumBins;
  double max_range = world::kDefaultMaxRange;
  double min_height = 0.05;
  double max_height = 1.2;
  std::string output;
};

// {"cameras": [{"yaw_deg": 0, "height": 0.25, "x": 0, "y": 0}, ...]}, one
// entry per depth raster in order.
std::vector<scanfuse::Rigid3> LoadMounts(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(textio::ReadFile(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  std::vector<scanfuse::Rigid3> mounts;
  try {
    for (const auto& cam : j.at("cameras")) {
      mounts.push_back(scanfuse::LevelMount(cam.at("yaw_deg").get<double>() * kPi / 180.0,
                                            cam.at("height").get<double>(),
                                            cam.value("x", 0.0), cam.value("y", 0.0)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return mounts;
}

int RunScanProject(const ScanArgs& a, std::ostream& out) {
  const std::vector<scanfuse::Rigid3> mounts = LoadMounts(a.cams);
  if (mounts.size() != a.depth.size()) {
    throw InvalidArgument(fmt::format("{} depth rasters but {} cameras in {}", a.depth.size(),
                                      mounts.size(), a.cams));
  }
  scanfuse::PointCloud cloud;
  for (std::size_t i = 0; i < a.depth.size(); ++i) {
    const scanfuse::DepthRaster raster = scanfuse::ReadDepthRaster(a.depth[i]);
    scanfuse::CameraModel cam;
    cam.width = raster.image.width;
    cam.height = raster.image.height;
    cam.fx = raster.fx;
    cam.fy = raster.fy;
    cam.cx = raster.cx;
    cam.cy = raster.cy;
    cam.portrait = raster.portrait;
    cam.extrinsic = mounts[i];
    cam.Validate();
    const scanfuse::PointCloud points = scanfuse::DepthToPoints(raster.image, cam);
    cloud.insert(cloud.end(), points.begin(), points.end());
  }
  const scanfuse::FusedScan scan = scanfuse::BinScan(
      scanfuse::HeightFilter(cloud, a.min_height, a.max_height), a.bins, a.max_range);
  const double width = 2.0 * kPi / a.bins;
  std::string csv = "bin,azimuth,range\n";
  for (int i = 0; i < a.bins; ++i) {
    csv += fmt::format("{},{},{}\n", i, -kPi + (i + 0.5) * width, scan.ranges[i]);
  }
  textio::WriteFile(a.output, csv);
  out << fmt::format("projected {} points into {} bins\n", cloud.size(), a.bins);
  return kExitOk;
}

struct ReportArgs {
  std::vector<std::string> runs;  // label=results.jsonl
  std::string output;
};

int RunReport(const ReportArgs& a, std::ostream& out) {
  std::vector<std::pair<std::string, metrics::Report>> rows;
  for (const std::string& run : a.runs) {
    const std::size_t eq = run.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw InvalidArgument("expected label=results.jsonl, got '" + run + "'");
    }
    const auto results = metrics::LoadResults(run.substr(eq + 1));
    rows.emplace_back(run.substr(0, eq), metrics::Aggregate(results));
  }
  const std::string table = metrics::FormatTable(rows);
  if (!a.output.empty()) textio::WriteFile(a.output, table);
  out << table;
  return kExitOk;
}

}  // namespace

void ApplyOverrides(const std::map<std::string, std::string>& overrides, RunConfig& config) {
  for (const auto& [key, value] : overrides) {
    const auto it = Setters().find(key);
    if (it == Setters().end()) throw DataError("config: unknown key '" + key + "'");
    try {
      it->second(config, value);
    } catch (const DataError& e) {
      throw DataError("config: " + key + ": " + e.what());
    }
  }
  try {
    config.sim.Validate();
    config.mpc.Validate();
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("config: ") + e.what());
  }
}

metrics::Report Evaluate(const EvaluateOptions& options, const RunConfig& config,
                         std::ostream& log) {
  const std::vector<world::Episode> episodes = world::LoadEpisodes(options.episodes);
  if (episodes.empty()) throw DataError(options.episodes.string() + ": no episodes");
  const dynamics::SecondOrderParams params = ModelOrDefault(options.model);
  const policy::PoseSource source =
      options.noisy_pose ? policy::PoseSource::kNoisy : policy::PoseSource::kPrivileged;
  policy::MakePolicy(options.policy, config.mpc, source);  // rejects unknown names early
  if (options.jobs < 1) throw InvalidArgument("--jobs must be >= 1");

  const fs::path base = options.episodes.parent_path();
  std::map<std::string, std::shared_ptr<const world::OccupancyGrid>> grids;
  for (const world::Episode& ep : episodes) {
    if (ep.id.empty() || ep.id.find_first_of("/\\") != std::string::npos) {
      throw DataError("episode id '" + ep.id + "' is not usable as a file name");
    }
    if (!grids.contains(ep.grid)) {
      grids[ep.grid] = std::make_shared<const world::OccupancyGrid>(
          world::LoadGrid(base / ep.grid));
    }
  }

  std::vector<sim::EpisodeRun> runs(episodes.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < episodes.size(); i = next++) {
      const world::Episode& ep = episodes[i];
      try {
        try {
          auto pol = policy::MakePolicy(options.policy, config.mpc, source);
          runs[i] = sim::RunEpisode(grids.at(ep.grid), ep, *pol, params, config.sim,
                                    DeriveSeed(config.seed, "episode", i));
        } catch (const Infeasible& e) {
          runs[i].result.episode_id = ep.id;
          runs[i].result.error = e.what();
        } catch (const InvalidArgument& e) {
          runs[i].result.episode_id = ep.id;
          runs[i].result.error = e.what();
        }
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (options.jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < options.jobs; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  EnsureDirectory(options.output_dir / "traces");
  std::vector<metrics::EpisodeResult> results;
  for (const sim::EpisodeRun& run : runs) {
    results.push_back(run.result);
    if (!run.result.error.empty()) {
      log << fmt::format("episode {} failed: {}\n", run.result.episode_id, run.result.error);
      continue;
    }
    const fs::path stem = options.output_dir / "traces" / run.result.episode_id;
    textio::WriteFile(stem.string() + ".csv", sim::FormatTrace(run.trace));
    textio::WriteFile(stem.string() + ".commands.csv", CommandLog(run.trace));
  }
  metrics::SaveResults(results, options.output_dir / "results.jsonl");
  const metrics::Report report = metrics::Aggregate(results);
  const std::string label = options.policy + (options.noisy_pose ? "+noisy" : "");
  const std::string table = metrics::FormatTable({{label, report}});
  textio::WriteFile(options.output_dir / "report.json", metrics::ReportToJson(report) + "\n");
  textio::WriteFile(options.output_dir / "report.txt", table);
  log << table;
  return report;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamics-aware point-goal navigation toolkit", "kinonav"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig config;
  std::string config_file;
  app.add_option("--seed", config.seed, "Master seed for every random stream");
  app.add_option("--config", config_file, "Key-value overrides (sim.*, mpc.*, noise.*)")
      ->check(CLI::ExistingFile);

  IdentifyArgs identify;
  auto* c_identify = app.add_subcommand("identify", "Fit the motion model to CSV logs");
  c_identify->add_option("logs", identify.logs, "Logs with t,v_cmd,w_cmd,v_meas,w_meas")
      ->required()
      ->check(CLI::ExistingFile);
  c_identify->add_option("--window", identify.window, "Hann smoothing window (odd)");
  c_identify->add_flag("--adjust-damping", identify.adjust_damping,
                       "Set every damping ratio to --zeta, matching rise times");
  c_identify->add_option("--zeta", identify.zeta_target, "Target damping ratio");
  c_identify->add_option("-o,--output", identify.output, "Model file to write")->required();

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth-logs", "Generate step-response logs from a model");
  c_synth->add_option("--model", synth.model, "Parameter file (default model if omitted)")
      ->check(CLI::ExistingFile);
  c_synth->add_option("--count", synth.count, "Number of logs");
  c_synth->add_option("--hold", synth.hold, "Seconds each command is held");
  c_synth->add_option("--noise", synth.noise, "Velocity measurement noise sigma");
  c_synth->add_option("-o,--output", synth.output, "Output directory")->required();

  EvaluateOptions eval;
  std::string eval_episodes, eval_model, eval_out;
  auto* c_eval = app.add_subcommand("evaluate", "Run a policy over an episode set");
  c_eval->add_option("--episodes", eval_episodes, "Episodes JSON-lines file")
      ->required()
      ->check(CLI::ExistingFile);
  c_eval->add_option("--model", eval_model, "Parameter file (default model if omitted)")
      ->check(CLI::ExistingFile);
  c_eval->add_option("--policy", eval.policy, "mpc or rotate_then_go");
  c_eval->add_flag("--noisy-pose", eval.noisy_pose, "Plan from noisy odometry and fixes");
  c_eval->add_option("--jobs", eval.jobs, "Worker threads");
  c_eval->add_option("-o,--output", eval_out, "Output directory")->required();

  ReplayArgs replay;
  auto* c_replay = app.add_subcommand("replay", "Open-loop rollout of a command script");
  c_replay->add_option("--model", replay.model, "Parameter file (default model if omitted)")
      ->check(CLI::ExistingFile);
  c_replay->add_option("--commands", replay.commands, "CSV with t,v_cmd,w_cmd")
      ->required()
      ->check(CLI::ExistingFile);
  c_replay->add_option("--initial", replay.initial, "Start pose x,y,theta");
  c_replay->add_option("-o,--output", replay.output, "Trace CSV to write")->required();

  WorldsArgs worlds;
  auto* c_worlds = app.add_subcommand("make-worlds", "Generate room worlds and episodes");
  c_worlds->add_option("--count", worlds.count, "Number of worlds");
  c_worlds->add_option("--size", worlds.size, "World side length in metres");
  c_worlds->add_option("--clutter", worlds.clutter, "Box area fraction");
  c_worlds->add_option("--episodes-per-world", worlds.per_world, "Episodes per world");
  c_worlds->add_option("--min-geodesic", worlds.min_geodesic, "Minimum start-goal distance");
  c_worlds->add_option("--max-geodesic", worlds.max_geodesic, "Maximum start-goal distance");
  c_worlds->add_option("-o,--output", worlds.output, "Output directory")->required();

  ScanArgs scan;
  auto* c_scan = app.add_subcommand("scan-project", "Fuse depth rasters into a planar scan");
  c_scan->add_option("--depth", scan.depth, "Depth raster files")
      ->required()
      ->check(CLI::ExistingFile);
  c_scan->add_option("--cams", scan.cams, "Camera mount JSON, one entry per raster")
      ->required()
      ->check(CLI::ExistingFile);
  c_scan->add_option("--bins", scan.bins, "Angular bins");
  c_scan->add_option("--max-range", scan.max_range, "Range for empty bins");
  c_scan->add_option("--min-height", scan.min_height, "Lowest kept point height");
  c_scan->add_option("--max-height", scan.max_height, "Highest kept point height");
  c_scan->add_option("-o,--output", scan.output, "Scan CSV to write")->required();

  ReportArgs report;
  auto* c_report = app.add_subcommand("report", "Tabulate results files side by side");
  c_report->add_option("runs", report.runs, "label=results.jsonl pairs")->required();
  c_report->add_option("-o,--output", report.output, "Table file to write");

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!config_file.empty()) {
      ApplyOverrides(textio::ParseKeyValues(textio::ReadFile(config_file), config_file),
                     config);
    }
    if (c_identify->parsed()) return RunIdentify(identify, out);
    if (c_synth->parsed()) return RunSynthLogs(synth, config, out);
    if (c_replay->parsed()) return RunReplay(replay, config, out);
    if (c_worlds->parsed()) return RunMakeWorlds(worlds, config, out);
    if (c_scan->parsed()) return RunScanProject(scan, out);
    if (c_report->parsed()) return RunReport(report, out);
    if (c_eval->parsed()) {
      eval.episodes = eval_episodes;
      eval.model = eval_model;
      eval.output_dir = eval_out;
      Evaluate(eval, config, out);
      return kExitOk;
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Infeasible& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace kinonav::cli
