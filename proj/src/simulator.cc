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

#include "kinonav/simulator.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "kinonav/scanfuse.h"

namespace kinonav::sim {

using dynamics::MotionState;
using dynamics::VelocityCommand;

void SimConfig::Validate() const {
  physics.Validate();
  const bool positive = success_radius > 0.0 && success_speed_linear > 0.0 &&
                        success_speed_angular > 0.0 && success_hold >= 1 &&
                        reward_success > 0.0 && slack_cost > 0.0 &&
                        collision_cost > 0.0 && max_steps >= 1 &&
                        recovery_block_time > 0.0 && recovery_min_motion > 0.0 &&
                        recovery_duration > 0.0 && robot_radius > 0.0 &&
                        lidar_max_range > 0.0;
  if (!positive) throw InvalidArgument("simulator settings must be positive");
  if (!(recovery_speed < 0.0)) throw InvalidArgument("recovery_speed must be negative");
  absloc_noise.Validate();
}

int SimConfig::RecoveryBlockSteps() const {
  return std::max(1, static_cast<int>(std::lround(recovery_block_time * physics.decision_hz)));
}

int SimConfig::RecoverySteps() const {
  return std::max(1, static_cast<int>(std::lround(recovery_duration * physics.decision_hz)));
}

Simulator::Simulator(std::shared_ptr<const world::OccupancyGrid> grid,
                     const world::Episode& episode,
                     const dynamics::SecondOrderParams& params, const SimConfig& config,
                     std::uint64_t seed)
    : grid_(std::move(grid)),
      episode_(episode),
      params_(params),
      config_(config),
      odom_noise_(config.odom_noise),
      odom_rng_(DeriveSeed(seed, "odometry")),
      fix_rng_(DeriveSeed(seed, "absloc")) {
  config_.Validate();
  params_.Validate();
  if (world::CollisionCheck(*grid_, episode.start.position(), config_.robot_radius)) {
    throw InvalidArgument("episode " + episode.id + ": start pose is in collision");
  }
  auto inflated = std::make_shared<const world::InflatedGrid>(grid_, config_.robot_radius);
  try {
    field_ = std::make_shared<const world::GeodesicField>(inflated, episode.goal);
  } catch (const InvalidArgument&) {
    throw Infeasible("episode " + episode.id + ": goal lies inside an obstacle");
  }
  geodesic_ = field_->At(episode.start.position());
  if (!std::isfinite(geodesic_)) {
    throw Infeasible("episode " + episode.id + ": goal unreachable from start");
  }

  state_.x = episode.start.x;
  state_.y = episode.start.y;
  state_.theta = NormalizeAngle(episode.start.theta);
  odom_est_ = {state_.x, state_.y, state_.theta, true};
  absloc_est_ = noise::SampleAbsFix(state_.pose(), config_.absloc_noise, fix_rng_);
  fix_countdown_ = noise::NextFixDelay(config_.absloc_noise, fix_rng_);
  recent_positions_.push_back(state_.pose().position());
  observation_ = Render();
}

std::optional<VelocityCommand> Simulator::CheckRecovery() {
  const VelocityCommand reverse{config_.recovery_speed, 0.0};
  if (done_) return std::nullopt;
  if (recovery_left_ > 0) return reverse;
  const int window = config_.RecoveryBlockSteps();
  if (static_cast<int>(recent_positions_.size()) < window + 1) return std::nullopt;
  const bool hit = std::any_of(recent_collisions_.begin(), recent_collisions_.end(),
                               [](bool c) { return c; });
  if (!hit) return std::nullopt;
  const Vec2 now = recent_positions_.back();
  for (const Vec2& p : recent_positions_) {
    if (Distance(p, now) >= config_.recovery_min_motion) return std::nullopt;
  }
  recovery_left_ = config_.RecoverySteps();
  return reverse;
}

dynamics::WindowResult Simulator::IntegrateWithCollisions(
    const world::OccupancyGrid& grid, const MotionState& state,
    const VelocityCommand& cmd, const dynamics::SecondOrderParams& params,
    const dynamics::PhysicsConfig& physics, double robot_radius, bool* collided) {
  dynamics::WindowResult out;
  out.final_state = state;
  const int k = physics.SubstepsPerStep();
  const double dt = physics.Dt();
  bool any = false;
  for (int i = 0; i < k; ++i) {
    MotionState next = dynamics::Substep(out.final_state, cmd, params, dt);
    if (world::CollisionCheck(grid, {next.x, next.y}, robot_radius)) {
      next.x = out.final_state.x;
      next.y = out.final_state.y;
      next.v = 0.0;
      next.v_dot = 0.0;
      any = true;
    }
    out.trace.push_back(next);
    out.final_state = next;
  }
  if (collided != nullptr) *collided = any;
  return out;
}

StepOutcome Simulator::Step(int action) {
  if (done_) throw InvalidArgument("episode " + episode_.id + " is already done");
  const std::optional<VelocityCommand> forced = CheckRecovery();
  VelocityCommand cmd;
  int applied_action = kNoAction;
  if (forced) {
    cmd = *forced;
  } else {
    cmd = ActionToCommand(action);
    applied_action = action;
  }

  const MotionState before = state_;
  bool collided = false;
  const dynamics::WindowResult window = IntegrateWithCollisions(
      *grid_, before, cmd, params_, config_.physics, config_.robot_radius, &collided);
  Vec2 last = before.pose().position();
  for (const MotionState& s : window.trace) {
    path_length_ += Distance(last, {s.x, s.y});
    last = {s.x, s.y};
  }
  state_ = window.final_state;
  ++steps_;

  odom_est_ = noise::IntegrateOdometry(
      odom_est_, noise::StepBetween(before.pose(), state_.pose()), odom_noise_, odom_rng_);
  ++absloc_age_;
  if (--fix_countdown_ <= 0) {
    absloc_est_ = noise::SampleAbsFix(state_.pose(), config_.absloc_noise, fix_rng_);
    absloc_age_ = 0;
    fix_countdown_ = noise::NextFixDelay(config_.absloc_noise, fix_rng_);
  }

  const double geo_prev = geodesic_;
  const double geo_now = field_->At(state_.pose().position());
  const double progress = std::isfinite(geo_now) && std::isfinite(geo_prev) ? geo_now - geo_prev : 0.0;
  if (std::isfinite(geo_now)) geodesic_ = geo_now;

  stop_streak_ = applied_action == kStopAction ? stop_streak_ + 1 : 0;
  const double to_goal = Distance(state_.pose().position(), episode_.goal);
  success_ = to_goal < config_.success_radius && stop_streak_ >= config_.success_hold &&
             std::abs(state_.v) < config_.success_speed_linear &&
             std::abs(state_.w) < config_.success_speed_angular;
  if (collided) ++collisions_;
  const double reward = (success_ ? config_.reward_success : 0.0) - progress -
                        config_.slack_cost - (collided ? config_.collision_cost : 0.0);
  done_ = success_ || steps_ >= config_.max_steps;

  const int window_steps = config_.RecoveryBlockSteps();
  if (forced) {
    if (--recovery_left_ == 0) {
      recent_positions_.clear();
      recent_collisions_.clear();
      recent_positions_.push_back(state_.pose().position());
    }
  } else {
    recent_positions_.push_back(state_.pose().position());
    recent_collisions_.push_back(collided);
    while (static_cast<int>(recent_positions_.size()) > window_steps + 1) {
      recent_positions_.pop_front();
    }
    while (static_cast<int>(recent_collisions_.size()) > window_steps) {
      recent_collisions_.pop_front();
    }
  }

  prev_action_ = applied_action;
  prev_command_ = cmd;
  prev_collided_ = collided;
  observation_ = Render();

  StepOutcome out;
  out.observation = observation_;
  out.reward = reward;
  out.done = done_;
  out.info = {collided, success_, forced.has_value(), geodesic_, state_.pose(), time()};
  return out;
}

Observation Simulator::Render() const {
  Observation obs;
  const Pose2 pose = state_.pose();
  obs.scan = world::SimulateLidar(*grid_, pose, scanfuse::kNumBins, config_.lidar_max_range);
  obs.odom_est = odom_est_;
  obs.absloc_est = absloc_est_;
  obs.absloc_age = absloc_age_;
  obs.goal_static = ToPolar(episode_.start, episode_.goal);
  obs.goal_dynamic = ToPolar(absloc_est_.pose(), episode_.goal);
  obs.goal_absolute = episode_.goal;
  obs.prev_action = prev_action_;
  obs.prev_command = prev_command_;
  obs.collided = prev_collided_;
  obs.gt_goal_compass = ToPolar(pose, episode_.goal);
  return obs;
}

EpisodeRun RunEpisode(std::shared_ptr<const world::OccupancyGrid> grid,
                      const world::Episode& episode, Policy& policy,
                      const dynamics::SecondOrderParams& params,
                      const SimConfig& config, std::uint64_t seed) {
  Simulator sim(grid, episode, params, config, seed);
  policy.Reset({grid, episode.start, episode.goal, params, config});

  EpisodeRun run;
  run.trace.push_back({0.0, sim.state(), kNoAction, {}, 0.0, false});
  while (!sim.done()) {
    const int action =
        sim.CheckRecovery() ? kNoAction : policy.Act(sim.observation(), sim.state());
    const StepOutcome out = sim.Step(action);
    run.trace.push_back({sim.time(), sim.state(), out.observation.prev_action,
                         out.observation.prev_command, out.reward, out.info.collided});
  }

  metrics::EpisodeResult& r = run.result;
  r.episode_id = episode.id;
  r.success = sim.success();
  r.path_length = sim.path_length();
  r.completion_time = sim.time();
  r.collisions = sim.collisions();
  const std::vector<Vec2> path = world::ShortestPath(*sim.field(), episode.start.position());
  r.shortest_length = world::PathLength(path);
  r.t_star = metrics::TimeLowerBound(path, params);
  return run;
}

std::string FormatTrace(const std::vector<TraceRow>& trace) {
  std::string out = "t,x,y,theta,v,w,action,reward,collided,v_cmd,w_cmd\n";
  for (const TraceRow& row : trace) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", row.t, row.state.x, row.state.y,
                       row.state.theta, row.state.v, row.state.w, row.action, row.reward,
                       row.collided ? 1 : 0, row.command.v_star, row.command.w_star);
  }
  return out;
}

}  // namespace kinonav::sim
