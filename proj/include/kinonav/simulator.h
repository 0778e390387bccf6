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

// Decision-rate navigation episode: discrete velocity actions are integrated
// through the physics loop with collision handling, localization noise
// advances, and the reward, success and recovery logic run once per step.
//
// Timing contract: the observation returned by Step() is rendered from the
// state at the end of the window and is the one the policy sees when
// choosing the next action, which is then applied from that same state.

#ifndef KINONAV_SIMULATOR_H_
#define KINONAV_SIMULATOR_H_

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kinonav/action_space.h"
#include "kinonav/common.h"
#include "kinonav/dynamics.h"
#include "kinonav/metrics.h"
#include "kinonav/noise.h"
#include "kinonav/world.h"

namespace kinonav::sim {

struct SimConfig {
  dynamics::PhysicsConfig physics;
  double success_radius = 0.2;        // m
  double success_speed_linear = 0.02;  // m/s
  double success_speed_angular = 0.05;  // rad/s
  int success_hold = 3;               // consecutive stop actions
  double reward_success = 2.5;
  double slack_cost = 0.01;
  double collision_cost = 0.1;
  int max_steps = 500;
  double recovery_block_time = 5.0;   // s
  double recovery_min_motion = 0.05;  // m
  double recovery_speed = -0.2;       // m/s
  double recovery_duration = 2.0;     // s
  double robot_radius = world::kDefaultRobotRadius;
  double lidar_max_range = world::kDefaultMaxRange;
  noise::OdomNoiseParams odom_noise;
  noise::AbsLocNoiseParams absloc_noise;

  void Validate() const;
  // Decision steps spanned by the blocking window and the recovery manoeuvre.
  int RecoveryBlockSteps() const;
  int RecoverySteps() const;
};

struct Observation {
  std::vector<double> scan;          // 180 ranges around the robot
  noise::PoseEstimate odom_est;      // dead reckoning, world frame
  noise::PoseEstimate absloc_est;    // last absolute fix, held
  int absloc_age = 0;                // decision steps since that fix
  PolarGoal goal_static;             // w.r.t. the start pose, constant
  PolarGoal goal_dynamic;            // w.r.t. absloc_est
  Vec2 goal_absolute;                // world frame
  int prev_action = kNoAction;
  dynamics::VelocityCommand prev_command;  // as actually applied
  bool collided = false;             // during the previous step
  PolarGoal gt_goal_compass;         // w.r.t. the true pose; training only
};

struct StepInfo {
  bool collided = false;
  bool success = false;
  bool forced = false;  // the command came from the recovery behaviour
  double geodesic = 0.0;
  Pose2 true_pose;
  double time = 0.0;  // s since episode start
};

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

class Simulator {
 public:
  // Throws Infeasible when the goal cannot be reached from the start and
  // InvalidArgument when the start is in collision.
  Simulator(std::shared_ptr<const world::OccupancyGrid> grid,
            const world::Episode& episode, const dynamics::SecondOrderParams& params,
            const SimConfig& config, std::uint64_t seed);

  const Observation& observation() const { return observation_; }
  const dynamics::MotionState& state() const { return state_; }
  const SimConfig& config() const { return config_; }
  bool done() const { return done_; }
  bool success() const { return success_; }
  int steps() const { return steps_; }
  double time() const { return steps_ / config_.physics.decision_hz; }
  int collisions() const { return collisions_; }
  double path_length() const { return path_length_; }
  double geodesic() const { return geodesic_; }
  // Geodesic distance to the goal over the inflated grid.
  const std::shared_ptr<const world::GeodesicField>& field() const { return field_; }

  // The recovery command for the coming step, if the blocked condition was
  // met or a recovery is already under way. Arms the recovery on trigger.
  std::optional<dynamics::VelocityCommand> CheckRecovery();
  bool InRecovery() const { return recovery_left_ > 0; }

  // Applies `action`, or the recovery command while a recovery is active
  // (the action is then ignored and may be kNoAction). Throws
  // InvalidArgument once the episode is done.
  StepOutcome Step(int action);

  // Physics window with per-substep collision handling: a colliding
  // substep keeps the old position and zeroes the linear velocity and
  // acceleration while rotation continues.
  static dynamics::WindowResult IntegrateWithCollisions(
      const world::OccupancyGrid& grid, const dynamics::MotionState& state,
      const dynamics::VelocityCommand& cmd, const dynamics::SecondOrderParams& params,
      const dynamics::PhysicsConfig& physics, double robot_radius, bool* collided);

 private:
  Observation Render() const;

  std::shared_ptr<const world::OccupancyGrid> grid_;
  std::shared_ptr<const world::GeodesicField> field_;
  world::Episode episode_;
  dynamics::SecondOrderParams params_;
  SimConfig config_;
  noise::OdometryNoise odom_noise_;
  noise::Rng odom_rng_;
  noise::Rng fix_rng_;

  dynamics::MotionState state_;
  noise::PoseEstimate odom_est_;
  noise::PoseEstimate absloc_est_;
  int absloc_age_ = 0;
  int fix_countdown_ = 0;
  Observation observation_;
  int prev_action_ = kNoAction;
  dynamics::VelocityCommand prev_command_;
  bool prev_collided_ = false;

  int steps_ = 0;
  int collisions_ = 0;
  int stop_streak_ = 0;
  double path_length_ = 0.0;
  double geodesic_ = 0.0;
  bool done_ = false;
  bool success_ = false;

  // Positions after each step since the last recovery, and matching
  // collision flags, for the blocked-robot check.
  std::deque<Vec2> recent_positions_;
  std::deque<bool> recent_collisions_;
  int recovery_left_ = 0;
};

// What a policy may know before the first step. The grid and true state are
// privileged; a policy limited to onboard sensing uses only observations.
struct PolicyContext {
  std::shared_ptr<const world::OccupancyGrid> grid;
  Pose2 start;
  Vec2 goal;
  dynamics::SecondOrderParams params;
  SimConfig config;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  // Throws Infeasible when no path to the goal exists.
  virtual void Reset(const PolicyContext& context) = 0;
  virtual int Act(const Observation& observation,
                  const dynamics::MotionState& true_state) = 0;
};

// One row per decision step; row 0 is the initial state. The command is the
// one applied over the step that ends at `t`.
struct TraceRow {
  double t = 0.0;
  dynamics::MotionState state;
  int action = kNoAction;
  dynamics::VelocityCommand command;
  double reward = 0.0;
  bool collided = false;
};

struct EpisodeRun {
  metrics::EpisodeResult result;
  std::vector<TraceRow> trace;
};

// Runs `policy` until success or max_steps. Deterministic for
// (episode, policy, seed).
EpisodeRun RunEpisode(std::shared_ptr<const world::OccupancyGrid> grid,
                      const world::Episode& episode, Policy& policy,
                      const dynamics::SecondOrderParams& params,
                      const SimConfig& config, std::uint64_t seed);

// CSV with header t,x,y,theta,v,w,action,reward,collided,v_cmd,w_cmd and
// round-trip precision.
std::string FormatTrace(const std::vector<TraceRow>& trace);

}  // namespace kinonav::sim

#endif  // KINONAV_SIMULATOR_H_
