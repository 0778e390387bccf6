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

// Scripted navigation policies. Both follow a carrot point on the shortest
// path; MpcPolicy picks actions by exhaustive rollout of the motion model,
// RotateThenGoPolicy alternates turning in place and slow driving.

#ifndef KINONAV_POLICY_H_
#define KINONAV_POLICY_H_

#include <array>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kinonav/dynamics.h"
#include "kinonav/simulator.h"
#include "kinonav/world.h"

namespace kinonav::policy {

struct MpcConfig {
  int horizon = 2;  // decision steps, 1 or 2
  double waypoint_lookahead = 0.8;  // m
  // Carrot distance for the turn-in-place baseline, which cannot round
  // corners and so needs a closer target.
  double baseline_lookahead = 0.4;  // m
  double w_dist = 1.0;
  double w_heading = 0.3;
  double w_collision = 1e3;
  int replan_period = 5;  // steps
  // Stop once the goal is closer than this fraction of the success radius.
  double stop_fraction = 0.75;
  // Soft penalty for passing closer than robot_radius + clearance_margin.
  double clearance_margin = 0.1;  // m
  double w_clearance = 2.0;
  // Weight on the distance of the rollout end from the planned path.
  double w_path = 0.5;
  // Paths are planned for a robot this much larger when that keeps the goal
  // reachable, which centres them in doorways.
  double plan_margin = 0.1;  // m
  // Extra stop-action windows used to score where a rollout comes to rest
  // when the carrot is the goal itself.
  int coast_windows = 2;
  // After stuck_steps decisions within stuck_motion of the same spot, plan
  // with escape_horizon steps instead (turn-then-drive manoeuvres).
  int stuck_steps = 4;
  double stuck_motion = 0.03;  // m
  int escape_horizon = 3;

  void Validate() const;
};

// Where the policy takes its pose from.
enum class PoseSource {
  kPrivileged,  // true simulator state
  kNoisy,       // odometry and absolute fixes fused by PoseFilter
};

// Extended Kalman filter over (x, y, theta): odometry increments with their
// known bias removed drive the prediction, absolute fixes the correction.
class PoseFilter {
 public:
  PoseFilter(const noise::OdomNoiseParams& odom, const noise::AbsLocNoiseParams& fix);

  void Reset(const Pose2& start, double initial_variance = 1e-4);
  // Motion between two consecutive dead-reckoning estimates.
  void Predict(const noise::PoseEstimate& odom_prev,
               const noise::PoseEstimate& odom_now);
  void Correct(const noise::PoseEstimate& fix);

  Pose2 pose() const { return {mean_(0), mean_(1), mean_(2)}; }
  const Eigen::Matrix3d& covariance() const { return cov_; }

 private:
  noise::OdomNoiseParams odom_;
  Eigen::Matrix3d fix_cov_;
  Eigen::Vector3d mean_;
  Eigen::Matrix3d cov_;
};

// Shortest-path carrot following, shared by the policies.
class PathTracker {
 public:
  PathTracker() = default;
  // Plans for robot_radius + margin, or robot_radius alone when the margin
  // disconnects start and goal. Throws Infeasible when neither works.
  void Reset(std::shared_ptr<const world::OccupancyGrid> grid, double robot_radius,
             double margin, const Pose2& start, Vec2 goal);
  // Recomputes the path from `position` (kept if that fails).
  void Replan(Vec2 position);

  struct Carrot {
    Vec2 point;
    bool is_goal = false;
  };
  // Point `lookahead` metres past the closest point of the path.
  Carrot CarrotFor(Vec2 position, double lookahead) const;
  // Distance from `position` to the path polyline.
  double DistanceToPath(Vec2 position) const;

  const std::vector<Vec2>& path() const { return path_; }
  Vec2 goal() const { return goal_; }

 private:
  std::shared_ptr<const world::GeodesicField> field_;
  std::vector<Vec2> path_;
  Vec2 goal_;
};

// Pose and velocity belief maintained from either source.
class StateBelief {
 public:
  StateBelief(PoseSource source, const sim::SimConfig& config);
  void Reset(const sim::PolicyContext& context);
  // Folds in the newest observation; returns the state to plan from.
  dynamics::MotionState Update(const sim::Observation& obs,
                               const dynamics::MotionState& true_state);

 private:
  PoseSource source_;
  PoseFilter filter_;
  dynamics::SecondOrderParams params_;
  dynamics::PhysicsConfig physics_;
  noise::PoseEstimate last_odom_;
  dynamics::MotionState velocity_model_;
  bool first_ = true;
};

class MpcPolicy : public sim::Policy {
 public:
  explicit MpcPolicy(const MpcConfig& config = {},
                     PoseSource source = PoseSource::kPrivileged);

  std::string name() const override { return "mpc"; }
  void Reset(const sim::PolicyContext& context) override;
  int Act(const sim::Observation& observation,
          const dynamics::MotionState& true_state) override;

  // Exhaustive argmin over action sequences from `state`, without the stop
  // rule; horizon <= 0 uses the configured one. Requires Reset().
  int Plan(const dynamics::MotionState& state, const PathTracker::Carrot& carrot,
           int horizon = 0) const;
  // Cost of one action sequence (length horizon).
  double SequenceCost(const dynamics::MotionState& state, const std::vector<int>& actions,
                      const PathTracker::Carrot& carrot) const;
  // Exact disc-vs-grid check along the first window of `action`.
  bool FirstWindowCollides(const dynamics::MotionState& state, int action) const;

  const PathTracker& tracker() const { return tracker_; }

 private:
  struct Rollout {
    dynamics::MotionState end;
    double min_clearance;
  };
  Rollout Roll(const dynamics::MotionState& state, int action) const;
  double TerminalCost(const dynamics::MotionState& end, double min_clearance,
                      const PathTracker::Carrot& carrot) const;
  // Lowest cost over all `depth`-step continuations from `state`.
  double BestTail(const dynamics::MotionState& state, double min_clearance, int depth,
                  const PathTracker::Carrot& carrot) const;

  MpcConfig config_;
  PoseSource source_;
  sim::PolicyContext context_;
  std::unique_ptr<world::ClearanceMap> clearance_;
  std::unique_ptr<StateBelief> belief_;
  PathTracker tracker_;
  int since_replan_ = 0;
  std::deque<Vec2> recent_;
};

class RotateThenGoPolicy : public sim::Policy {
 public:
  explicit RotateThenGoPolicy(const MpcConfig& config = {},
                              PoseSource source = PoseSource::kPrivileged);

  std::string name() const override { return "rotate_then_go"; }
  void Reset(const sim::PolicyContext& context) override;
  int Act(const sim::Observation& observation,
          const dynamics::MotionState& true_state) override;

  // Heading error above which the policy turns in place.
  static constexpr double kTurnThreshold = 15.0 * kPi / 180.0;
  // Pure decision rule given the heading error to the carrot.
  static int Decide(double heading_error);

 private:
  MpcConfig config_;
  PoseSource source_;
  sim::PolicyContext context_;
  std::unique_ptr<StateBelief> belief_;
  PathTracker tracker_;
  int since_replan_ = 0;
};

// "mpc" or "rotate_then_go"; throws InvalidArgument otherwise.
std::unique_ptr<sim::Policy> MakePolicy(const std::string& name, const MpcConfig& config,
                                        PoseSource source);

}  // namespace kinonav::policy

#endif  // KINONAV_POLICY_H_
