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

#include "kinonav/policy.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "kinonav/action_space.h"

namespace kinonav::policy {

using dynamics::MotionState;

void MpcConfig::Validate() const {
  if (horizon < 1 || horizon > 2) throw InvalidArgument("mpc horizon must be 1 or 2");
  if (!(waypoint_lookahead > 0.0) || !(baseline_lookahead > 0.0)) {
    throw InvalidArgument("carrot lookahead must be > 0");
  }
  if (w_dist < 0.0 || w_heading < 0.0 || w_collision < 0.0 || w_clearance < 0.0 ||
      clearance_margin < 0.0 || plan_margin < 0.0 || w_path < 0.0) {
    throw InvalidArgument("mpc weights must be >= 0");
  }
  if (replan_period < 1) throw InvalidArgument("replan_period must be >= 1");
  if (!(stop_fraction > 0.0)) throw InvalidArgument("stop_fraction must be > 0");
  if (coast_windows < 0) throw InvalidArgument("coast_windows must be >= 0");
  if (stuck_steps < 1 || !(stuck_motion > 0.0)) {
    throw InvalidArgument("stuck detection needs stuck_steps >= 1 and stuck_motion > 0");
  }
  if (escape_horizon < 1 || escape_horizon > 3) {
    throw InvalidArgument("escape_horizon must be in [1, 3]");
  }
}

PoseFilter::PoseFilter(const noise::OdomNoiseParams& odom,
                       const noise::AbsLocNoiseParams& fix)
    : odom_(odom) {
  fix_cov_ = Eigen::Vector3d(fix.sigma[0] * fix.sigma[0], fix.sigma[1] * fix.sigma[1],
                             fix.sigma[2] * fix.sigma[2])
                 .asDiagonal();
  Reset({});
}

void PoseFilter::Reset(const Pose2& start, double initial_variance) {
  mean_ = {start.x, start.y, start.theta};
  cov_ = Eigen::Matrix3d::Identity() * initial_variance;
}

void PoseFilter::Predict(const noise::PoseEstimate& odom_prev,
                         const noise::PoseEstimate& odom_now) {
  const noise::OdomStep step = noise::StepBetween(odom_prev.pose(), odom_now.pose());
  const double forward = step.forward - odom_.mean[0];
  const double dtheta = step.dtheta - odom_.mean[1];
  const double heading = mean_(2) + 0.5 * dtheta;
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  mean_(0) += forward * c;
  mean_(1) += forward * s;
  mean_(2) = NormalizeAngle(mean_(2) + dtheta);

  Eigen::Matrix3d f = Eigen::Matrix3d::Identity();
  f(0, 2) = -forward * s;
  f(1, 2) = forward * c;
  Eigen::Matrix<double, 3, 2> g;
  g << c, -0.5 * forward * s, s, 0.5 * forward * c, 0.0, 1.0;
  Eigen::Matrix2d q;
  q << odom_.cov[0][0], odom_.cov[0][1], odom_.cov[1][0], odom_.cov[1][1];
  cov_ = f * cov_ * f.transpose() + g * q * g.transpose();
}

void PoseFilter::Correct(const noise::PoseEstimate& fix) {
  Eigen::Vector3d innovation(fix.x - mean_(0), fix.y - mean_(1),
                             NormalizeAngle(fix.theta - mean_(2)));
  const Eigen::Matrix3d gain = cov_ * (cov_ + fix_cov_).inverse();
  mean_ += gain * innovation;
  mean_(2) = NormalizeAngle(mean_(2));
  cov_ = (Eigen::Matrix3d::Identity() - gain) * cov_;
  cov_ = 0.5 * (cov_ + cov_.transpose());
}

void PathTracker::Reset(std::shared_ptr<const world::OccupancyGrid> grid,
                        double robot_radius, double margin, const Pose2& start,
                        Vec2 goal) {
  goal_ = goal;
  for (double radius : {robot_radius + margin, robot_radius}) {
    auto inflated = std::make_shared<const world::InflatedGrid>(grid, radius);
    if (!inflated->IsFree(goal) || !inflated->IsFree(start.position())) continue;
    auto field = std::make_shared<const world::GeodesicField>(inflated, goal);
    if (!std::isfinite(field->At(start.position()))) continue;
    field_ = std::move(field);
    path_ = world::ShortestPath(*field_, start.position());
    return;
  }
  throw Infeasible("goal unreachable from start");
}

void PathTracker::Replan(Vec2 position) {
  try {
    path_ = world::ShortestPath(*field_, position);
  } catch (const Infeasible&) {
    // Off the free space for the moment; keep following the old path.
  }
}

namespace {

struct PathProjection {
  std::size_t segment = 0;
  double t = 0.0;
  double distance = std::numeric_limits<double>::infinity();
};

// Closest point of a polyline with at least two vertices.
PathProjection Project(const std::vector<Vec2>& path, Vec2 position) {
  PathProjection best;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const Vec2 a = path[i];
    const Vec2 ab = path[i + 1] - a;
    const double len2 = ab.x * ab.x + ab.y * ab.y;
    double t = 0.0;
    if (len2 > 0.0) {
      const Vec2 ap = position - a;
      t = std::clamp((ap.x * ab.x + ap.y * ab.y) / len2, 0.0, 1.0);
    }
    const double d = Distance(position, a + t * ab);
    if (d < best.distance) best = {i, t, d};
  }
  return best;
}

}  // namespace

double PathTracker::DistanceToPath(Vec2 position) const {
  if (path_.size() < 2) return Distance(position, goal_);
  return Project(path_, position).distance;
}

PathTracker::Carrot PathTracker::CarrotFor(Vec2 position, double lookahead) const {
  if (path_.size() < 2) return {goal_, true};
  const PathProjection p = Project(path_, position);
  double remaining = lookahead;
  Vec2 from = path_[p.segment] + p.t * (path_[p.segment + 1] - path_[p.segment]);
  for (std::size_t i = p.segment + 1; i < path_.size(); ++i) {
    const double len = Distance(from, path_[i]);
    if (len >= remaining) {
      return {from + (remaining / len) * (path_[i] - from), false};
    }
    remaining -= len;
    from = path_[i];
  }
  return {goal_, true};
}

StateBelief::StateBelief(PoseSource source, const sim::SimConfig& config)
    : source_(source), filter_(config.odom_noise, config.absloc_noise) {}

void StateBelief::Reset(const sim::PolicyContext& context) {
  params_ = context.params;
  physics_ = context.config.physics;
  filter_ = PoseFilter(context.config.odom_noise, context.config.absloc_noise);
  velocity_model_ = {};
  first_ = true;
}

MotionState StateBelief::Update(const sim::Observation& obs, const MotionState& true_state) {
  if (source_ == PoseSource::kPrivileged) return true_state;
  if (first_) {
    filter_.Reset(obs.odom_est.pose());
    first_ = false;
  } else {
    filter_.Predict(last_odom_, obs.odom_est);
    velocity_model_ =
        dynamics::IntegrateWindow(velocity_model_, obs.prev_command, params_, physics_)
            .final_state;
    if (obs.collided) {
      velocity_model_.v = 0.0;
      velocity_model_.v_dot = 0.0;
    }
  }
  last_odom_ = obs.odom_est;
  if (obs.absloc_age == 0) filter_.Correct(obs.absloc_est);

  MotionState belief = velocity_model_;
  const Pose2 pose = filter_.pose();
  belief.x = pose.x;
  belief.y = pose.y;
  belief.theta = pose.theta;
  return belief;
}

MpcPolicy::MpcPolicy(const MpcConfig& config, PoseSource source)
    : config_(config), source_(source) {
  config_.Validate();
}

void MpcPolicy::Reset(const sim::PolicyContext& context) {
  context_ = context;
  clearance_ = std::make_unique<world::ClearanceMap>(
      *context.grid, context.config.robot_radius + config_.clearance_margin + 0.5);
  belief_ = std::make_unique<StateBelief>(source_, context.config);
  belief_->Reset(context);
  tracker_.Reset(context.grid, context.config.robot_radius, config_.plan_margin,
                 context.start, context.goal);
  since_replan_ = 0;
  recent_.clear();
}

MpcPolicy::Rollout MpcPolicy::Roll(const MotionState& state, int action) const {
  const dynamics::WindowResult window = dynamics::IntegrateWindow(
      state, sim::ActionToCommand(action), context_.params, context_.config.physics);
  double min_clearance = std::numeric_limits<double>::infinity();
  for (const MotionState& s : window.trace) {
    min_clearance = std::min(min_clearance, clearance_->At({s.x, s.y}));
  }
  return {window.final_state, min_clearance};
}

bool MpcPolicy::FirstWindowCollides(const MotionState& state, int action) const {
  const dynamics::WindowResult window = dynamics::IntegrateWindow(
      state, sim::ActionToCommand(action), context_.params, context_.config.physics);
  for (const MotionState& s : window.trace) {
    if (world::CollisionCheck(*context_.grid, {s.x, s.y}, context_.config.robot_radius)) {
      return true;
    }
  }
  return false;
}

double MpcPolicy::TerminalCost(const MotionState& end, double min_clearance,
                               const PathTracker::Carrot& carrot) const {
  const double radius = context_.config.robot_radius;
  double cost = 0.0;
  MotionState rest = end;
  if (carrot.is_goal) {
    for (int k = 0; k < config_.coast_windows; ++k) {
      const Rollout r = Roll(rest, sim::kStopAction);
      rest = r.end;
      min_clearance = std::min(min_clearance, r.min_clearance);
    }
    cost += config_.w_dist * Distance({rest.x, rest.y}, carrot.point);
  } else {
    const Vec2 to = carrot.point - Vec2{end.x, end.y};
    cost += config_.w_dist * to.Norm();
    if (to.Norm() > 1e-9) {
      cost += config_.w_heading *
              std::abs(NormalizeAngle(std::atan2(to.y, to.x) - end.theta));
    }
  }
  cost += config_.w_path * tracker_.DistanceToPath({end.x, end.y});
  if (min_clearance < radius) cost += config_.w_collision;
  cost += config_.w_clearance *
          std::max(0.0, config_.clearance_margin - (min_clearance - radius));
  return cost;
}

double MpcPolicy::SequenceCost(const MotionState& state, const std::vector<int>& actions,
                               const PathTracker::Carrot& carrot) const {
  if (actions.empty()) throw InvalidArgument("empty action sequence");
  MotionState s = state;
  double min_clearance = std::numeric_limits<double>::infinity();
  for (int a : actions) {
    const Rollout r = Roll(s, a);
    s = r.end;
    min_clearance = std::min(min_clearance, r.min_clearance);
  }
  double cost = TerminalCost(s, min_clearance, carrot);
  if (FirstWindowCollides(state, actions.front())) cost += config_.w_collision;
  return cost;
}

double MpcPolicy::BestTail(const MotionState& state, double min_clearance, int depth,
                           const PathTracker::Carrot& carrot) const {
  if (depth == 0) return TerminalCost(state, min_clearance, carrot);
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < sim::kNumActions; ++a) {
    const Rollout r = Roll(state, a);
    best = std::min(best, BestTail(r.end, std::min(min_clearance, r.min_clearance),
                                   depth - 1, carrot));
  }
  return best;
}

int MpcPolicy::Plan(const MotionState& state, const PathTracker::Carrot& carrot,
                    int horizon) const {
  if (horizon < 1) horizon = config_.horizon;
  std::array<bool, sim::kNumActions> blocked{};
  bool any_free = false;
  for (int a = 0; a < sim::kNumActions; ++a) {
    blocked[a] = FirstWindowCollides(state, a);
    any_free = any_free || !blocked[a];
  }
  int best_action = sim::kStopAction;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int a = 0; a < sim::kNumActions; ++a) {
    if (any_free && blocked[a]) continue;
    const Rollout first = Roll(state, a);
    const double cost = BestTail(first.end, first.min_clearance, horizon - 1, carrot) +
                        (blocked[a] ? config_.w_collision : 0.0);
    if (cost < best_cost) {
      best_cost = cost;
      best_action = a;
    }
  }
  return best_action;
}

int MpcPolicy::Act(const sim::Observation& observation, const MotionState& true_state) {
  if (!clearance_) throw InvalidArgument("policy used before Reset()");
  const MotionState state = belief_->Update(observation, true_state);
  const Vec2 position{state.x, state.y};
  if (++since_replan_ >= config_.replan_period) {
    tracker_.Replan(position);
    since_replan_ = 0;
  }
  if (Distance(position, context_.goal) <
      config_.stop_fraction * context_.config.success_radius) {
    recent_.clear();
    return sim::kStopAction;
  }
  recent_.push_back(position);
  if (static_cast<int>(recent_.size()) > config_.stuck_steps + 1) recent_.pop_front();
  bool stuck = static_cast<int>(recent_.size()) > config_.stuck_steps;
  for (const Vec2& p : recent_) {
    stuck = stuck && Distance(p, position) < config_.stuck_motion;
  }
  const int horizon = stuck ? std::max(config_.horizon, config_.escape_horizon) : config_.horizon;
  return Plan(state, tracker_.CarrotFor(position, config_.waypoint_lookahead), horizon);
}

RotateThenGoPolicy::RotateThenGoPolicy(const MpcConfig& config, PoseSource source)
    : config_(config), source_(source) {
  config_.Validate();
}

void RotateThenGoPolicy::Reset(const sim::PolicyContext& context) {
  context_ = context;
  belief_ = std::make_unique<StateBelief>(source_, context.config);
  belief_->Reset(context);
  tracker_.Reset(context.grid, context.config.robot_radius, config_.plan_margin,
                 context.start, context.goal);
  since_replan_ = 0;
}

int RotateThenGoPolicy::Decide(double heading_error) {
  const int turn_left = 4;   // <0, +1>
  const int turn_right = 2;  // <0, -1>
  const int creep = 10;      // <0.3, 0>
  if (std::abs(heading_error) > kTurnThreshold) {
    return heading_error > 0.0 ? turn_left : turn_right;
  }
  return creep;
}

int RotateThenGoPolicy::Act(const sim::Observation& observation,
                            const MotionState& true_state) {
  if (!belief_) throw InvalidArgument("policy used before Reset()");
  const MotionState state = belief_->Update(observation, true_state);
  const Vec2 position{state.x, state.y};
  if (++since_replan_ >= config_.replan_period) {
    tracker_.Replan(position);
    since_replan_ = 0;
  }
  if (Distance(position, context_.goal) <
      config_.stop_fraction * context_.config.success_radius) {
    return sim::kStopAction;
  }
  const Vec2 to = tracker_.CarrotFor(position, config_.baseline_lookahead).point - position;
  return Decide(NormalizeAngle(std::atan2(to.y, to.x) - state.theta));
}

std::unique_ptr<sim::Policy> MakePolicy(const std::string& name, const MpcConfig& config,
                                        PoseSource source) {
  if (name == "mpc") return std::make_unique<MpcPolicy>(config, source);
  if (name == "rotate_then_go") return std::make_unique<RotateThenGoPolicy>(config, source);
  throw InvalidArgument("unknown policy '" + name + "' (expected mpc or rotate_then_go)");
}

}  // namespace kinonav::policy
