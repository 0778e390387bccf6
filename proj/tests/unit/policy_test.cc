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

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

namespace kinonav::policy {
namespace {

std::shared_ptr<const world::OccupancyGrid> Room() {
  auto g = std::make_shared<world::OccupancyGrid>(120, 80, 0.05);
  g->FillRect({0, 0}, {6.0, 0.1});
  g->FillRect({0, 3.9}, {6.0, 4.0});
  g->FillRect({0, 0}, {0.1, 4.0});
  g->FillRect({5.9, 0}, {6.0, 4.0});
  g->FillRect({2.8, 0.1}, {3.2, 2.6});  // partition with a gap at the top
  return g;
}

sim::PolicyContext Context(std::shared_ptr<const world::OccupancyGrid> grid, Pose2 start,
                           Vec2 goal) {
  return {std::move(grid), start, goal, dynamics::DefaultParams(), {}};
}

TEST(MpcConfigTest, Validation) {
  EXPECT_NO_THROW(MpcConfig{}.Validate());
  MpcConfig c;
  c.horizon = 3;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = {};
  c.escape_horizon = 0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  EXPECT_THROW(MpcPolicy{c}, InvalidArgument);
}

TEST(MakePolicyTest, Names) {
  EXPECT_EQ(MakePolicy("mpc", {}, PoseSource::kPrivileged)->name(), "mpc");
  EXPECT_EQ(MakePolicy("rotate_then_go", {}, PoseSource::kNoisy)->name(), "rotate_then_go");
  EXPECT_THROW(MakePolicy("greedy", {}, PoseSource::kPrivileged), InvalidArgument);
}

TEST(RotateThenGoTest, DecideThresholds) {
  const double t = RotateThenGoPolicy::kTurnThreshold;
  EXPECT_NEAR(t, 15.0 * kPi / 180, 1e-15);
  EXPECT_EQ(RotateThenGoPolicy::Decide(0.0), 10);
  EXPECT_EQ(RotateThenGoPolicy::Decide(t * 0.99), 10);
  EXPECT_EQ(RotateThenGoPolicy::Decide(-t * 0.99), 10);
  EXPECT_EQ(RotateThenGoPolicy::Decide(t * 1.01), 4);
  EXPECT_EQ(RotateThenGoPolicy::Decide(-t * 1.01), 2);
  EXPECT_EQ(sim::ActionToCommand(10).v_star, 0.3);
  EXPECT_EQ(sim::ActionToCommand(4).w_star, 1.0);
  EXPECT_EQ(sim::ActionToCommand(2).w_star, -1.0);
}

TEST(PathTrackerTest, CarrotAlongStraightPath) {
  auto g = std::make_shared<const world::OccupancyGrid>(120, 80, 0.05);
  PathTracker tracker;
  tracker.Reset(g, 0.3, 0.1, {1.0, 2.0, 0.0}, {5.0, 2.0});
  ASSERT_EQ(tracker.path().size(), 2u);
  const auto c = tracker.CarrotFor({2.0, 2.3}, 0.8);
  EXPECT_NEAR(c.point.x, 2.8, 1e-9);
  EXPECT_NEAR(c.point.y, 2.0, 1e-9);
  EXPECT_FALSE(c.is_goal);
  EXPECT_TRUE(tracker.CarrotFor({4.5, 2.0}, 0.8).is_goal);
  EXPECT_NEAR(tracker.DistanceToPath({2.0, 2.3}), 0.3, 1e-9);
  EXPECT_NEAR(tracker.DistanceToPath({0.0, 2.0}), 1.0, 1e-9);
}

TEST(PathTrackerTest, FallsBackToRobotRadiusAndReportsInfeasible) {
  // Door 0.7 m wide passes a 0.3 m robot but not with a 0.1 m margin.
  auto g = std::make_shared<world::OccupancyGrid>(120, 80, 0.05);
  g->FillRect({2.9, 0.0}, {3.1, 1.65});
  g->FillRect({2.9, 2.35}, {3.1, 4.0});
  PathTracker tracker;
  EXPECT_NO_THROW(tracker.Reset(g, 0.3, 0.1, {1.0, 2.0, 0.0}, {5.0, 2.0}));
  EXPECT_GE(tracker.path().size(), 2u);
  g->FillRect({2.9, 1.6}, {3.1, 2.4});
  EXPECT_THROW(tracker.Reset(g, 0.3, 0.1, {1.0, 2.0, 0.0}, {5.0, 2.0}), Infeasible);
}

// Plan returns a first action whose best continuation attains the minimum
// SequenceCost over all admissible two-step sequences.
TEST(MpcPolicyTest, PlanIsExhaustiveArgmin) {
  const auto grid = Room();
  MpcPolicy mpc;
  mpc.Reset(Context(grid, {1.0, 1.0, 0.3}, {5.0, 1.0}));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> x(0.5, 5.5), y(0.5, 3.5), th(-kPi, kPi), v(0.0, 1.0),
      w(-1.5, 1.5);
  int checked = 0;
  while (checked < 6) {
    dynamics::MotionState s;
    s.x = x(rng);
    s.y = y(rng);
    if (world::CollisionCheck(*grid, {s.x, s.y}, 0.3)) continue;
    s.theta = th(rng);
    s.v = v(rng);
    s.w = w(rng);
    const PathTracker::Carrot carrot = {{5.0, 1.0}, checked % 2 == 0};
    std::array<bool, sim::kNumActions> admissible{};
    bool any_free = false;
    for (int a = 0; a < sim::kNumActions; ++a) {
      admissible[a] = !mpc.FirstWindowCollides(s, a);
      any_free = any_free || admissible[a];
    }
    double best = std::numeric_limits<double>::infinity();
    std::array<double, sim::kNumActions> best_by_first;
    best_by_first.fill(std::numeric_limits<double>::infinity());
    for (int a = 0; a < sim::kNumActions; ++a) {
      if (any_free && !admissible[a]) continue;
      for (int b = 0; b < sim::kNumActions; ++b) {
        const double c = mpc.SequenceCost(s, {a, b}, carrot);
        best_by_first[a] = std::min(best_by_first[a], c);
      }
      best = std::min(best, best_by_first[a]);
    }
    const int chosen = mpc.Plan(s, carrot, 2);
    EXPECT_TRUE(!any_free || admissible[chosen]);
    EXPECT_NEAR(best_by_first[chosen], best, 1e-9) << "state " << checked;
    ++checked;
  }
}

// Independent check of first-window feasibility against the grid.
TEST(MpcPolicyTest, FirstWindowFeasibility) {
  const auto grid = Room();
  MpcPolicy mpc;
  mpc.Reset(Context(grid, {1.0, 1.0, 0.0}, {5.0, 1.0}));
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> x(0.35, 5.65), y(0.35, 3.65), th(-kPi, kPi), v(0, 1);
  int near_walls = 0, checked = 0;
  while (checked < 200) {
    dynamics::MotionState s;
    s.x = x(rng);
    s.y = y(rng);
    if (world::CollisionCheck(*grid, {s.x, s.y}, 0.3)) continue;
    s.theta = th(rng);
    s.v = v(rng);
    ++checked;
    bool any_free = false;
    std::array<bool, sim::kNumActions> hits{};
    for (int a = 0; a < sim::kNumActions; ++a) {
      const auto window = dynamics::IntegrateWindow(s, sim::ActionToCommand(a),
                                                    dynamics::DefaultParams(), {});
      for (const auto& sub : window.trace) {
        hits[a] = hits[a] || world::CollisionCheck(*grid, {sub.x, sub.y}, 0.3);
      }
      ASSERT_EQ(mpc.FirstWindowCollides(s, a), hits[a]);
      any_free = any_free || !hits[a];
    }
    near_walls += std::count(hits.begin(), hits.end(), true) > 0;
    const int chosen = mpc.Plan(s, {{5.0, 1.0}, false}, 1);
    if (any_free) ASSERT_FALSE(hits[chosen]) << "state " << checked;
  }
  EXPECT_GT(near_walls, 10);
}

TEST(MpcPolicyTest, StopsNearGoalAndRequiresReset) {
  MpcPolicy mpc;
  sim::Observation obs;
  EXPECT_THROW(mpc.Act(obs, {}), InvalidArgument);
  const auto grid = Room();
  mpc.Reset(Context(grid, {1.0, 1.0, 0.0}, {1.1, 1.0}));
  dynamics::MotionState s;
  s.x = 1.0;
  s.y = 1.0;
  EXPECT_EQ(mpc.Act(obs, s), sim::kStopAction);
}

TEST(MpcPolicyTest, ReachesGoalThroughDoorway) {
  const auto grid = Room();
  const world::Episode ep{"door", "room", {1.0, 1.0, 0.0}, {5.0, 1.0}, 0.0};
  for (const std::string name : {"mpc", "rotate_then_go"}) {
    auto policy = MakePolicy(name, {}, PoseSource::kPrivileged);
    const sim::EpisodeRun run =
        sim::RunEpisode(grid, ep, *policy, dynamics::DefaultParams(), {}, 1);
    EXPECT_TRUE(run.result.success) << name;
    EXPECT_GE(run.result.completion_time, run.result.t_star) << name;
    EXPECT_GE(run.result.path_length, Distance(ep.start.position(), ep.goal)) << name;
  }
}

// Diagonal covariances make each axis an independent scalar Kalman update.
TEST(PoseFilterTest, CorrectionMatchesScalarKalman) {
  noise::AbsLocNoiseParams fix;
  PoseFilter f({}, fix);
  const double prior = 0.02;
  f.Reset({1.0, 2.0, 0.5}, prior);
  f.Correct({1.3, 1.8, 0.9, true});
  const double rx = fix.sigma[0] * fix.sigma[0], rt = fix.sigma[2] * fix.sigma[2];
  EXPECT_NEAR(f.pose().x, 1.0 + prior / (prior + rx) * 0.3, 1e-12);
  EXPECT_NEAR(f.pose().y, 2.0 - prior / (prior + rx) * 0.2, 1e-12);
  EXPECT_NEAR(f.pose().theta, 0.5 + prior / (prior + rt) * 0.4, 1e-12);
  EXPECT_NEAR(f.covariance()(0, 0), prior * rx / (prior + rx), 1e-12);
  EXPECT_NEAR(f.covariance()(2, 2), prior * rt / (prior + rt), 1e-12);
  EXPECT_NEAR(f.covariance()(0, 1), 0.0, 1e-15);
}

TEST(PoseFilterTest, PredictionRemovesBiasAndGrowsCovariance) {
  noise::OdomNoiseParams odom;
  PoseFilter f(odom, {});
  f.Reset({0.0, 0.0, 0.0}, 0.0);
  // Odometry that only reports the known bias means no motion.
  f.Predict({0, 0, 0, true}, {odom.mean[0], 0, 0, true});
  EXPECT_NEAR(f.pose().x, 0.0, 1e-15);
  EXPECT_NEAR(f.covariance()(0, 0), odom.cov[0][0], 1e-15);
  EXPECT_NEAR(f.covariance()(2, 2), odom.cov[1][1], 1e-15);
  const double before = f.covariance().trace();
  f.Predict({0, 0, 0, true}, {0.5 + odom.mean[0], 0.0, 0.0, true});
  EXPECT_NEAR(f.pose().x, 0.5, 1e-12);
  EXPECT_GT(f.covariance().trace(), before);
  EXPECT_NEAR((f.covariance() - f.covariance().transpose()).norm(), 0.0, 1e-15);
}

// Fusing fixes beats dead reckoning on average over a long drive.
TEST(PoseFilterTest, FusionBeatsDeadReckoning) {
  const noise::OdomNoiseParams odom_params;
  const noise::AbsLocNoiseParams fix_params;
  const noise::OdometryNoise odom_noise(odom_params);
  double err_odom = 0.0, err_fused = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    noise::Rng rng(1000 + trial);
    Pose2 truth{0, 0, 0};
    noise::PoseEstimate odom{0, 0, 0, true};
    PoseFilter f(odom_params, fix_params);
    f.Reset(truth);
    for (int step = 0; step < 90; ++step) {
      const Vec2 ahead = TransformPoint(truth, {0.2, 0.0});
      const Pose2 next{ahead.x, ahead.y,
                       NormalizeAngle(truth.theta + (step % 20 < 10 ? 0.1 : -0.1))};
      const noise::PoseEstimate odom_next =
          noise::IntegrateOdometry(odom, noise::StepBetween(truth, next), odom_noise, rng);
      f.Predict(odom, odom_next);
      odom = odom_next;
      truth = next;
      if (step % 10 == 9) f.Correct(noise::SampleAbsFix(truth, fix_params, rng));
    }
    err_odom += Distance(odom.pose().position(), truth.position());
    err_fused += Distance(f.pose().position(), truth.position());
  }
  EXPECT_LT(err_fused, 0.5 * err_odom);
}

}  // namespace
}  // namespace kinonav::policy
