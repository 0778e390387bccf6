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

// Localization noise: drifting odometry and drift-free absolute fixes that
// arrive at an irregular period.

#ifndef KINONAV_NOISE_H_
#define KINONAV_NOISE_H_

#include <array>
#include <cmath>
#include <random>

#include "kinonav/common.h"

namespace kinonav::noise {

using Rng = std::mt19937_64;

// Per-step (forward, heading) perturbation ~ N(mean, cov).
struct OdomNoiseParams {
  std::array<double, 2> mean = {0.01, 0.0};
  std::array<std::array<double, 2>, 2> cov = {{{1e-4, 1e-4}, {1e-4, 1e-3}}};
};

// Absolute fixes: ground truth plus N(0, diag(sigma^2)), refreshed every
// U{period_lo..period_hi} decision steps.
struct AbsLocNoiseParams {
  std::array<double, 3> sigma = {std::sqrt(0.03), std::sqrt(0.03),
                                 std::sqrt(0.05)};
  int period_lo = 8;
  int period_hi = 12;

  void Validate() const;
};

struct PoseEstimate {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  bool valid = true;

  Pose2 pose() const { return {x, y, theta}; }
};

// Motion between two consecutive poses, in the robot frame.
struct OdomStep {
  double forward = 0.0;  // signed chord length, m
  double dtheta = 0.0;   // rad
};

OdomStep StepBetween(const Pose2& from, const Pose2& to);

class OdometryNoise {
 public:
  // Throws InvalidArgument unless cov is symmetric positive semi-definite.
  explicit OdometryNoise(const OdomNoiseParams& params = {});

  // One (eps_forward, eps_theta) draw.
  std::array<double, 2> Sample(Rng& rng) const;

  const OdomNoiseParams& params() const { return params_; }

 private:
  OdomNoiseParams params_;
  // Lower-triangular factor of cov.
  double l00_ = 0.0;
  double l10_ = 0.0;
  double l11_ = 0.0;
};

// Composes the perturbed step onto `prev`. The translation is applied along
// the mid-step heading, which is exact for constant-curvature motion.
PoseEstimate IntegrateOdometry(const PoseEstimate& prev, const OdomStep& step,
                               const OdometryNoise& noise, Rng& rng);

PoseEstimate SampleAbsFix(const Pose2& true_pose, const AbsLocNoiseParams& params,
                          Rng& rng);

// Inclusive integer uniform over [period_lo, period_hi].
int NextFixDelay(const AbsLocNoiseParams& params, Rng& rng);

}  // namespace kinonav::noise

#endif  // KINONAV_NOISE_H_
