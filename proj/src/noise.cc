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

#include "kinonav/noise.h"

#include <algorithm>

namespace kinonav::noise {

void AbsLocNoiseParams::Validate() const {
  for (double s : sigma) {
    if (!(s >= 0.0)) throw InvalidArgument("absolute-fix sigmas must be >= 0");
  }
  if (period_lo < 1 || period_lo > period_hi) {
    throw InvalidArgument("need 1 <= period_lo <= period_hi");
  }
}

OdomStep StepBetween(const Pose2& from, const Pose2& to) {
  const double dtheta = NormalizeAngle(to.theta - from.theta);
  const double dx = to.x - from.x;
  const double dy = to.y - from.y;
  const double heading = from.theta + 0.5 * dtheta;
  const double along = dx * std::cos(heading) + dy * std::sin(heading);
  const double chord = std::hypot(dx, dy);
  return {along < 0.0 ? -chord : chord, dtheta};
}

OdometryNoise::OdometryNoise(const OdomNoiseParams& params) : params_(params) {
  const auto& c = params.cov;
  const double scale = std::max({std::abs(c[0][0]), std::abs(c[1][1]), 1e-300});
  if (std::abs(c[0][1] - c[1][0]) > 1e-12 * scale) {
    throw InvalidArgument("odometry covariance is not symmetric");
  }
  const double det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
  if (c[0][0] < 0.0 || c[1][1] < 0.0 || det < -1e-12 * scale * scale) {
    throw InvalidArgument("odometry covariance is not positive semi-definite");
  }
  l00_ = std::sqrt(c[0][0]);
  l10_ = l00_ > 0.0 ? c[1][0] / l00_ : 0.0;
  l11_ = std::sqrt(std::max(0.0, c[1][1] - l10_ * l10_));
}

std::array<double, 2> OdometryNoise::Sample(Rng& rng) const {
  std::normal_distribution<double> unit(0.0, 1.0);
  const double z0 = unit(rng);
  const double z1 = unit(rng);
  return {params_.mean[0] + l00_ * z0, params_.mean[1] + l10_ * z0 + l11_ * z1};
}

PoseEstimate IntegrateOdometry(const PoseEstimate& prev, const OdomStep& step,
                               const OdometryNoise& noise, Rng& rng) {
  const auto eps = noise.Sample(rng);
  const double forward = step.forward + eps[0];
  const double dtheta = step.dtheta + eps[1];
  const double heading = prev.theta + 0.5 * dtheta;
  PoseEstimate next;
  next.x = prev.x + forward * std::cos(heading);
  next.y = prev.y + forward * std::sin(heading);
  next.theta = NormalizeAngle(prev.theta + dtheta);
  next.valid = true;
  return next;
}

PoseEstimate SampleAbsFix(const Pose2& true_pose, const AbsLocNoiseParams& params,
                          Rng& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  PoseEstimate fix;
  fix.x = true_pose.x + params.sigma[0] * unit(rng);
  fix.y = true_pose.y + params.sigma[1] * unit(rng);
  fix.theta = NormalizeAngle(true_pose.theta + params.sigma[2] * unit(rng));
  fix.valid = true;
  return fix;
}

int NextFixDelay(const AbsLocNoiseParams& params, Rng& rng) {
  std::uniform_int_distribution<int> period(params.period_lo, params.period_hi);
  return period(rng);
}

}  // namespace kinonav::noise
