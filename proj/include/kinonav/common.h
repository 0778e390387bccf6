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

#ifndef KINONAV_COMMON_H_
#define KINONAV_COMMON_H_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kinonav {

inline constexpr double kPi = std::numbers::pi;

// Error hierarchy. The CLI maps each kind onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed something that violates a precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed input file or data that cannot be used.
class DataError : public Error {
 public:
  using Error::Error;
};

// The request is well-formed but cannot be satisfied (unreachable goal,
// unidentifiable regime, ...).
class Infeasible : public Error {
 public:
  using Error::Error;
};

// Wraps to (-pi, pi].
inline double NormalizeAngle(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
  double Norm() const { return std::hypot(x, y); }
};

inline double Distance(Vec2 a, Vec2 b) { return (a - b).Norm(); }

// Planar rigid pose (position + heading).
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const Pose2&, const Pose2&) = default;
};

// Maps a point expressed in `frame` into the parent frame.
inline Vec2 TransformPoint(const Pose2& frame, Vec2 p) {
  const double c = std::cos(frame.theta);
  const double s = std::sin(frame.theta);
  return {frame.x + c * p.x - s * p.y, frame.y + s * p.x + c * p.y};
}

// Expresses a parent-frame point in `frame` coordinates.
inline Vec2 InverseTransformPoint(const Pose2& frame, Vec2 p) {
  const double c = std::cos(frame.theta);
  const double s = std::sin(frame.theta);
  const double dx = p.x - frame.x;
  const double dy = p.y - frame.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

// Goal in polar form relative to some reference pose, encoded as
// (rho, cos(phi), sin(phi)).
struct PolarGoal {
  double rho = 0.0;
  double cos_phi = 1.0;
  double sin_phi = 0.0;

  double phi() const { return std::atan2(sin_phi, cos_phi); }
};

inline PolarGoal ToPolar(const Pose2& reference, Vec2 goal) {
  const Vec2 local = InverseTransformPoint(reference, goal);
  const double rho = local.Norm();
  if (rho == 0.0) return {0.0, 1.0, 0.0};
  return {rho, local.x / rho, local.y / rho};
}

// Seeds are derived, never drawn from wall-clock entropy. Each consumer gets
// a named sub-stream so adding one consumer does not perturb the others.
std::uint64_t DeriveSeed(std::uint64_t master, std::string_view stream,
                         std::uint64_t index = 0);

}  // namespace kinonav

#endif  // KINONAV_COMMON_H_
