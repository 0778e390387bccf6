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

// Asymmetric second-order motion model of a differential-drive robot and its
// fixed-step integrator.
//
// Each axis (linear, angular) tracks its velocity command through
//
//   vel_ddot = f^2 * (cmd - vel) - 2 * zeta * f * vel_dot
//
// where (f, zeta) switch between an acceleration and a deceleration regime
// depending on whether the velocity magnitude is growing toward the command.

#ifndef KINONAV_DYNAMICS_H_
#define KINONAV_DYNAMICS_H_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kinonav/common.h"

namespace kinonav::dynamics {

// Extended robot state: pose, velocities and accelerations.
struct MotionState {
  double x = 0.0;      // m
  double y = 0.0;      // m
  double theta = 0.0;  // rad, in (-pi, pi]
  double v = 0.0;      // m/s
  double w = 0.0;      // rad/s
  double v_dot = 0.0;  // m/s^2
  double w_dot = 0.0;  // rad/s^2

  Pose2 pose() const { return {x, y, theta}; }
  bool IsFinite() const;
  friend bool operator==(const MotionState&, const MotionState&) = default;
};

struct VelocityCommand {
  double v_star = 0.0;  // m/s
  double w_star = 0.0;  // rad/s

  friend bool operator==(const VelocityCommand&,
                         const VelocityCommand&) = default;
};

// Parameters of one axis. Units are those of the axis (m/s or rad/s).
struct AxisParams {
  double f_up = 1.0;  // natural frequency, rad/s
  double zeta_up = 1.0;
  double f_down = 1.0;
  double zeta_down = 1.0;
  double vel_max = 0.0;
  double vel_min = 0.0;
  double acc_up_max = 1.0;
  double acc_down_max = 1.0;

  // Throws InvalidArgument when an invariant does not hold.
  void Validate() const;
  friend bool operator==(const AxisParams&, const AxisParams&) = default;
};

struct SecondOrderParams {
  AxisParams linear;
  AxisParams angular;

  void Validate() const;
  friend bool operator==(const SecondOrderParams&,
                         const SecondOrderParams&) = default;
};

// Parameter set used throughout the tests and as the CLI default. It is not
// the identified model of any physical robot.
SecondOrderParams DefaultParams();

// Flat `lin.f_up = 3` style document, one key per line. Parsing ignores
// keys under `meta.` and throws DataError on missing or unknown keys.
std::string FormatParams(const SecondOrderParams& params);
SecondOrderParams ParseParams(std::string_view text, std::string_view source = "params");
SecondOrderParams LoadParams(const std::filesystem::path& path);

struct PhysicsConfig {
  double decision_hz = 3.0;
  double physics_hz = 30.0;

  int SubstepsPerStep() const;
  double Dt() const { return 1.0 / physics_hz; }
  void Validate() const;
};

struct Regime {
  double f = 0.0;
  double zeta = 0.0;
  double acc_max = 0.0;
};

// Velocity magnitudes below this are treated as "at rest".
inline constexpr double kRestVelocity = 1e-6;

// Acceleration regime when the velocity grows toward the command
// (delta * vel > 0), or when starting from rest with a nonzero error.
Regime SelectRegime(double delta, double vel, const AxisParams& params);

// One semi-implicit Euler substep: acceleration first (clipped to the regime
// limit), then velocity from the new acceleration (clipped to the axis
// limits), then pose from the new velocities.
MotionState Substep(const MotionState& state, const VelocityCommand& cmd,
                    const SecondOrderParams& params, double dt);

struct WindowResult {
  MotionState final_state;
  std::vector<MotionState> trace;  // one entry per substep
};

// Holds `cmd` for one decision period.
WindowResult IntegrateWindow(const MotionState& state,
                             const VelocityCommand& cmd,
                             const SecondOrderParams& params,
                             const PhysicsConfig& config);

struct TimedCommand {
  double t = 0.0;
  VelocityCommand cmd;
};

// Zero-order-hold open-loop rollout. Each command is held until the next
// command's timestamp; the last one for a single decision period. The
// returned trace starts with `initial` and has one entry per substep.
std::vector<MotionState> ReplayOpenLoop(const MotionState& initial,
                                        std::span<const TimedCommand> commands,
                                        const SecondOrderParams& params,
                                        const PhysicsConfig& config);

}  // namespace kinonav::dynamics

#endif  // KINONAV_DYNAMICS_H_
