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

#include "kinonav/dynamics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "kinonav/textio.h"

namespace kinonav::dynamics {
namespace {

struct AxisState {
  double vel;
  double acc;
};

AxisState StepAxis(double vel, double acc, double target,
                   const AxisParams& params, double dt) {
  const double delta = target - vel;
  const Regime regime = SelectRegime(delta, vel, params);
  double new_acc =
      acc + dt * (regime.f * regime.f * delta - 2.0 * regime.zeta * regime.f * acc);
  new_acc = std::clamp(new_acc, -regime.acc_max, regime.acc_max);
  double new_vel = vel + dt * new_acc;
  new_vel = std::clamp(new_vel, params.vel_min, params.vel_max);
  return {new_vel, new_acc};
}

void Require(bool condition, const std::string& what) {
  if (!condition) throw InvalidArgument(what);
}

}  // namespace

bool MotionState::IsFinite() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(theta) &&
         std::isfinite(v) && std::isfinite(w) && std::isfinite(v_dot) &&
         std::isfinite(w_dot);
}

void AxisParams::Validate() const {
  Require(f_up > 0.0 && f_down > 0.0, "natural frequencies must be positive");
  Require(zeta_up > 0.0 && zeta_down > 0.0, "damping must be positive");
  Require(vel_min <= 0.0 && 0.0 <= vel_max, "need vel_min <= 0 <= vel_max");
  Require(acc_up_max > 0.0 && acc_down_max > 0.0,
          "acceleration limits must be positive");
  Require(std::isfinite(f_up) && std::isfinite(f_down) &&
              std::isfinite(zeta_up) && std::isfinite(zeta_down) &&
              std::isfinite(vel_min) && std::isfinite(vel_max) &&
              std::isfinite(acc_up_max) && std::isfinite(acc_down_max),
          "axis parameters must be finite");
}

void SecondOrderParams::Validate() const {
  linear.Validate();
  angular.Validate();
}

SecondOrderParams DefaultParams() {
  SecondOrderParams p;
  p.linear = {.f_up = 3.0,
              .zeta_up = 0.7,
              .f_down = 4.0,
              .zeta_down = 0.7,
              .vel_max = 1.0,
              .vel_min = -0.2,
              .acc_up_max = 2.0,
              .acc_down_max = 2.0};
  p.angular = {.f_up = 5.0,
               .zeta_up = 0.7,
               .f_down = 6.0,
               .zeta_down = 0.7,
               .vel_max = 3.0,
               .vel_min = -3.0,
               .acc_up_max = 8.0,
               .acc_down_max = 8.0};
  return p;
}

namespace {

struct AxisField {
  const char* name;
  double AxisParams::*member;
};

constexpr AxisField kAxisFields[] = {
    {"f_up", &AxisParams::f_up},          {"zeta_up", &AxisParams::zeta_up},
    {"f_down", &AxisParams::f_down},      {"zeta_down", &AxisParams::zeta_down},
    {"v_max", &AxisParams::vel_max},      {"v_min", &AxisParams::vel_min},
    {"acc_up_max", &AxisParams::acc_up_max}, {"acc_down_max", &AxisParams::acc_down_max},
};

}  // namespace

std::string FormatParams(const SecondOrderParams& params) {
  std::string out;
  for (const auto& [prefix, axis] : {std::pair{"lin", &params.linear},
                                     std::pair{"ang", &params.angular}}) {
    for (const AxisField& f : kAxisFields) {
      out += std::string(prefix) + "." + f.name + " = " +
             textio::FormatDouble(axis->*f.member) + "\n";
    }
  }
  return out;
}

SecondOrderParams ParseParams(std::string_view text, std::string_view source) {
  std::map<std::string, std::string> kv = textio::ParseKeyValues(text, source);
  SecondOrderParams params;
  for (const auto& [prefix, axis] : {std::pair{"lin", &params.linear},
                                     std::pair{"ang", &params.angular}}) {
    for (const AxisField& f : kAxisFields) {
      const std::string key = std::string(prefix) + "." + f.name;
      const auto it = kv.find(key);
      if (it == kv.end()) {
        throw DataError(std::string(source) + ": missing key '" + key + "'");
      }
      axis->*f.member = textio::ParseDouble(it->second, std::string(source) + ": " + key);
      kv.erase(it);
    }
  }
  for (const auto& [key, value] : kv) {
    if (!key.starts_with("meta.")) {
      throw DataError(std::string(source) + ": unknown key '" + key + "'");
    }
  }
  try {
    params.Validate();
  } catch (const InvalidArgument& e) {
    throw DataError(std::string(source) + ": " + e.what());
  }
  return params;
}

SecondOrderParams LoadParams(const std::filesystem::path& path) {
  return ParseParams(textio::ReadFile(path), path.string());
}

int PhysicsConfig::SubstepsPerStep() const {
  // Guard against 30/3 landing a hair above 10.
  return static_cast<int>(std::ceil(physics_hz / decision_hz - 1e-9));
}

void PhysicsConfig::Validate() const {
  Require(decision_hz > 0.0 && physics_hz >= decision_hz,
          "need physics_hz >= decision_hz > 0");
}

Regime SelectRegime(double delta, double vel, const AxisParams& params) {
  const bool accelerating =
      delta * vel > 0.0 || (std::abs(vel) < kRestVelocity && delta != 0.0);
  if (accelerating) return {params.f_up, params.zeta_up, params.acc_up_max};
  return {params.f_down, params.zeta_down, params.acc_down_max};
}

MotionState Substep(const MotionState& state, const VelocityCommand& cmd,
                    const SecondOrderParams& params, double dt) {
  if (!state.IsFinite()) throw InvalidArgument("non-finite motion state");
  if (!std::isfinite(cmd.v_star) || !std::isfinite(cmd.w_star)) {
    throw InvalidArgument("non-finite velocity command");
  }
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");

  const AxisState lin = StepAxis(state.v, state.v_dot, cmd.v_star, params.linear, dt);
  const AxisState ang =
      StepAxis(state.w, state.w_dot, cmd.w_star, params.angular, dt);

  MotionState next;
  next.v = lin.vel;
  next.v_dot = lin.acc;
  next.w = ang.vel;
  next.w_dot = ang.acc;
  next.theta = NormalizeAngle(state.theta + dt * next.w);
  next.x = state.x + dt * next.v * std::cos(next.theta);
  next.y = state.y + dt * next.v * std::sin(next.theta);
  return next;
}

WindowResult IntegrateWindow(const MotionState& state,
                             const VelocityCommand& cmd,
                             const SecondOrderParams& params,
                             const PhysicsConfig& config) {
  const int substeps = config.SubstepsPerStep();
  const double dt = config.Dt();
  WindowResult result;
  result.trace.reserve(substeps);
  MotionState current = state;
  for (int i = 0; i < substeps; ++i) {
    current = Substep(current, cmd, params, dt);
    result.trace.push_back(current);
  }
  result.final_state = current;
  return result;
}

std::vector<MotionState> ReplayOpenLoop(const MotionState& initial,
                                        std::span<const TimedCommand> commands,
                                        const SecondOrderParams& params,
                                        const PhysicsConfig& config) {
  for (std::size_t i = 1; i < commands.size(); ++i) {
    if (commands[i].t < commands[i - 1].t) {
      throw InvalidArgument("command timestamps are not sorted (entry " +
                            std::to_string(i) + ")");
    }
  }
  std::vector<MotionState> trace{initial};
  const double dt = config.Dt();
  MotionState current = initial;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const long substeps =
        i + 1 < commands.size()
            ? std::lround((commands[i + 1].t - commands[i].t) * config.physics_hz)
            : config.SubstepsPerStep();
    for (long k = 0; k < substeps; ++k) {
      current = Substep(current, commands[i].cmd, params, dt);
      trace.push_back(current);
    }
  }
  return trace;
}

}  // namespace kinonav::dynamics
