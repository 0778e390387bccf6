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

#ifndef KINONAV_ACTION_SPACE_H_
#define KINONAV_ACTION_SPACE_H_

#include <array>
#include <optional>

#include "kinonav/dynamics.h"

namespace kinonav::sim {

// 28 velocity commands: linear {0, 0.3, 0.6, 1} (outer) x angular
// {-3..3} (inner); index = lin_idx * 7 + ang_idx.
inline constexpr std::array<double, 4> kLinearChoices = {0.0, 0.3, 0.6, 1.0};
inline constexpr std::array<double, 7> kAngularChoices = {-3.0, -2.0, -1.0, 0.0,
                                                          1.0,  2.0,  3.0};
inline constexpr int kNumActions = 28;
inline constexpr int kStopAction = 3;
// Marks "no previous action" and forced (non-policy) commands.
inline constexpr int kNoAction = -1;

// Throws InvalidArgument for an index outside [0, 28).
dynamics::VelocityCommand ActionToCommand(int index);

// Inverse of ActionToCommand; nullopt for commands outside the action set.
std::optional<int> CommandToAction(const dynamics::VelocityCommand& cmd);

}  // namespace kinonav::sim

#endif  // KINONAV_ACTION_SPACE_H_
