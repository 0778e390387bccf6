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

#include "kinonav/action_space.h"

#include <string>

namespace kinonav::sim {

dynamics::VelocityCommand ActionToCommand(int index) {
  if (index < 0 || index >= kNumActions) {
    throw InvalidArgument("action index out of range: " + std::to_string(index));
  }
  const int n_ang = static_cast<int>(kAngularChoices.size());
  return {kLinearChoices[index / n_ang], kAngularChoices[index % n_ang]};
}

std::optional<int> CommandToAction(const dynamics::VelocityCommand& cmd) {
  for (int i = 0; i < kNumActions; ++i) {
    if (ActionToCommand(i) == cmd) return i;
  }
  return std::nullopt;
}

}  // namespace kinonav::sim
