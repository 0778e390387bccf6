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

// Navigation metrics: success rate, path-efficiency (SPL) and
// time-efficiency (SCT) with a dynamics-aware lower bound on the optimal
// completion time.

#ifndef KINONAV_METRICS_H_
#define KINONAV_METRICS_H_

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kinonav/common.h"
#include "kinonav/dynamics.h"

namespace kinonav::metrics {

struct EpisodeResult {
  std::string episode_id;
  bool success = false;
  double path_length = 0.0;      // m, travelled by the robot
  double shortest_length = 0.0;  // m, obstacle-aware optimum
  double completion_time = 0.0;  // s
  double t_star = 0.0;           // s, lower bound on the optimal time
  int collisions = 0;
  // Non-empty when the episode could not be run (counted as a failure).
  std::string error;

  friend bool operator==(const EpisodeResult&, const EpisodeResult&) = default;
};

// Mean of success * shortest / max(path, shortest). Throws InvalidArgument
// on an empty set.
double Spl(std::span<const EpisodeResult> results);
// Mean of success * t_star / max(completion, t_star).
double Sct(std::span<const EpisodeResult> results);
double SuccessRate(std::span<const EpisodeResult> results);

// Fastest time to cover `length` from rest under a velocity cap and an
// acceleration cap, ignoring turning and braking.
double TimeLowerBound(double length, double vel_max, double acc_max);
// Same for the total length of `path`, using the linear-axis limits.
// Throws InvalidArgument on an empty path.
double TimeLowerBound(const std::vector<Vec2>& path,
                      const dynamics::SecondOrderParams& params);

struct Report {
  int episodes = 0;
  double success_rate = 0.0;  // fractions in [0, 1]
  double spl = 0.0;
  double sct = 0.0;
  double mean_collisions = 0.0;
  double mean_time = 0.0;  // s, over all episodes
};

Report Aggregate(std::span<const EpisodeResult> results);

// JSON object with fractions and percentages.
std::string ReportToJson(const Report& report);
// Aligned table, one row per labelled report; values in percent.
std::string FormatTable(const std::vector<std::pair<std::string, Report>>& rows);

std::string ResultToJson(const EpisodeResult& result);
EpisodeResult ResultFromJson(const std::string& line);
// One JSON object per line.
void SaveResults(std::span<const EpisodeResult> results,
                 const std::filesystem::path& path);
std::vector<EpisodeResult> LoadResults(const std::filesystem::path& path);

}  // namespace kinonav::metrics

#endif  // KINONAV_METRICS_H_
