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

#include "kinonav/metrics.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "json.hpp"
#include "kinonav/world.h"

namespace kinonav::metrics {
namespace {

// a / max(b, a), with 0/0 read as a perfect ratio.
double Efficiency(double optimum, double actual) {
  const double denom = std::max(actual, optimum);
  return denom > 0.0 ? optimum / denom : 1.0;
}

void RequireNonEmpty(std::span<const EpisodeResult> results) {
  if (results.empty()) throw InvalidArgument("metrics need at least one episode");
}

}  // namespace

double Spl(std::span<const EpisodeResult> results) {
  RequireNonEmpty(results);
  double sum = 0.0;
  for (const EpisodeResult& r : results) {
    if (r.success) sum += Efficiency(r.shortest_length, r.path_length);
  }
  return sum / results.size();
}

double Sct(std::span<const EpisodeResult> results) {
  RequireNonEmpty(results);
  double sum = 0.0;
  for (const EpisodeResult& r : results) {
    if (r.success) sum += Efficiency(r.t_star, r.completion_time);
  }
  return sum / results.size();
}

double SuccessRate(std::span<const EpisodeResult> results) {
  RequireNonEmpty(results);
  const auto n = std::count_if(results.begin(), results.end(),
                               [](const EpisodeResult& r) { return r.success; });
  return static_cast<double>(n) / results.size();
}

double TimeLowerBound(double length, double vel_max, double acc_max) {
  if (!(length >= 0.0)) throw InvalidArgument("path length must be >= 0");
  if (!(vel_max > 0.0) || !(acc_max > 0.0)) {
    throw InvalidArgument("velocity and acceleration caps must be positive");
  }
  const double t_acc = vel_max / acc_max;
  const double d_acc = 0.5 * vel_max * t_acc;
  if (length < d_acc) return std::sqrt(2.0 * length / acc_max);
  return t_acc + (length - d_acc) / vel_max;
}

double TimeLowerBound(const std::vector<Vec2>& path,
                      const dynamics::SecondOrderParams& params) {
  if (path.empty()) throw InvalidArgument("time bound needs a non-empty path");
  return TimeLowerBound(world::PathLength(path), params.linear.vel_max,
                        params.linear.acc_up_max);
}

Report Aggregate(std::span<const EpisodeResult> results) {
  RequireNonEmpty(results);
  Report report;
  report.episodes = static_cast<int>(results.size());
  report.success_rate = SuccessRate(results);
  report.spl = Spl(results);
  report.sct = Sct(results);
  double collisions = 0.0;
  double time = 0.0;
  for (const EpisodeResult& r : results) {
    collisions += r.collisions;
    time += r.completion_time;
  }
  report.mean_collisions = collisions / results.size();
  report.mean_time = time / results.size();
  return report;
}

std::string ReportToJson(const Report& report) {
  nlohmann::ordered_json j;
  j["episodes"] = report.episodes;
  j["success_rate"] = report.success_rate;
  j["spl"] = report.spl;
  j["sct"] = report.sct;
  j["mean_collisions"] = report.mean_collisions;
  j["mean_time_s"] = report.mean_time;
  j["percent"] = {{"SR", 100.0 * report.success_rate},
                  {"SPL", 100.0 * report.spl},
                  {"SCT", 100.0 * report.sct}};
  return j.dump(2);
}

std::string FormatTable(const std::vector<std::pair<std::string, Report>>& rows) {
  std::size_t label_width = 6;
  for (const auto& [label, report] : rows) label_width = std::max(label_width, label.size());
  std::string out = fmt::format("{:<{}}  {:>4}  {:>6}  {:>6}  {:>6}  {:>6}  {:>7}\n",
                                "policy", label_width, "N", "SR(%)", "SPL(%)", "SCT(%)",
                                "coll", "time(s)");
  for (const auto& [label, r] : rows) {
    out += fmt::format("{:<{}}  {:>4}  {:>6.1f}  {:>6.1f}  {:>6.1f}  {:>6.2f}  {:>7.1f}\n",
                       label, label_width, r.episodes, 100.0 * r.success_rate,
                       100.0 * r.spl, 100.0 * r.sct, r.mean_collisions, r.mean_time);
  }
  return out;
}

std::string ResultToJson(const EpisodeResult& r) {
  nlohmann::ordered_json j;
  j["id"] = r.episode_id;
  j["success"] = r.success;
  j["path_length"] = r.path_length;
  j["shortest_length"] = r.shortest_length;
  j["completion_time"] = r.completion_time;
  j["t_star"] = r.t_star;
  j["collisions"] = r.collisions;
  if (!r.error.empty()) j["error"] = r.error;
  return j.dump();
}

EpisodeResult ResultFromJson(const std::string& line) {
  const nlohmann::json j = nlohmann::json::parse(line);
  EpisodeResult r;
  r.episode_id = j.at("id").get<std::string>();
  r.success = j.at("success").get<bool>();
  r.path_length = j.at("path_length").get<double>();
  r.shortest_length = j.at("shortest_length").get<double>();
  r.completion_time = j.at("completion_time").get<double>();
  r.t_star = j.at("t_star").get<double>();
  r.collisions = j.at("collisions").get<int>();
  if (j.contains("error")) r.error = j.at("error").get<std::string>();
  return r;
}

void SaveResults(std::span<const EpisodeResult> results,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write results file " + path.string());
  for (const EpisodeResult& r : results) out << ResultToJson(r) << '\n';
}

std::vector<EpisodeResult> LoadResults(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open results file " + path.string());
  std::vector<EpisodeResult> results;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      results.push_back(ResultFromJson(line));
    } catch (const std::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return results;
}

}  // namespace kinonav::metrics
