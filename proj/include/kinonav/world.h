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

// 2D occupancy-grid worlds: raycasting, collision queries, geodesic
// distances, shortest paths and procedural room generation.

#ifndef KINONAV_WORLD_H_
#define KINONAV_WORLD_H_

#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "kinonav/common.h"

namespace kinonav::world {

inline constexpr double kDefaultRobotRadius = 0.3;
inline constexpr double kDefaultResolution = 0.05;
inline constexpr double kDefaultMaxRange = 10.0;
inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

struct CellIndex {
  int x = 0;
  int y = 0;
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

// Row-major binary occupancy. Cell (0, 0) has its lower-left corner at
// `origin`; x grows with column index, y with row index.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double resolution, Vec2 origin = {});

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  Vec2 origin() const { return origin_; }
  const std::vector<std::uint8_t>& cells() const { return cells_; }

  bool InBounds(CellIndex c) const {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }
  // Out-of-bounds cells read as free.
  bool IsOccupied(CellIndex c) const {
    return InBounds(c) && cells_[Index(c)] != 0;
  }
  void SetOccupied(CellIndex c, bool occupied = true);
  // Marks every cell whose center lies in [lo, hi].
  void FillRect(Vec2 lo, Vec2 hi, bool occupied = true);

  std::size_t Index(CellIndex c) const {
    return static_cast<std::size_t>(c.y) * width_ + c.x;
  }
  CellIndex CellAt(Vec2 p) const;
  Vec2 CellCenter(CellIndex c) const;
  bool Contains(Vec2 p) const { return InBounds(CellAt(p)); }

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = kDefaultResolution;
  Vec2 origin_;
  std::vector<std::uint8_t> cells_;
};

// Distance along the ray to the first occupied cell (grid traversal), or
// max_range. Leaving the grid counts as max_range; starting inside an
// occupied cell gives 0.
double Raycast(const OccupancyGrid& grid, Vec2 origin, double azimuth,
               double max_range);

// Bin i looks along pose.theta - pi + (i + 0.5) * 2 pi / n_bins.
std::vector<double> SimulateLidar(const OccupancyGrid& grid, const Pose2& pose,
                                  int n_bins = 180,
                                  double max_range = kDefaultMaxRange);

// True iff an occupied cell (or space outside the grid) intersects the open
// disc of `radius` around `center`.
bool CollisionCheck(const OccupancyGrid& grid, Vec2 center, double radius);

// Cells whose center would put the robot disc in collision.
class InflatedGrid {
 public:
  InflatedGrid(std::shared_ptr<const OccupancyGrid> grid, double robot_radius);

  const OccupancyGrid& grid() const { return *grid_; }
  double robot_radius() const { return robot_radius_; }
  bool IsBlocked(CellIndex c) const {
    return !grid_->InBounds(c) || blocked_[grid_->Index(c)] != 0;
  }
  bool IsFree(Vec2 p) const { return !IsBlocked(grid_->CellAt(p)); }
  // Every cell touched by segment a-b is free.
  bool LineOfSight(Vec2 a, Vec2 b) const;

 private:
  std::shared_ptr<const OccupancyGrid> grid_;
  double robot_radius_;
  std::vector<std::uint8_t> blocked_;
};

// Single-source shortest path lengths (meters) on the 8-connected inflated
// grid, diagonal cost sqrt(2) * resolution. Diagonal moves need both
// adjacent orthogonal cells free.
class GeodesicField {
 public:
  GeodesicField(std::shared_ptr<const InflatedGrid> inflated, Vec2 source);

  const InflatedGrid& inflated() const { return *inflated_; }
  Vec2 source() const { return source_; }
  double AtCell(CellIndex c) const;
  // Cell-snapped distance; if the cell of `p` is blocked, the best free
  // neighbour within two cells plus the straight hop to it.
  double At(Vec2 p) const;
  // Cell centers from the cell of `p` down the gradient to the source.
  std::vector<CellIndex> DescendFrom(Vec2 p) const;

 private:
  std::shared_ptr<const InflatedGrid> inflated_;
  Vec2 source_;
  std::vector<double> dist_;
};

// Throws InvalidArgument when a or b lies in an inflated obstacle; returns
// kUnreachable when they are disconnected.
double GeodesicDistance(const OccupancyGrid& grid, Vec2 a, Vec2 b,
                        double robot_radius = kDefaultRobotRadius);

// Cell path simplified by greedy line-of-sight shortcutting. Starts at `a`,
// ends at `b`. Throws Infeasible when unreachable.
std::vector<Vec2> ShortestPath(const GeodesicField& field_to_b, Vec2 a);
std::vector<Vec2> ShortestPath(const OccupancyGrid& grid, Vec2 a, Vec2 b,
                               double robot_radius = kDefaultRobotRadius);

double PathLength(const std::vector<Vec2>& path);

// Distance from each cell center to the nearest occupied cell, capped.
class ClearanceMap {
 public:
  explicit ClearanceMap(const OccupancyGrid& grid, double cap = 1.0);
  // Lower bound on the clearance at `p`; 0 outside the grid.
  double At(Vec2 p) const;

 private:
  OccupancyGrid geometry_;  // cells unused
  double cap_;
  std::vector<float> clearance_;
};

struct RoomsSpec {
  double width = 10.0;   // m
  double height = 10.0;  // m
  double resolution = kDefaultResolution;
  double clutter = 0.05;  // fraction of interior area covered by boxes
};

// Outer walls; when clutter > 0 also 1-4 internal walls with door gaps of at
// least 1 m and rectangular boxes. The largest connected free region (for a
// robot of kDefaultRobotRadius) covers at least half of the interior.
OccupancyGrid GenerateRooms(std::uint64_t seed, const RoomsSpec& spec);

struct Episode {
  std::string id;
  std::string grid;  // grid file path, as written in the episodes file
  Pose2 start;
  Vec2 goal;
  double geodesic = 0.0;  // start-goal, m
};

// Start/goal pairs in the same free region with geodesic distance in
// [min_geodesic, max_geodesic].
std::vector<Episode> SampleEpisodes(const OccupancyGrid& grid, int count,
                                    std::uint64_t seed, double min_geodesic,
                                    double max_geodesic,
                                    double robot_radius = kDefaultRobotRadius);

// Text format: `W H RES OX OY`, then H rows of W characters ('#' occupied,
// '.' free), top row first.
std::string FormatGrid(const OccupancyGrid& grid);
OccupancyGrid ParseGrid(const std::string& text);
OccupancyGrid LoadGrid(const std::filesystem::path& path);
void SaveGrid(const OccupancyGrid& grid, const std::filesystem::path& path);
// Binary PGM (P5); pixels darker than 128 are occupied. Top row first.
OccupancyGrid LoadPgm(const std::filesystem::path& path, double resolution,
                      Vec2 origin);

// One JSON object per line: {"id", "grid", "start": [x, y, theta],
// "goal": [x, y]}.
std::vector<Episode> LoadEpisodes(const std::filesystem::path& path);
void SaveEpisodes(const std::vector<Episode>& episodes,
                  const std::filesystem::path& path);

}  // namespace kinonav::world

#endif  // KINONAV_WORLD_H_
