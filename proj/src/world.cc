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

#include "kinonav/world.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <queue>
#include <random>
#include <sstream>

#include "json.hpp"

namespace kinonav::world {
namespace {

constexpr double kSqrt2 = 1.4142135623730951;

struct Move {
  int dx;
  int dy;
  double cost;  // in cells
};
constexpr std::array<Move, 8> kMoves = {{{1, 0, 1.0},
                                         {-1, 0, 1.0},
                                         {0, 1, 1.0},
                                         {0, -1, 1.0},
                                         {1, 1, kSqrt2},
                                         {1, -1, kSqrt2},
                                         {-1, 1, kSqrt2},
                                         {-1, -1, kSqrt2}}};

// Whether the move from `c` by `m` is allowed on the inflated grid.
bool MoveAllowed(const InflatedGrid& g, CellIndex c, const Move& m) {
  const CellIndex n{c.x + m.dx, c.y + m.dy};
  if (g.IsBlocked(n)) return false;
  if (m.dx != 0 && m.dy != 0) {
    return !g.IsBlocked({c.x + m.dx, c.y}) && !g.IsBlocked({c.x, c.y + m.dy});
  }
  return true;
}

// Distance from p to the square of cell c.
double DistanceToCell(const OccupancyGrid& grid, Vec2 p, CellIndex c) {
  const double res = grid.resolution();
  const double x0 = grid.origin().x + c.x * res;
  const double y0 = grid.origin().y + c.y * res;
  const double dx = std::max({x0 - p.x, 0.0, p.x - (x0 + res)});
  const double dy = std::max({y0 - p.y, 0.0, p.y - (y0 + res)});
  return std::hypot(dx, dy);
}

// An occupied cell with at least one non-occupied 8-neighbour (or on the
// grid edge).
bool IsBoundaryCell(const OccupancyGrid& grid, CellIndex c) {
  for (const Move& m : kMoves) {
    const CellIndex n{c.x + m.dx, c.y + m.dy};
    if (!grid.InBounds(n) || !grid.IsOccupied(n)) return true;
  }
  return false;
}

// Visits cells pierced by the ray from `origin` along unit `dir`, in order,
// until `visit(cell, t_entry)` returns true or t exceeds `t_max`. Returns the
// entry distance of the accepted cell, or a negative value.
template <typename Visit>
double Traverse(const OccupancyGrid& grid, Vec2 origin, Vec2 dir, double t_max,
                Visit&& visit) {
  const double res = grid.resolution();
  CellIndex c = grid.CellAt(origin);
  if (visit(c, 0.0)) return 0.0;

  const int step_x = dir.x > 0 ? 1 : (dir.x < 0 ? -1 : 0);
  const int step_y = dir.y > 0 ? 1 : (dir.y < 0 ? -1 : 0);
  const double inf = std::numeric_limits<double>::infinity();
  const double cell_x0 = grid.origin().x + c.x * res;
  const double cell_y0 = grid.origin().y + c.y * res;
  double t_next_x = inf, t_next_y = inf, t_delta_x = inf, t_delta_y = inf;
  if (step_x != 0) {
    const double boundary = step_x > 0 ? cell_x0 + res : cell_x0;
    t_next_x = (boundary - origin.x) / dir.x;
    t_delta_x = res / std::abs(dir.x);
  }
  if (step_y != 0) {
    const double boundary = step_y > 0 ? cell_y0 + res : cell_y0;
    t_next_y = (boundary - origin.y) / dir.y;
    t_delta_y = res / std::abs(dir.y);
  }
  while (true) {
    double t;
    if (t_next_x < t_next_y) {
      t = t_next_x;
      c.x += step_x;
      t_next_x += t_delta_x;
    } else {
      t = t_next_y;
      c.y += step_y;
      t_next_y += t_delta_y;
    }
    if (t > t_max) return -1.0;
    if (visit(c, std::max(t, 0.0))) return std::max(t, 0.0);
  }
}

std::vector<std::size_t> LargestComponent(const InflatedGrid& g) {
  const OccupancyGrid& grid = g.grid();
  std::vector<int> label(grid.cells().size(), -1);
  std::vector<std::size_t> best;
  int next_label = 0;
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      const CellIndex seed{x, y};
      if (g.IsBlocked(seed) || label[grid.Index(seed)] >= 0) continue;
      std::vector<std::size_t> members;
      std::vector<CellIndex> stack{seed};
      label[grid.Index(seed)] = next_label;
      while (!stack.empty()) {
        const CellIndex c = stack.back();
        stack.pop_back();
        members.push_back(grid.Index(c));
        for (const Move& m : kMoves) {
          if (!MoveAllowed(g, c, m)) continue;
          const CellIndex n{c.x + m.dx, c.y + m.dy};
          if (label[grid.Index(n)] >= 0) continue;
          label[grid.Index(n)] = next_label;
          stack.push_back(n);
        }
      }
      ++next_label;
      if (members.size() > best.size()) best = std::move(members);
    }
  }
  std::sort(best.begin(), best.end());
  return best;
}

}  // namespace

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, Vec2 origin)
    : width_(width), height_(height), resolution_(resolution), origin_(origin) {
  if (width <= 0 || height <= 0) throw InvalidArgument("grid dimensions must be positive");
  if (!(resolution > 0.0)) throw InvalidArgument("grid resolution must be positive");
  cells_.assign(static_cast<std::size_t>(width) * height, 0);
}

void OccupancyGrid::SetOccupied(CellIndex c, bool occupied) {
  if (!InBounds(c)) throw InvalidArgument("cell out of bounds");
  cells_[Index(c)] = occupied ? 1 : 0;
}

void OccupancyGrid::FillRect(Vec2 lo, Vec2 hi, bool occupied) {
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const Vec2 c = CellCenter({x, y});
      if (c.x >= lo.x && c.x <= hi.x && c.y >= lo.y && c.y <= hi.y) {
        cells_[Index({x, y})] = occupied ? 1 : 0;
      }
    }
  }
}

CellIndex OccupancyGrid::CellAt(Vec2 p) const {
  return {static_cast<int>(std::floor((p.x - origin_.x) / resolution_)),
          static_cast<int>(std::floor((p.y - origin_.y) / resolution_))};
}

Vec2 OccupancyGrid::CellCenter(CellIndex c) const {
  return {origin_.x + (c.x + 0.5) * resolution_, origin_.y + (c.y + 0.5) * resolution_};
}

double Raycast(const OccupancyGrid& grid, Vec2 origin, double azimuth,
               double max_range) {
  const Vec2 dir{std::cos(azimuth), std::sin(azimuth)};
  bool left_grid = false;
  const double hit = Traverse(grid, origin, dir, max_range, [&](CellIndex c, double) {
    if (!grid.InBounds(c)) {
      left_grid = true;
      return true;
    }
    return grid.IsOccupied(c);
  });
  if (hit < 0.0 || left_grid) return max_range;
  return std::min(hit, max_range);
}

std::vector<double> SimulateLidar(const OccupancyGrid& grid, const Pose2& pose,
                                  int n_bins, double max_range) {
  if (n_bins <= 0) throw InvalidArgument("n_bins must be positive");
  std::vector<double> ranges(n_bins);
  const double width = 2.0 * kPi / n_bins;
  for (int i = 0; i < n_bins; ++i) {
    ranges[i] = Raycast(grid, pose.position(), pose.theta - kPi + (i + 0.5) * width,
                        max_range);
  }
  return ranges;
}

bool CollisionCheck(const OccupancyGrid& grid, Vec2 center, double radius) {
  const CellIndex lo = grid.CellAt({center.x - radius, center.y - radius});
  const CellIndex hi = grid.CellAt({center.x + radius, center.y + radius});
  for (int y = lo.y; y <= hi.y; ++y) {
    for (int x = lo.x; x <= hi.x; ++x) {
      const CellIndex c{x, y};
      if (grid.InBounds(c) && !grid.IsOccupied(c)) continue;
      if (DistanceToCell(grid, center, c) < radius) return true;
    }
  }
  return false;
}

InflatedGrid::InflatedGrid(std::shared_ptr<const OccupancyGrid> grid,
                           double robot_radius)
    : grid_(std::move(grid)), robot_radius_(robot_radius) {
  if (!(robot_radius >= 0.0)) throw InvalidArgument("robot radius must be >= 0");
  const OccupancyGrid& g = *grid_;
  blocked_.assign(g.cells().size(), 0);
  const int reach = static_cast<int>(std::ceil(robot_radius / g.resolution())) + 1;
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      const CellIndex c{x, y};
      const bool near_edge = x < reach || y < reach || x >= g.width() - reach ||
                             y >= g.height() - reach;
      if (g.IsOccupied(c)) {
        blocked_[g.Index(c)] = 1;
        if (!IsBoundaryCell(g, c)) continue;
        for (int ny = y - reach; ny <= y + reach; ++ny) {
          for (int nx = x - reach; nx <= x + reach; ++nx) {
            const CellIndex n{nx, ny};
            if (!g.InBounds(n) || blocked_[g.Index(n)]) continue;
            if (DistanceToCell(g, g.CellCenter(n), c) < robot_radius) {
              blocked_[g.Index(n)] = 1;
            }
          }
        }
      } else if (near_edge && CollisionCheck(g, g.CellCenter(c), robot_radius)) {
        blocked_[g.Index(c)] = 1;
      }
    }
  }
}

bool InflatedGrid::LineOfSight(Vec2 a, Vec2 b) const {
  const Vec2 d = b - a;
  const double length = d.Norm();
  if (length == 0.0) return IsFree(a);
  const Vec2 dir = (1.0 / length) * d;
  const CellIndex end = grid_->CellAt(b);
  bool blocked = false;
  Traverse(*grid_, a, dir, length, [&](CellIndex c, double) {
    if (IsBlocked(c)) {
      blocked = true;
      return true;
    }
    return c == end;
  });
  return !blocked;
}

GeodesicField::GeodesicField(std::shared_ptr<const InflatedGrid> inflated,
                             Vec2 source)
    : inflated_(std::move(inflated)), source_(source) {
  const InflatedGrid& g = *inflated_;
  const OccupancyGrid& grid = g.grid();
  const CellIndex start = grid.CellAt(source);
  if (g.IsBlocked(start)) {
    throw InvalidArgument("geodesic source lies in an inflated obstacle");
  }
  dist_.assign(grid.cells().size(), kUnreachable);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist_[grid.Index(start)] = 0.0;
  open.push({0.0, grid.Index(start)});
  const double res = grid.resolution();
  while (!open.empty()) {
    const auto [d, idx] = open.top();
    open.pop();
    if (d > dist_[idx]) continue;
    const CellIndex c{static_cast<int>(idx % grid.width()),
                      static_cast<int>(idx / grid.width())};
    for (const Move& m : kMoves) {
      if (!MoveAllowed(g, c, m)) continue;
      const std::size_t n = grid.Index({c.x + m.dx, c.y + m.dy});
      const double nd = d + m.cost * res;
      if (nd < dist_[n]) {
        dist_[n] = nd;
        open.push({nd, n});
      }
    }
  }
}

double GeodesicField::AtCell(CellIndex c) const {
  const OccupancyGrid& grid = inflated_->grid();
  if (!grid.InBounds(c)) return kUnreachable;
  return dist_[grid.Index(c)];
}

double GeodesicField::At(Vec2 p) const {
  const OccupancyGrid& grid = inflated_->grid();
  const CellIndex c = grid.CellAt(p);
  if (!inflated_->IsBlocked(c)) return dist_[grid.Index(c)];
  double best = kUnreachable;
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) {
      const CellIndex n{c.x + dx, c.y + dy};
      if (inflated_->IsBlocked(n)) continue;
      best = std::min(best, dist_[grid.Index(n)] + Distance(p, grid.CellCenter(n)));
    }
  }
  return best;
}

std::vector<CellIndex> GeodesicField::DescendFrom(Vec2 p) const {
  const InflatedGrid& g = *inflated_;
  const OccupancyGrid& grid = g.grid();
  CellIndex c = grid.CellAt(p);
  if (g.IsBlocked(c)) {
    double best = kUnreachable;
    for (int dy = -2; dy <= 2; ++dy) {
      for (int dx = -2; dx <= 2; ++dx) {
        const CellIndex n{c.x + dx, c.y + dy};
        if (g.IsBlocked(n)) continue;
        const double d = dist_[grid.Index(n)] + Distance(p, grid.CellCenter(n));
        if (d < best) {
          best = d;
          c = n;
        }
      }
    }
    if (g.IsBlocked(c)) throw Infeasible("no free cell near path start");
  }
  if (dist_[grid.Index(c)] == kUnreachable) throw Infeasible("goal unreachable");

  std::vector<CellIndex> cells{c};
  const double res = grid.resolution();
  while (dist_[grid.Index(c)] > 0.0) {
    CellIndex next = c;
    double best = dist_[grid.Index(c)];
    for (const Move& m : kMoves) {
      if (!MoveAllowed(g, c, m)) continue;
      const CellIndex n{c.x + m.dx, c.y + m.dy};
      const double via = dist_[grid.Index(n)] + m.cost * res;
      if (dist_[grid.Index(n)] < dist_[grid.Index(c)] && via <= best + 1e-9) {
        best = via;
        next = n;
      }
    }
    if (next == c) throw Infeasible("geodesic descent stalled");
    c = next;
    cells.push_back(c);
  }
  return cells;
}

double GeodesicDistance(const OccupancyGrid& grid, Vec2 a, Vec2 b,
                        double robot_radius) {
  auto shared = std::make_shared<const OccupancyGrid>(grid);
  auto inflated = std::make_shared<const InflatedGrid>(shared, robot_radius);
  if (!inflated->IsFree(a)) {
    throw InvalidArgument("geodesic endpoint lies in an inflated obstacle");
  }
  const GeodesicField field(inflated, b);
  return field.AtCell(grid.CellAt(a));
}

std::vector<Vec2> ShortestPath(const GeodesicField& field_to_b, Vec2 a) {
  const InflatedGrid& g = field_to_b.inflated();
  const std::vector<CellIndex> cells = field_to_b.DescendFrom(a);
  std::vector<Vec2> raw{a};
  for (std::size_t i = 1; i + 1 < cells.size(); ++i) {
    raw.push_back(g.grid().CellCenter(cells[i]));
  }
  raw.push_back(field_to_b.source());

  std::vector<Vec2> path{raw.front()};
  std::size_t i = 0;
  while (i + 1 < raw.size()) {
    std::size_t j = i + 1;
    while (j + 1 < raw.size() && g.LineOfSight(raw[i], raw[j + 1])) ++j;
    path.push_back(raw[j]);
    i = j;
  }
  return path;
}

std::vector<Vec2> ShortestPath(const OccupancyGrid& grid, Vec2 a, Vec2 b,
                               double robot_radius) {
  auto shared = std::make_shared<const OccupancyGrid>(grid);
  auto inflated = std::make_shared<const InflatedGrid>(shared, robot_radius);
  if (!inflated->IsFree(a)) {
    throw InvalidArgument("path start lies in an inflated obstacle");
  }
  const GeodesicField field(inflated, b);
  return ShortestPath(field, a);
}

double PathLength(const std::vector<Vec2>& path) {
  double length = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) length += Distance(path[i - 1], path[i]);
  return length;
}

ClearanceMap::ClearanceMap(const OccupancyGrid& grid, double cap)
    : geometry_(grid.width(), grid.height(), grid.resolution(), grid.origin()),
      cap_(cap) {
  clearance_.assign(grid.cells().size(), static_cast<float>(cap));
  const double res = grid.resolution();
  const int reach = static_cast<int>(std::ceil(cap / res)) + 1;
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      const Vec2 c = grid.CellCenter({x, y});
      const double to_edge =
          std::min({c.x - grid.origin().x, c.y - grid.origin().y,
                    grid.origin().x + grid.width() * res - c.x,
                    grid.origin().y + grid.height() * res - c.y});
      float& slot = clearance_[grid.Index({x, y})];
      slot = std::min(slot, static_cast<float>(to_edge));
    }
  }
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      const CellIndex o{x, y};
      if (!grid.IsOccupied(o)) continue;
      clearance_[grid.Index(o)] = 0.0f;
      if (!IsBoundaryCell(grid, o)) continue;
      for (int ny = y - reach; ny <= y + reach; ++ny) {
        for (int nx = x - reach; nx <= x + reach; ++nx) {
          const CellIndex n{nx, ny};
          if (!grid.InBounds(n)) continue;
          float& slot = clearance_[grid.Index(n)];
          slot = std::min(
              slot, static_cast<float>(DistanceToCell(grid, grid.CellCenter(n), o)));
        }
      }
    }
  }
}

double ClearanceMap::At(Vec2 p) const {
  const CellIndex c = geometry_.CellAt(p);
  if (!geometry_.InBounds(c)) return 0.0;
  const double d = clearance_[geometry_.Index(c)] - Distance(p, geometry_.CellCenter(c));
  return std::max(0.0, d);
}

OccupancyGrid GenerateRooms(std::uint64_t seed, const RoomsSpec& spec) {
  if (!(spec.width > 0.0) || !(spec.height > 0.0) || !(spec.resolution > 0.0)) {
    throw InvalidArgument("room dimensions must be positive");
  }
  if (spec.clutter < 0.0 || spec.clutter > 0.5) {
    throw InvalidArgument("clutter must lie in [0, 0.5]");
  }
  constexpr double kWall = 0.1;
  constexpr double kDoorMin = 1.0;
  constexpr double kDoorMax = 1.4;
  constexpr double kMinRoom = 2.0;
  if (spec.width < 4 * kWall + 1.0 || spec.height < 4 * kWall + 1.0) {
    throw InvalidArgument("world too small for outer walls and free space");
  }
  if (spec.clutter > 0.0 &&
      std::max(spec.width, spec.height) < 2 * kMinRoom + 2 * kWall + kWall) {
    throw InvalidArgument("world too small to host an internal wall with a door");
  }

  const int w = static_cast<int>(std::lround(spec.width / spec.resolution));
  const int h = static_cast<int>(std::lround(spec.height / spec.resolution));
  OccupancyGrid grid(w, h, spec.resolution, {0.0, 0.0});
  const double W = w * spec.resolution;
  const double H = h * spec.resolution;
  grid.FillRect({0, 0}, {W, kWall});
  grid.FillRect({0, H - kWall}, {W, H});
  grid.FillRect({0, 0}, {kWall, H});
  grid.FillRect({W - kWall, 0}, {W, H});
  if (spec.clutter == 0.0) return grid;

  std::mt19937_64 rng(DeriveSeed(seed, "rooms"));
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  struct Rect {
    Vec2 lo, hi;
    double w() const { return hi.x - lo.x; }
    double h() const { return hi.y - lo.y; }
  };
  std::vector<Rect> rooms{{{kWall, kWall}, {W - kWall, H - kWall}}};
  std::vector<Rect> doors;  // keep-out zones for clutter

  // Binary space partition: each internal wall splits one room and carries
  // one door, so the rooms stay connected.
  const int n_walls = 1 + static_cast<int>(rng() % 4);
  for (int k = 0; k < n_walls; ++k) {
    auto it = std::max_element(rooms.begin(), rooms.end(), [](const Rect& a, const Rect& b) {
      return a.w() * a.h() < b.w() * b.h();
    });
    Rect room = *it;
    const bool vertical = room.w() >= room.h();
    const double span = vertical ? room.w() : room.h();
    const double along = vertical ? room.h() : room.w();
    if (span < 2 * kMinRoom + kWall || along < kDoorMax + 0.6) break;
    rooms.erase(it);

    const double cut = uniform(kMinRoom, span - kMinRoom - kWall);
    const double door_w = uniform(kDoorMin, kDoorMax);
    const double door_at = uniform(0.3, along - 0.3 - door_w);
    if (vertical) {
      const double x0 = room.lo.x + cut;
      grid.FillRect({x0, room.lo.y}, {x0 + kWall, room.hi.y});
      const Vec2 dlo{x0, room.lo.y + door_at};
      const Vec2 dhi{x0 + kWall, room.lo.y + door_at + door_w};
      grid.FillRect({dlo.x - 0.01, dlo.y}, {dhi.x + 0.01, dhi.y}, false);
      doors.push_back({dlo, dhi});
      rooms.push_back({room.lo, {x0, room.hi.y}});
      rooms.push_back({{x0 + kWall, room.lo.y}, room.hi});
    } else {
      const double y0 = room.lo.y + cut;
      grid.FillRect({room.lo.x, y0}, {room.hi.x, y0 + kWall});
      const Vec2 dlo{room.lo.x + door_at, y0};
      const Vec2 dhi{room.lo.x + door_at + door_w, y0 + kWall};
      grid.FillRect({dlo.x, dlo.y - 0.01}, {dhi.x, dhi.y + 0.01}, false);
      doors.push_back({dlo, dhi});
      rooms.push_back({room.lo, {room.hi.x, y0}});
      rooms.push_back({{room.lo.x, y0 + kWall}, room.hi});
    }
  }

  const double interior = (W - 2 * kWall) * (H - 2 * kWall);
  const int n_boxes = static_cast<int>(std::lround(spec.clutter * interior / 0.3));
  auto free_fraction = [&](const OccupancyGrid& g) {
    auto shared = std::make_shared<const OccupancyGrid>(g);
    const InflatedGrid inflated(shared, kDefaultRobotRadius);
    const double cell_area = g.resolution() * g.resolution();
    return LargestComponent(inflated).size() * cell_area / interior;
  };
  constexpr double kDoorKeepOut = 0.8;
  for (int b = 0; b < n_boxes; ++b) {
    const double bw = uniform(0.3, 0.8);
    const double bh = uniform(0.3, 0.8);
    const Vec2 lo{uniform(kWall, W - kWall - bw), uniform(kWall, H - kWall - bh)};
    const Vec2 hi{lo.x + bw, lo.y + bh};
    bool near_door = false;
    for (const Rect& d : doors) {
      if (lo.x < d.hi.x + kDoorKeepOut && hi.x > d.lo.x - kDoorKeepOut &&
          lo.y < d.hi.y + kDoorKeepOut && hi.y > d.lo.y - kDoorKeepOut) {
        near_door = true;
      }
    }
    if (near_door) continue;
    OccupancyGrid candidate = grid;
    candidate.FillRect(lo, hi);
    if (free_fraction(candidate) >= 0.5) grid = std::move(candidate);
  }
  return grid;
}

std::vector<Episode> SampleEpisodes(const OccupancyGrid& grid, int count,
                                    std::uint64_t seed, double min_geodesic,
                                    double max_geodesic, double robot_radius) {
  auto shared = std::make_shared<const OccupancyGrid>(grid);
  auto inflated = std::make_shared<const InflatedGrid>(shared, robot_radius);
  const std::vector<std::size_t> region = LargestComponent(*inflated);
  if (region.empty()) throw Infeasible("world has no free space");

  std::mt19937_64 rng(DeriveSeed(seed, "episodes"));
  auto pick = [&]() {
    const std::size_t idx = region[rng() % region.size()];
    return grid.CellCenter({static_cast<int>(idx % grid.width()),
                            static_cast<int>(idx / grid.width())});
  };
  std::vector<Episode> episodes;
  constexpr int kMaxGoalTries = 200;
  for (int tries = 0; tries < kMaxGoalTries && static_cast<int>(episodes.size()) < count;
       ++tries) {
    const Vec2 goal = pick();
    const GeodesicField field(inflated, goal);
    std::vector<Vec2> candidates;
    for (std::size_t idx : region) {
      const double d = field.AtCell({static_cast<int>(idx % grid.width()),
                                     static_cast<int>(idx / grid.width())});
      if (d >= min_geodesic && d <= max_geodesic) {
        candidates.push_back(grid.CellCenter({static_cast<int>(idx % grid.width()),
                                              static_cast<int>(idx / grid.width())}));
      }
    }
    if (candidates.empty()) continue;
    Episode ep;
    ep.id = std::to_string(episodes.size());
    const Vec2 start = candidates[rng() % candidates.size()];
    ep.start = {start.x, start.y,
                NormalizeAngle(std::uniform_real_distribution<double>(-kPi, kPi)(rng))};
    ep.goal = goal;
    ep.geodesic = field.At(start);
    episodes.push_back(ep);
  }
  if (static_cast<int>(episodes.size()) < count) {
    throw Infeasible("could not sample enough episodes in the geodesic range");
  }
  return episodes;
}

std::string FormatGrid(const OccupancyGrid& grid) {
  std::ostringstream out;
  out.precision(17);
  out << grid.width() << ' ' << grid.height() << ' ' << grid.resolution() << ' '
      << grid.origin().x << ' ' << grid.origin().y << '\n';
  for (int y = grid.height() - 1; y >= 0; --y) {
    std::string row(grid.width(), '.');
    for (int x = 0; x < grid.width(); ++x) {
      if (grid.IsOccupied({x, y})) row[x] = '#';
    }
    out << row << '\n';
  }
  return out.str();
}

OccupancyGrid ParseGrid(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) throw DataError("grid: missing header (line 1)");
  std::istringstream hs(header);
  int w = 0, h = 0;
  double res = 0.0, ox = 0.0, oy = 0.0;
  if (!(hs >> w >> h >> res >> ox >> oy) || w <= 0 || h <= 0 || !(res > 0.0)) {
    throw DataError("grid: malformed header 'W H RES OX OY' (line 1)");
  }
  OccupancyGrid grid(w, h, res, {ox, oy});
  std::string row;
  for (int i = 0; i < h; ++i) {
    const int line = i + 2;
    if (!std::getline(in, row)) {
      throw DataError("grid: missing row at line " + std::to_string(line));
    }
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (static_cast<int>(row.size()) != w) {
      throw DataError("grid: row has wrong width at line " + std::to_string(line));
    }
    for (int x = 0; x < w; ++x) {
      if (row[x] == '#') {
        grid.SetOccupied({x, h - 1 - i});
      } else if (row[x] != '.') {
        throw DataError("grid: unexpected character at line " + std::to_string(line));
      }
    }
  }
  return grid;
}

OccupancyGrid LoadGrid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open grid file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return ParseGrid(buffer.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void SaveGrid(const OccupancyGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write grid file " + path.string());
  out << FormatGrid(grid);
}

OccupancyGrid LoadPgm(const std::filesystem::path& path, double resolution,
                      Vec2 origin) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open PGM file " + path.string());
  auto next_token = [&in]() {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw DataError("PGM: truncated header");
  };
  if (next_token() != "P5") throw DataError("PGM: only binary P5 is supported");
  const int w = std::stoi(next_token());
  const int h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (maxval <= 0 || maxval > 255) throw DataError("PGM: only 8-bit images are supported");
  in.get();  // single whitespace before raster
  std::vector<unsigned char> pixels(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(pixels.size())) {
    throw DataError("PGM: truncated raster");
  }
  OccupancyGrid grid(w, h, resolution, origin);
  for (int row = 0; row < h; ++row) {
    for (int x = 0; x < w; ++x) {
      if (pixels[static_cast<std::size_t>(row) * w + x] < 128) {
        grid.SetOccupied({x, h - 1 - row});
      }
    }
  }
  return grid;
}

std::vector<Episode> LoadEpisodes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open episodes file " + path.string());
  std::vector<Episode> episodes;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      Episode ep;
      const auto& id = j.at("id");
      ep.id = id.is_string() ? id.get<std::string>() : id.dump();
      ep.grid = j.at("grid").get<std::string>();
      const auto start = j.at("start").get<std::vector<double>>();
      const auto goal = j.at("goal").get<std::vector<double>>();
      if (start.size() != 3 || goal.size() != 2) {
        throw DataError("start must be [x,y,theta] and goal [x,y]");
      }
      ep.start = {start[0], start[1], start[2]};
      ep.goal = {goal[0], goal[1]};
      if (j.contains("geodesic")) ep.geodesic = j.at("geodesic").get<double>();
      episodes.push_back(ep);
    } catch (const std::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return episodes;
}

void SaveEpisodes(const std::vector<Episode>& episodes,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write episodes file " + path.string());
  for (const Episode& ep : episodes) {
    nlohmann::ordered_json j;
    j["id"] = ep.id;
    j["grid"] = ep.grid;
    j["start"] = {ep.start.x, ep.start.y, ep.start.theta};
    j["goal"] = {ep.goal.x, ep.goal.y};
    j["geodesic"] = ep.geodesic;
    out << j.dump() << '\n';
  }
}

}  // namespace kinonav::world
