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

// Depth cameras to planar laser scan: back-projection, obstacle height
// filtering, azimuth binning and motion-registered fusion of recent clouds.
//
// Base frame: x forward, y left, z up. The z coordinate is the height.
// Camera optical frame: x right, y down, z along the optical axis.

#ifndef KINONAV_SCANFUSE_H_
#define KINONAV_SCANFUSE_H_

#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <span>
#include <vector>

#include "kinonav/common.h"
#include "kinonav/world.h"

namespace kinonav::scanfuse {

inline constexpr int kNumBins = 180;

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double height() const { return z; }
  friend bool operator==(const Point3&, const Point3&) = default;
};

using PointCloud = std::vector<Point3>;

// Rigid transform p -> rotation * p + translation.
struct Rigid3 {
  std::array<std::array<double, 3>, 3> rotation = {
      {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
  std::array<double, 3> translation = {0.0, 0.0, 0.0};

  Point3 Apply(const Point3& p) const;
};

struct CameraModel {
  int width = 80;
  int height = 60;
  double fx = 40.0;
  double fy = 40.0;
  double cx = 40.0;
  double cy = 30.0;
  // Upright optical frame to base frame.
  Rigid3 extrinsic;
  // Sensor rolled 90 degrees about the optical axis: image columns run
  // vertically in the world.
  bool portrait = false;

  void Validate() const;
  // Horizontal field of view in the world, accounting for `portrait`.
  double HorizontalFov() const;
};

// Level camera looking along `yaw` (base frame) with its optical center at
// (x, y, height).
Rigid3 LevelMount(double yaw, double height, double x = 0.0, double y = 0.0);

// Three portrait cameras facing forward, left-forward and right-forward plus a
// landscape camera facing backward, all 0.25 m above the floor.
std::vector<CameraModel> DefaultRig();

// Row-major depth in meters; 0 means no return.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<float> depth;

  float at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
};

// Pixel (u, v) in the raw sensor image back-projects to
// ((u - cx) d / fx, (v - cy) d / fy, d); portrait sensors are then rolled
// upright before the extrinsic is applied. Throws InvalidArgument when the
// image size differs from the camera's.
PointCloud DepthToPoints(const DepthImage& image, const CameraModel& cam);

// Keeps points with min_height <= z <= max_height.
PointCloud HeightFilter(const PointCloud& cloud, double min_height = 0.05,
                        double max_height = 1.2);

struct FusedScan {
  std::vector<double> ranges;
  double max_range = world::kDefaultMaxRange;
};

// Bin i covers azimuths [-pi + i w, -pi + (i + 1) w), w = 2 pi / n_bins,
// and holds the smallest ground-plane radius of its points (max_range when
// empty or farther). Points on the vertical axis are ignored.
FusedScan BinScan(const PointCloud& cloud, int n_bins = kNumBins,
                  double max_range = world::kDefaultMaxRange);

struct RegisteredCloud {
  PointCloud cloud;
  // Pose of the capture frame expressed in the current frame.
  Pose2 motion;
};

// Merges the newest `n_keep` clouds of `history` (oldest first) into the
// current frame and bins them.
FusedScan FuseRolling(std::span<const RegisteredCloud> history, int n_keep,
                      int n_bins = kNumBins,
                      double max_range = world::kDefaultMaxRange);

// Rolling buffer of clouds tagged with the odometry pose at capture time.
class ScanFuser {
 public:
  explicit ScanFuser(int n_keep, int n_bins = kNumBins,
                     double max_range = world::kDefaultMaxRange);

  void Add(PointCloud cloud, const Pose2& capture_pose);
  FusedScan Fuse(const Pose2& current_pose) const;

 private:
  struct Entry {
    PointCloud cloud;
    Pose2 pose;
  };
  int n_keep_;
  int n_bins_;
  double max_range_;
  std::deque<Entry> buffer_;
};

// `capture` expressed in the frame of `current`.
Pose2 RelativePose(const Pose2& current, const Pose2& capture);

// Ray-traced depth of an extruded grid world: occupied cells are boxes of
// `wall_height` standing on the floor z = 0; the floor returns depth too.
DepthImage RenderDepth(const world::OccupancyGrid& grid, const Pose2& robot,
                       const CameraModel& cam, double wall_height = 2.0,
                       double max_range = world::kDefaultMaxRange);

// Binary raster: one text line "width height fx fy cx cy portrait frame_id",
// then width * height little-endian float32 depths, row-major.
struct DepthRaster {
  DepthImage image;
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  bool portrait = false;
  std::int64_t frame_id = 0;
};

DepthRaster ReadDepthRaster(const std::filesystem::path& path);
void WriteDepthRaster(const DepthRaster& raster, const std::filesystem::path& path);

}  // namespace kinonav::scanfuse

#endif  // KINONAV_SCANFUSE_H_
