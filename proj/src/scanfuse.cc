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

#include "kinonav/scanfuse.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace kinonav::scanfuse {
namespace {

static_assert(std::endian::native == std::endian::little,
              "depth rasters are read and written in host byte order");

// Raw sensor ray (z = 1) to the upright optical frame.
Point3 Upright(double xr, double yr, double zr, bool portrait) {
  if (!portrait) return {xr, yr, zr};
  return {-yr, xr, zr};
}

Point3 Rotate(const Rigid3& t, const Point3& p) {
  const auto& r = t.rotation;
  return {r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z,
          r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z,
          r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z};
}

}  // namespace

Point3 Rigid3::Apply(const Point3& p) const {
  const Point3 q = Rotate(*this, p);
  return {q.x + translation[0], q.y + translation[1], q.z + translation[2]};
}

void CameraModel::Validate() const {
  if (width <= 0 || height <= 0) throw InvalidArgument("camera size must be positive");
  if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidArgument("camera focal lengths must be > 0");
}

double CameraModel::HorizontalFov() const {
  if (portrait) return 2.0 * std::atan(0.5 * height / fy);
  return 2.0 * std::atan(0.5 * width / fx);
}

Rigid3 LevelMount(double yaw, double height, double x, double y) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  // Columns: optical right, down and forward in the base frame.
  Rigid3 t;
  t.rotation = {{{s, 0.0, c}, {-c, 0.0, s}, {0.0, -1.0, 0.0}}};
  t.translation = {x, y, height};
  return t;
}

std::vector<CameraModel> DefaultRig() {
  constexpr double kMountHeight = 0.25;
  CameraModel portrait;
  portrait.portrait = true;
  const double side_yaw = portrait.HorizontalFov();
  std::vector<CameraModel> rig;
  for (double yaw : {0.0, side_yaw, -side_yaw}) {
    CameraModel cam = portrait;
    cam.extrinsic = LevelMount(yaw, kMountHeight);
    rig.push_back(cam);
  }
  CameraModel rear;
  rear.extrinsic = LevelMount(kPi, kMountHeight);
  rig.push_back(rear);
  return rig;
}

PointCloud DepthToPoints(const DepthImage& image, const CameraModel& cam) {
  cam.Validate();
  if (image.width != cam.width || image.height != cam.height ||
      image.depth.size() != static_cast<std::size_t>(cam.width) * cam.height) {
    throw InvalidArgument("depth image size does not match the camera");
  }
  PointCloud cloud;
  for (int v = 0; v < image.height; ++v) {
    for (int u = 0; u < image.width; ++u) {
      const double d = image.at(u, v);
      if (!(d > 0.0) || !std::isfinite(d)) continue;
      const Point3 raw{(u - cam.cx) * d / cam.fx, (v - cam.cy) * d / cam.fy, d};
      cloud.push_back(cam.extrinsic.Apply(Upright(raw.x, raw.y, raw.z, cam.portrait)));
    }
  }
  return cloud;
}

PointCloud HeightFilter(const PointCloud& cloud, double min_height,
                        double max_height) {
  if (min_height > max_height) throw InvalidArgument("height filter bounds reversed");
  PointCloud kept;
  for (const Point3& p : cloud) {
    if (p.height() >= min_height && p.height() <= max_height) kept.push_back(p);
  }
  return kept;
}

FusedScan BinScan(const PointCloud& cloud, int n_bins, double max_range) {
  if (n_bins <= 0) throw InvalidArgument("n_bins must be positive");
  if (!(max_range > 0.0)) throw InvalidArgument("max_range must be positive");
  FusedScan scan{std::vector<double>(n_bins, max_range), max_range};
  const double width = 2.0 * kPi / n_bins;
  for (const Point3& p : cloud) {
    const double r = std::hypot(p.x, p.y);
    if (!(r > 0.0)) continue;
    double az = std::atan2(p.y, p.x);
    if (az >= kPi) az -= 2.0 * kPi;
    int bin = static_cast<int>(std::floor((az + kPi) / width));
    bin = std::clamp(bin, 0, n_bins - 1);
    scan.ranges[bin] = std::min(scan.ranges[bin], r);
  }
  return scan;
}

FusedScan FuseRolling(std::span<const RegisteredCloud> history, int n_keep,
                      int n_bins, double max_range) {
  if (n_keep < 1) throw InvalidArgument("n_keep must be >= 1");
  const std::size_t first =
      history.size() > static_cast<std::size_t>(n_keep) ? history.size() - n_keep : 0;
  PointCloud merged;
  for (std::size_t i = first; i < history.size(); ++i) {
    const Pose2& m = history[i].motion;
    for (const Point3& p : history[i].cloud) {
      const Vec2 q = TransformPoint(m, {p.x, p.y});
      merged.push_back({q.x, q.y, p.z});
    }
  }
  return BinScan(merged, n_bins, max_range);
}

Pose2 RelativePose(const Pose2& current, const Pose2& capture) {
  const Vec2 p = InverseTransformPoint(current, capture.position());
  return {p.x, p.y, NormalizeAngle(capture.theta - current.theta)};
}

ScanFuser::ScanFuser(int n_keep, int n_bins, double max_range)
    : n_keep_(n_keep), n_bins_(n_bins), max_range_(max_range) {
  if (n_keep < 1) throw InvalidArgument("n_keep must be >= 1");
}

void ScanFuser::Add(PointCloud cloud, const Pose2& capture_pose) {
  buffer_.push_back({std::move(cloud), capture_pose});
  while (buffer_.size() > static_cast<std::size_t>(n_keep_)) buffer_.pop_front();
}

FusedScan ScanFuser::Fuse(const Pose2& current_pose) const {
  std::vector<RegisteredCloud> history;
  history.reserve(buffer_.size());
  for (const Entry& e : buffer_) {
    history.push_back({e.cloud, RelativePose(current_pose, e.pose)});
  }
  return FuseRolling(history, n_keep_, n_bins_, max_range_);
}

DepthImage RenderDepth(const world::OccupancyGrid& grid, const Pose2& robot,
                       const CameraModel& cam, double wall_height,
                       double max_range) {
  cam.Validate();
  DepthImage image{cam.width, cam.height,
                   std::vector<float>(static_cast<std::size_t>(cam.width) * cam.height, 0.0f)};
  const Point3 mount{cam.extrinsic.translation[0], cam.extrinsic.translation[1],
                     cam.extrinsic.translation[2]};
  const Vec2 origin = TransformPoint(robot, {mount.x, mount.y});
  const double oz = mount.z;
  const double c = std::cos(robot.theta);
  const double s = std::sin(robot.theta);
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const Point3 ray_base = Rotate(
          cam.extrinsic,
          Upright((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0, cam.portrait));
      // Parameterized so that t is the depth along the optical axis.
      const Vec2 dh{c * ray_base.x - s * ray_base.y, s * ray_base.x + c * ray_base.y};
      const double dz = ray_base.z;
      const double horizontal = dh.Norm();
      double best = std::numeric_limits<double>::infinity();
      if (horizontal > 0.0) {
        const double r = world::Raycast(grid, origin, std::atan2(dh.y, dh.x), max_range);
        if (r < max_range) {
          const double t = r / horizontal;
          const double z = oz + t * dz;
          if (z >= 0.0 && z <= wall_height) best = t;
        }
      }
      if (dz < 0.0) {
        const double t = -oz / dz;
        if (t * horizontal <= max_range) best = std::min(best, t);
      }
      if (std::isfinite(best)) {
        image.depth[static_cast<std::size_t>(v) * cam.width + u] = static_cast<float>(best);
      }
    }
  }
  return image;
}

DepthRaster ReadDepthRaster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open depth raster " + path.string());
  std::string header;
  if (!std::getline(in, header)) throw DataError(path.string() + ": missing header");
  std::istringstream hs(header);
  DepthRaster raster;
  int portrait = 0;
  if (!(hs >> raster.image.width >> raster.image.height >> raster.fx >> raster.fy >>
        raster.cx >> raster.cy >> portrait >> raster.frame_id) ||
      raster.image.width <= 0 || raster.image.height <= 0 ||
      (portrait != 0 && portrait != 1)) {
    throw DataError(path.string() +
                    ": malformed header, expected 'width height fx fy cx cy portrait "
                    "frame_id'");
  }
  raster.portrait = portrait == 1;
  const std::size_t n = static_cast<std::size_t>(raster.image.width) * raster.image.height;
  raster.image.depth.resize(n);
  in.read(reinterpret_cast<char*>(raster.image.depth.data()),
          static_cast<std::streamsize>(n * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(n * sizeof(float))) {
    throw DataError(path.string() + ": truncated depth data");
  }
  for (float d : raster.image.depth) {
    if (!(d >= 0.0f) || !std::isfinite(d)) {
      throw DataError(path.string() + ": depth values must be finite and >= 0");
    }
  }
  return raster;
}

void WriteDepthRaster(const DepthRaster& raster, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write depth raster " + path.string());
  std::ostringstream header;
  header.precision(17);
  header << raster.image.width << ' ' << raster.image.height << ' ' << raster.fx << ' '
         << raster.fy << ' ' << raster.cx << ' ' << raster.cy << ' '
         << (raster.portrait ? 1 : 0) << ' ' << raster.frame_id << '\n';
  out << header.str();
  out.write(reinterpret_cast<const char*>(raster.image.depth.data()),
            static_cast<std::streamsize>(raster.image.depth.size() * sizeof(float)));
}

}  // namespace kinonav::scanfuse
