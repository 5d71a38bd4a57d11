// Copyright (c) 2026 The camctl Authors
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

#include "cam/geom3d.hpp"

#include <cmath>
#include <limits>

namespace cam::geom
{

Pose look_at(const Vec3 & eye, const Vec3 & target, const Vec3 & up)
{
  const Vec3 z = (target - eye).normalized();
  Vec3 x = z.cross(up);
  if (x.norm() < 1e-9) {
    throw DegenerateGeometry("look_at: up vector parallel to view direction");
  }
  x.normalize();
  const Vec3 y = z.cross(x);
  Eigen::Matrix3d r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  Pose pose;
  pose.rotation = Eigen::Quaterniond(r).normalized();
  pose.translation = eye;
  return pose;
}

void CameraModel::validate() const
{
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw ConfigError("camera focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw ConfigError("camera resolution must be positive");
  }
  if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height)) {
    throw ConfigError("camera principal point must lie inside the image");
  }
  if (std::abs(camera_to_world.rotation.norm() - 1.0) > 1e-9) {
    throw ConfigError("camera extrinsic rotation is not a unit quaternion");
  }
}

Vec3 CameraModel::pixel_ray(double u, double v) const
{
  return camera_to_world.rotate(Vec3((u - cx) / fx, (v - cy) / fy, 1.0));
}

std::optional<std::pair<Vec2, double>> CameraModel::project(const Vec3 & world) const
{
  const Vec3 c = camera_to_world.inverse().apply(world);
  if (!(c.z() > 1e-9)) {
    return std::nullopt;
  }
  return std::make_pair(Vec2(fx * c.x() / c.z() + cx, fy * c.y() / c.z() + cy), c.z());
}

PointList unproject(const DepthImage & depth, const MaskImage & mask, const CameraModel & cam)
{
  if (!depth.same_shape(cam.width, cam.height) || !mask.same_shape(cam.width, cam.height)) {
    throw DimensionMismatch("unproject: image size does not match the camera resolution");
  }
  PointList out;
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      if (!mask.at(u, v)) {
        continue;
      }
      const double d = depth.at(u, v);
      if (!std::isfinite(d) || d <= 0.0) {
        continue;
      }
      const Vec3 local((u - cam.cx) / cam.fx * d, (v - cam.cy) / cam.fy * d, d);
      out.push_back(cam.camera_to_world.apply(local));
    }
  }
  return out;
}

Eigen::Matrix3d principal_frame(std::span<const Vec3> points)
{
  if (points.empty()) {
    throw EmptyPointSet("principal_frame: no points");
  }
  const auto s = detail::centered_svd(points);
  Eigen::Matrix3d frame;
  for (int i = 0; i < 3; ++i) {
    frame.col(i) = canonical_sign<double>(s.v.col(i).normalized());
  }
  if (frame.determinant() < 0.0) {
    frame.col(1) = -frame.col(1);
  }
  return frame;
}

}  // namespace cam::geom
