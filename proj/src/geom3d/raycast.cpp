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

namespace
{

constexpr double kMinT = 1e-9;

std::optional<double> hit_box(const Box & box, const Vec3 & o, const Vec3 & d)
{
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const double h = box.half_extents[i];
    if (std::abs(d[i]) < 1e-15) {
      if (o[i] < -h || o[i] > h) {
        return std::nullopt;
      }
      continue;
    }
    double t1 = (-h - o[i]) / d[i];
    double t2 = (h - o[i]) / d[i];
    if (t1 > t2) {
      std::swap(t1, t2);
    }
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
  }
  if (tmax < tmin || tmax < kMinT) {
    return std::nullopt;
  }
  return tmin > kMinT ? tmin : tmax;
}

std::optional<double> hit_cylinder(const Cylinder & cyl, const Vec3 & o, const Vec3 & d)
{
  const double half = 0.5 * cyl.height;
  const double r2 = cyl.radius * cyl.radius;
  double best = std::numeric_limits<double>::infinity();

  const double a = d.x() * d.x() + d.y() * d.y();
  if (a > 1e-18) {
    const double b = 2.0 * (o.x() * d.x() + o.y() * d.y());
    const double c = o.x() * o.x() + o.y() * o.y() - r2;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        if (t > kMinT && t < best && std::abs(o.z() + t * d.z()) <= half) {
          best = t;
        }
      }
    }
  }
  if (std::abs(d.z()) > 1e-15) {
    for (double zc : {-half, half}) {
      const double t = (zc - o.z()) / d.z();
      if (t > kMinT && t < best) {
        const double x = o.x() + t * d.x();
        const double y = o.y() + t * d.y();
        if (x * x + y * y <= r2) {
          best = t;
        }
      }
    }
  }
  if (!std::isfinite(best)) {
    return std::nullopt;
  }
  return best;
}

double bounding_radius(const Shape & shape)
{
  if (const auto * b = std::get_if<Box>(&shape)) {
    return b->half_extents.norm();
  }
  const auto & c = std::get<Cylinder>(shape);
  return std::hypot(c.radius, 0.5 * c.height);
}

struct PreparedPrimitive
{
  Pose world_to_local;
  Vec3 center;
  double radius;
};

std::vector<PreparedPrimitive> prepare(std::span<const Primitive> scene)
{
  std::vector<PreparedPrimitive> out;
  out.reserve(scene.size());
  for (const auto & p : scene) {
    out.push_back({p.pose.inverse(), p.pose.translation, bounding_radius(p.shape)});
  }
  return out;
}

std::optional<RayHit> cast_prepared(
  const Vec3 & origin, const Vec3 & dir, std::span<const Primitive> scene,
  const std::vector<PreparedPrimitive> & prep)
{
  std::optional<RayHit> best;
  const double dir_sq = dir.squaredNorm();
  for (std::size_t i = 0; i < scene.size(); ++i) {
    // bounding-sphere rejection
    const Vec3 oc = prep[i].center - origin;
    const double along = oc.dot(dir);
    const double perp_sq = oc.squaredNorm() - along * along / dir_sq;
    if (perp_sq > prep[i].radius * prep[i].radius) {
      continue;
    }
    const auto t = intersect_local(
      scene[i].shape, prep[i].world_to_local.apply(origin), prep[i].world_to_local.rotate(dir));
    if (t && (!best || *t < best->t)) {
      best = RayHit{*t, i, origin + *t * dir};
    }
  }
  return best;
}

}  // namespace

std::optional<double> intersect_local(const Shape & shape, const Vec3 & origin, const Vec3 & dir)
{
  if (const auto * b = std::get_if<Box>(&shape)) {
    return hit_box(*b, origin, dir);
  }
  return hit_cylinder(std::get<Cylinder>(shape), origin, dir);
}

bool shape_contains(const Shape & shape, const Vec3 & p, double slack)
{
  if (const auto * b = std::get_if<Box>(&shape)) {
    return (p.cwiseAbs() - b->half_extents).maxCoeff() <= slack;
  }
  const auto & c = std::get<Cylinder>(shape);
  return std::abs(p.z()) <= 0.5 * c.height + slack &&
         std::hypot(p.x(), p.y()) <= c.radius + slack;
}

std::optional<RayHit> cast_ray(
  const Vec3 & origin, const Vec3 & dir, std::span<const Primitive> scene)
{
  return cast_prepared(origin, dir, scene, prepare(scene));
}

RenderedView raycast_depth(std::span<const Primitive> scene, const CameraModel & cam)
{
  RenderedView view{
    DepthImage(cam.width, cam.height, 0.0),
    LabelImage(cam.width, cam.height, kNoLabel),
    LabelImage(cam.width, cam.height, kNoLabel)};
  if (scene.empty()) {
    return view;
  }
  const auto prep = prepare(scene);
  const Vec3 origin = cam.origin();
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      // The camera-frame z of the ray is 1, so t is the z-depth.
      const Vec3 dir = cam.pixel_ray(u, v);
      const auto hit = cast_prepared(origin, dir, scene, prep);
      if (!hit) {
        continue;
      }
      view.depth.at(u, v) = hit->t;
      view.instance_ids.at(u, v) = scene[hit->primitive].instance_id;
      view.part_ids.at(u, v) = scene[hit->primitive].part_id;
    }
  }
  return view;
}

}  // namespace cam::geom
