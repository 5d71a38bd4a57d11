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

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cam/error.hpp"
#include "cam/image.hpp"

namespace cam::geom
{

template<typename Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
using Vec3 = Vec3T<double>;
using Vec2 = Eigen::Vector2d;
using PointList = std::vector<Vec3>;

/// Rigid transform; maps local coordinates into the parent frame.
struct Pose
{
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() {return {};}
  static Pose from_translation(const Vec3 & t) {return {Eigen::Quaterniond::Identity(), t};}

  Vec3 apply(const Vec3 & p) const {return rotation * p + translation;}
  Vec3 rotate(const Vec3 & d) const {return rotation * d;}

  Pose inverse() const
  {
    const Eigen::Quaterniond inv = rotation.conjugate();
    return {inv, -(inv * translation)};
  }

  Pose operator*(const Pose & other) const
  {
    Eigen::Quaterniond r = rotation * other.rotation;
    r.normalize();
    return {r, rotation * other.translation + translation};
  }
};

/// Camera frame looking from `eye` at `target`: +z forward, +x right, +y down.
Pose look_at(const Vec3 & eye, const Vec3 & target, const Vec3 & up);

/// Pinhole camera with a camera-to-world extrinsic pose.
struct CameraModel
{
  double fx = 200.0;
  double fy = 200.0;
  double cx = 80.0;
  double cy = 60.0;
  int width = 160;
  int height = 120;
  Pose camera_to_world;

  /// Throws ConfigError when the intrinsics are out of range.
  void validate() const;

  Vec3 origin() const {return camera_to_world.translation;}

  /// Ray through pixel (u, v) in world frame, scaled so the camera-frame z component is 1.
  Vec3 pixel_ray(double u, double v) const;

  /// Pixel coordinates and z-depth; empty when the point is behind the image plane.
  std::optional<std::pair<Vec2, double>> project(const Vec3 & world) const;
};

/// One world-frame point per masked pixel with finite positive depth, in raster order.
PointList unproject(const DepthImage & depth, const MaskImage & mask, const CameraModel & cam);

// ---------------------------------------------------------------------------
// Analytic ray casting

struct Box
{
  Vec3 half_extents;
};

/// Cylinder aligned with its local z axis, centered at the local origin.
struct Cylinder
{
  double radius;
  double height;
};

using Shape = std::variant<Box, Cylinder>;

struct Primitive
{
  Pose pose;
  Shape shape;
  std::int32_t instance_id = kNoLabel;
  std::int32_t part_id = kNoLabel;
};

struct RayHit
{
  double t;
  std::size_t primitive;
  Vec3 point;
};

/// Ray parameter of the entry hit on a shape in its local frame, or nothing.
std::optional<double> intersect_local(const Shape & shape, const Vec3 & origin, const Vec3 & dir);

/// Nearest hit with t > 0 along origin + t * dir.
std::optional<RayHit> cast_ray(
  const Vec3 & origin, const Vec3 & dir, std::span<const Primitive> scene);

struct RenderedView
{
  DepthImage depth;
  LabelImage instance_ids;
  LabelImage part_ids;
};

/// Depth plus instance and part labels per pixel. Misses are depth 0 and kNoLabel.
RenderedView raycast_depth(std::span<const Primitive> scene, const CameraModel & cam);

/// True when a local-frame point lies inside (or on) the shape.
bool shape_contains(const Shape & shape, const Vec3 & local, double slack = 1e-9);

// ---------------------------------------------------------------------------
// Least-squares fitting

/// Flips `v` so z >= 0; on a z tie prefers x >= 0, then y >= 0.
template<typename Scalar>
Vec3T<Scalar> canonical_sign(Vec3T<Scalar> v)
{
  const Scalar tie = Scalar(1e-12);
  for (int axis : {2, 0, 1}) {
    if (v[axis] > tie) {
      return v;
    }
    if (v[axis] < -tie) {
      return -v;
    }
  }
  return v;
}

template<typename Scalar>
struct AxisFit
{
  Vec3T<Scalar> axis;      // plane normal or line direction, unit length
  Vec3T<Scalar> centroid;
  Scalar rms;              // RMS of the residual distances
};

namespace detail
{

/// Centroid plus the SVD of the centered data matrix. Singular values come out
/// in decreasing order with the matching right singular vectors as columns of V.
template<typename Scalar>
struct CenteredSvd
{
  Vec3T<Scalar> centroid;
  Vec3T<Scalar> singular_values;
  Eigen::Matrix<Scalar, 3, 3> v;
};

template<typename Scalar>
CenteredSvd<Scalar> centered_svd(std::span<const Vec3T<Scalar>> points)
{
  Vec3T<Scalar> c = Vec3T<Scalar>::Zero();
  for (const auto & p : points) {
    c += p;
  }
  c /= Scalar(points.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 3> a(static_cast<Eigen::Index>(points.size()), 3);
  for (std::size_t i = 0; i < points.size(); ++i) {
    a.row(static_cast<Eigen::Index>(i)) = (points[i] - c).transpose();
  }
  Eigen::JacobiSVD<Eigen::Matrix<Scalar, Eigen::Dynamic, 3>> svd(a, Eigen::ComputeFullV);
  Vec3T<Scalar> sv = Vec3T<Scalar>::Zero();
  const auto & raw = svd.singularValues();
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    sv[i] = raw[i];
  }
  return {c, sv, svd.matrixV()};
}

}  // namespace detail

/// Least-squares plane through the points: the normal is the right singular
/// vector of the centered data with the smallest singular value.
template<typename Scalar>
AxisFit<Scalar> fit_plane(std::span<const Vec3T<Scalar>> points)
{
  if (points.size() < 3) {
    throw DegenerateGeometry("fit_plane needs at least 3 points");
  }
  const auto s = detail::centered_svd(points);
  const Scalar tol = Scalar(1e-12) * s.singular_values[0];
  if (!(s.singular_values[0] > Scalar(0)) ||
    (s.singular_values[1] < tol && s.singular_values[2] < tol))
  {
    throw DegenerateGeometry("fit_plane: points are collinear");
  }
  const Vec3T<Scalar> n = canonical_sign<Scalar>(s.v.col(2).normalized());
  Scalar sq = 0;
  for (const auto & p : points) {
    const Scalar r = (p - s.centroid).dot(n);
    sq += r * r;
  }
  using std::sqrt;
  return {n, s.centroid, sqrt(sq / Scalar(points.size()))};
}

/// Least-squares line: direction is the dominant right singular vector.
template<typename Scalar>
AxisFit<Scalar> fit_line(std::span<const Vec3T<Scalar>> points)
{
  if (points.size() < 2) {
    throw DegenerateGeometry("fit_line needs at least 2 points");
  }
  const auto s = detail::centered_svd(points);
  if (!(s.singular_values[0] > Scalar(1e-12) * (Scalar(1) + s.centroid.norm()))) {
    throw DegenerateGeometry("fit_line: points are coincident");
  }
  const Vec3T<Scalar> d = canonical_sign<Scalar>(s.v.col(0).normalized());
  Scalar sq = 0;
  for (const auto & p : points) {
    const Vec3T<Scalar> off = p - s.centroid;
    sq += (off - off.dot(d) * d).squaredNorm();
  }
  using std::sqrt;
  return {d, s.centroid, sqrt(sq / Scalar(points.size()))};
}

inline AxisFit<double> fit_plane(const PointList & points)
{
  return fit_plane<double>(std::span<const Vec3>(points));
}

inline AxisFit<double> fit_line(const PointList & points)
{
  return fit_line<double>(std::span<const Vec3>(points));
}

/// Unsigned angle in [0, pi]. Uses atan2 of the cross and dot products, which
/// stays accurate for nearly parallel vectors.
template<typename Scalar>
Scalar angle_between(const Vec3T<Scalar> & u, const Vec3T<Scalar> & v)
{
  const Scalar nu = u.norm();
  const Scalar nv = v.norm();
  if (!(nu > Scalar(0)) || !(nv > Scalar(0))) {
    throw DegenerateGeometry("angle_between: zero-length vector");
  }
  const Vec3T<Scalar> a = u / nu;
  const Vec3T<Scalar> b = v / nv;
  using std::atan2;
  return atan2(a.cross(b).norm(), std::clamp(a.dot(b), Scalar(-1), Scalar(1)));
}

/// Right-handed orthonormal frame of principal axes, columns ordered by
/// decreasing variance. Column signs follow canonical_sign.
Eigen::Matrix3d principal_frame(std::span<const Vec3> points);

// ---------------------------------------------------------------------------
// Voxel grid

using CellIndex = std::array<int, 3>;

struct VoxelCell
{
  std::vector<std::size_t> indices;  // positions in the voxelized input
  PointList points;
};

struct VoxelGrid
{
  Vec3 origin = Vec3::Zero();
  Vec3 cell_size = Vec3::Ones();
  CellIndex cells_per_axis{1, 1, 1};
  std::map<CellIndex, VoxelCell> cells;

  Vec3 cell_min(const CellIndex & c) const
  {
    return origin + Vec3(c[0] * cell_size.x(), c[1] * cell_size.y(), c[2] * cell_size.z());
  }

  /// Half-open membership test for the cell box.
  bool cell_contains(const CellIndex & c, const Vec3 & p) const;
};

/// Grid over the inflated bounding box of the points with the given cell counts.
VoxelGrid voxelize(std::span<const Vec3> points, const CellIndex & cells_per_axis);

// ---------------------------------------------------------------------------
// DBSCAN

inline constexpr int kNoise = -1;

struct ClusterLabeling
{
  std::vector<int> labels;  // cluster index >= 0 or kNoise
  int cluster_count = 0;
  double eps = 0.0;
  std::size_t min_pts = 0;
};

/// Deterministic DBSCAN. A point is core when at least min_pts points (itself
/// included) lie within eps. Points are seeded in input order and border points
/// keep the first cluster that reaches them.
ClusterLabeling dbscan(std::span<const Vec3> points, double eps, std::size_t min_pts);

}  // namespace cam::geom
