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

#include "cam/elementizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cam::elem
{

PointList fuse_views(
  const MaskBundle & bundle, std::span<const DepthImage> depths,
  std::span<const CameraModel> cams)
{
  if (cams.empty()) {
    throw ConfigError("fuse_views needs at least one view");
  }
  if (depths.size() != cams.size()) {
    throw DimensionMismatch("fuse_views: depth image count differs from camera count");
  }
  bundle.validate(cams);
  PointList cloud;
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const auto pts = geom::unproject(depths[i], bundle.views[i].part, cams[i]);
    cloud.insert(cloud.end(), pts.begin(), pts.end());
  }
  if (cloud.empty()) {
    throw EmptyPointSet("no masked pixels for '" + bundle.entity + "/" + bundle.part + "'");
  }
  return cloud;
}

PointList filter_outliers(std::span<const Vec3> points, std::size_t k, double std_ratio)
{
  if (k < 1) {
    throw ConfigError("filter_outliers: k must be at least 1");
  }
  const std::size_t n = points.size();
  if (n <= k) {
    return PointList(points.begin(), points.end());
  }
  std::vector<double> stat(n);
  std::vector<double> d;
  d.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) {
        d.push_back((points[i] - points[j]).norm());
      }
    }
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    stat[i] = std::accumulate(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), 0.0) /
      static_cast<double>(k);
  }
  const double mean = std::accumulate(stat.begin(), stat.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double s : stat) {
    var += (s - mean) * (s - mean);
  }
  const double threshold = mean + std_ratio * std::sqrt(var / static_cast<double>(n));
  PointList kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (stat[i] <= threshold) {
      kept.push_back(points[i]);
    }
  }
  return kept;
}

geom::CellIndex cells_for_type(const ElementType & type)
{
  switch (type.kind) {
    case ElementKind::Point:
      return {1, 1, 1};
    case ElementKind::Line:
      return {2, 1, 1};
    case ElementKind::Surface:
      return {2, 2, 1};
    case ElementKind::PointSet: {
        int c = 1;
        while (c * c * c < type.k) {
          ++c;
        }
        return {c, c, c};
      }
  }
  return {1, 1, 1};
}

namespace
{

Vec3 centroid_of(std::span<const Vec3> pts)
{
  Vec3 c = Vec3::Zero();
  for (const auto & p : pts) {
    c += p;
  }
  return c / static_cast<double>(pts.size());
}

/// Centroid of the largest DBSCAN cluster in a cell (ties: lowest label). Falls
/// back to the plain centroid when the cell is too sparse to form a cluster.
Vec3 cell_representative(std::span<const Vec3> pts, const PipelineParams & params)
{
  if (pts.size() == 1) {
    return pts.front();
  }
  // k-distance heuristic with k = minPts; plain nearest-neighbor spacing
  // collapses when several views interleave their sample grids
  const std::size_t k = std::min(std::max<std::size_t>(params.dbscan_min_pts, 1), pts.size() - 1);
  double kd_sum = 0.0;
  std::vector<double> d(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      d[j] = (pts[i] - pts[j]).norm();
    }
    // d[i] == 0 sorts first, so index k is the k-th neighbor
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    kd_sum += d[k];
  }
  const double eps = params.dbscan_eps_scale * kd_sum / static_cast<double>(pts.size());
  if (!(eps > 0.0)) {
    return centroid_of(pts);
  }
  const auto labels = geom::dbscan(pts, eps, params.dbscan_min_pts);
  if (labels.cluster_count == 0) {
    return centroid_of(pts);
  }
  std::vector<std::size_t> sizes(static_cast<std::size_t>(labels.cluster_count), 0);
  for (int l : labels.labels) {
    if (l >= 0) {
      ++sizes[static_cast<std::size_t>(l)];
    }
  }
  const int best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  Vec3 c = Vec3::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (labels.labels[i] == best) {
      c += pts[i];
    }
  }
  return c / static_cast<double>(sizes[static_cast<std::size_t>(best)]);
}

/// Splits a group at its median along the axis of largest extent. Returns false
/// when every member coincides.
bool split_group(const PointList & group, PointList & lower, PointList & upper)
{
  Vec3 lo = group.front();
  Vec3 hi = group.front();
  for (const auto & p : group) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (!((hi - lo)[axis] > 1e-12) || group.size() < 2) {
    return false;
  }
  std::vector<std::size_t> order(group.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return group[a][axis] < group[b][axis];
    });
  const std::size_t half = group.size() / 2;
  lower.clear();
  upper.clear();
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < half ? lower : upper).push_back(group[order[i]]);
  }
  return true;
}

/// Keeps the `count` points farthest from their mutual centroid, in input order.
PointList keep_most_spread(const PointList & reps, std::size_t count)
{
  const Vec3 c = centroid_of(reps);
  std::vector<std::size_t> order(reps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return (reps[a] - c).norm() > (reps[b] - c).norm();
    });
  order.resize(count);
  std::sort(order.begin(), order.end());
  PointList out;
  for (auto i : order) {
    out.push_back(reps[i]);
  }
  return out;
}

}  // namespace

PointList representative_points(
  std::span<const Vec3> cloud, const ElementType & type, const PipelineParams & params)
{
  if (cloud.empty()) {
    throw EmptyPointSet("representative_points: empty cloud");
  }
  const bool aligned = type.kind == ElementKind::Line || type.kind == ElementKind::Surface;
  const Eigen::Matrix3d frame = aligned ? geom::principal_frame(cloud) :
    Eigen::Matrix3d::Identity();

  PointList canonical;
  canonical.reserve(cloud.size());
  for (const auto & p : cloud) {
    canonical.push_back(frame.transpose() * p);
  }

  const auto grid = geom::voxelize(canonical, cells_for_type(type));
  std::vector<PointList> groups;
  for (const auto & [idx, cell] : grid.cells) {
    groups.push_back(cell.points);
  }

  const auto required = static_cast<std::size_t>(type.required_points());
  while (groups.size() < required) {
    std::size_t largest = 0;
    for (std::size_t g = 1; g < groups.size(); ++g) {
      if (groups[g].size() > groups[largest].size()) {
        largest = g;
      }
    }
    PointList lower, upper;
    if (!split_group(groups[largest], lower, upper)) {
      throw IrreducibleCloud(
              "cannot produce " + std::to_string(required) + " points for a " +
              type.to_string() + " element");
    }
    groups[largest] = std::move(lower);
    groups.insert(groups.begin() + static_cast<std::ptrdiff_t>(largest) + 1, std::move(upper));
  }

  PointList reps;
  for (const auto & g : groups) {
    reps.push_back(cell_representative(g, params));
  }
  if (reps.size() > required) {
    reps = keep_most_spread(reps, required);
  }
  for (auto & r : reps) {
    r = frame * r;
  }
  return reps;
}

namespace
{

double cross2(const geom::Vec2 & o, const geom::Vec2 & a, const geom::Vec2 & b)
{
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

/// Counter-clockwise convex hull (Andrew's monotone chain), collinear points dropped.
std::vector<std::size_t> convex_hull(const std::vector<geom::Vec2> & pts)
{
  std::vector<std::size_t> idx(pts.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (pts[a].x() != pts[b].x()) {
        return pts[a].x() < pts[b].x();
      }
      if (pts[a].y() != pts[b].y()) {
        return pts[a].y() < pts[b].y();
      }
      return a < b;
    });
  if (idx.size() < 3) {
    return idx;
  }
  std::vector<std::size_t> hull(2 * idx.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    while (k >= 2 && cross2(pts[hull[k - 2]], pts[hull[k - 1]], pts[idx[i]]) <= 0.0) {
      --k;
    }
    hull[k++] = idx[i];
  }
  for (std::size_t i = idx.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross2(pts[hull[k - 2]], pts[hull[k - 1]], pts[idx[i - 1]]) <= 0.0) {
      --k;
    }
    hull[k++] = idx[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

/// Orders the points canonically and fills the connection list.
void connect(ConstraintElement & e)
{
  const int n = static_cast<int>(e.points.size());
  if (e.type.kind == ElementKind::Line) {
    const auto fit = geom::fit_line(e.points);
    std::vector<std::size_t> order(e.points.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return (e.points[a] - fit.centroid).dot(fit.axis) <
               (e.points[b] - fit.centroid).dot(fit.axis);
      });
    PointList sorted;
    for (auto i : order) {
      sorted.push_back(e.points[i]);
    }
    e.points = std::move(sorted);
    for (int i = 0; i + 1 < n; ++i) {
      e.connections.emplace_back(i, i + 1);
    }
  } else if (e.type.kind == ElementKind::Surface) {
    const auto fit = geom::fit_plane(e.points);
    const Eigen::Matrix3d frame = geom::principal_frame(e.points);
    Eigen::Vector3d ax = frame.col(0);
    Eigen::Vector3d ay = fit.axis.cross(ax).normalized();
    ax = ay.cross(fit.axis);
    std::vector<geom::Vec2> flat;
    for (const auto & p : e.points) {
      const Vec3 d = p - fit.centroid;
      flat.emplace_back(d.dot(ax), d.dot(ay));
    }
    const auto hull = convex_hull(flat);
    std::vector<bool> on_hull(e.points.size(), false);
    PointList ordered;
    for (auto i : hull) {
      ordered.push_back(e.points[i]);
      on_hull[i] = true;
    }
    for (std::size_t i = 0; i < e.points.size(); ++i) {
      if (!on_hull[i]) {
        ordered.push_back(e.points[i]);
      }
    }
    e.points = std::move(ordered);
    const int h = static_cast<int>(hull.size());
    for (int i = 0; i < h; ++i) {
      e.connections.emplace_back(i, (i + 1) % h);
    }
  }
}

}  // namespace

ConstraintElement extract_element(
  const MaskBundle & bundle, std::span<const DepthImage> depths,
  std::span<const CameraModel> cams, const PipelineParams & params)
{
  const PointList fused = fuse_views(bundle, depths, cams);
  const PointList filtered = filter_outliers(fused, params.outlier_k, params.outlier_std_ratio);
  if (filtered.empty()) {
    throw EmptyPointSet("outlier filter removed every point");
  }
  ConstraintElement e;
  e.type = bundle.type;
  e.entity = bundle.entity;
  e.part = bundle.part;
  e.points = representative_points(filtered, bundle.type, params);
  connect(e);
  e.validate();
  return e;
}

}  // namespace cam::elem
