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

// Independent reference implementations used only by tests.

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "cam/geom3d.hpp"

namespace cam::testing
{

/// DBSCAN labels from density connectivity: connected components of the
/// eps-graph restricted to core points; a border point takes the component
/// whose lowest core index is smallest among its core neighbors.
inline std::vector<int> dbscan_oracle(
  const std::vector<geom::Vec3> & pts, double eps, std::size_t min_pts)
{
  const std::size_t n = pts.size();
  auto near = [&](std::size_t i, std::size_t j) {
      return (pts[i] - pts[j]).norm() <= eps;
    };
  std::vector<bool> core(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < n; ++j) {
      c += near(i, j) ? 1 : 0;
    }
    core[i] = c >= min_pts;
  }
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
      while (parent[x] != x) {
        x = parent[x] = parent[parent[x]];
      }
      return x;
    };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (core[i] && core[j] && near(i, j)) {
        parent[find(i)] = find(j);
      }
    }
  }
  std::map<std::size_t, std::size_t> min_core;  // root -> lowest core index
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      auto r = find(i);
      if (!min_core.count(r)) {
        min_core[r] = i;
      }
    }
  }
  std::vector<int> label(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      label[i] = static_cast<int>(min_core[find(i)]);
      continue;
    }
    std::size_t best = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (core[j] && near(i, j)) {
        best = std::min(best, min_core[find(j)]);
      }
    }
    if (best < n) {
      label[i] = static_cast<int>(best);
    }
  }
  return label;
}

/// True when two labelings describe the same partition (noise must match noise).
inline bool same_partition(const std::vector<int> & a, const std::vector<int> & b)
{
  if (a.size() != b.size()) {
    return false;
  }
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] < 0) != (b[i] < 0)) {
      return false;
    }
    if (a[i] < 0) {
      continue;
    }
    auto [it1, new1] = ab.emplace(a[i], b[i]);
    auto [it2, new2] = ba.emplace(b[i], a[i]);
    if (it1->second != b[i] || it2->second != a[i]) {
      return false;
    }
  }
  return true;
}

inline geom::Pose random_pose(std::mt19937_64 & rng, double spread)
{
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-spread, spread);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return {q, geom::Vec3(u(rng), u(rng), u(rng))};
}

}  // namespace cam::testing

namespace cam::testing
{

/// Distance from a local-frame point to the surface of a shape, valid for
/// points that are already close to it.
inline double surface_residual(const geom::Shape & shape, const geom::Vec3 & p)
{
  if (const auto * b = std::get_if<geom::Box>(&shape)) {
    const geom::Vec3 d = p.cwiseAbs() - b->half_extents;
    return std::abs(d.maxCoeff());
  }
  const auto & c = std::get<geom::Cylinder>(shape);
  const double r = std::hypot(p.x(), p.y());
  double best = 1e9;
  if (std::abs(p.z()) <= 0.5 * c.height + 1e-9) {
    best = std::min(best, std::abs(r - c.radius));
  }
  if (r <= c.radius + 1e-9) {
    best = std::min(best, std::abs(std::abs(p.z()) - 0.5 * c.height));
  }
  return best;
}

}  // namespace cam::testing
