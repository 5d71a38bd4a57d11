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

namespace cam::geom
{

ClusterLabeling dbscan(std::span<const Vec3> points, double eps, std::size_t min_pts)
{
  if (!(eps > 0.0) || min_pts < 1) {
    throw ConfigError("dbscan: eps must be positive and min_pts at least 1");
  }
  const std::size_t n = points.size();
  const double eps_sq = eps * eps;

  // Neighbor lists come out sorted by index because j is scanned in order.
  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if ((points[i] - points[j]).squaredNorm() <= eps_sq) {
        neighbors[i].push_back(j);
      }
    }
  }

  constexpr int kUnvisited = -2;
  ClusterLabeling out;
  out.labels.assign(n, kUnvisited);
  out.eps = eps;
  out.min_pts = min_pts;

  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.labels[i] != kUnvisited) {
      continue;
    }
    if (neighbors[i].size() < min_pts) {
      out.labels[i] = kNoise;
      continue;
    }
    const int cluster = out.cluster_count++;
    out.labels[i] = cluster;
    queue.assign(neighbors[i].begin(), neighbors[i].end());
    for (std::size_t k = 0; k < queue.size(); ++k) {
      const std::size_t q = queue[k];
      if (out.labels[q] == kNoise) {
        out.labels[q] = cluster;  // border point
        continue;
      }
      if (out.labels[q] != kUnvisited) {
        continue;
      }
      out.labels[q] = cluster;
      if (neighbors[q].size() >= min_pts) {
        queue.insert(queue.end(), neighbors[q].begin(), neighbors[q].end());
      }
    }
  }
  return out;
}

}  // namespace cam::geom
