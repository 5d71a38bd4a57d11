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

namespace cam::geom
{

namespace
{

constexpr double kInflate = 1e-6;
constexpr double kDegenerateCell = 1e-6;

}  // namespace

bool VoxelGrid::cell_contains(const CellIndex & c, const Vec3 & p) const
{
  for (int a = 0; a < 3; ++a) {
    const double lo = origin[a] + c[a] * cell_size[a];
    const double hi = origin[a] + (c[a] + 1) * cell_size[a];
    if (!(p[a] >= lo && p[a] < hi)) {
      return false;
    }
  }
  return true;
}

VoxelGrid voxelize(std::span<const Vec3> points, const CellIndex & cells_per_axis)
{
  if (points.empty()) {
    throw EmptyPointSet("voxelize: no points");
  }
  for (int n : cells_per_axis) {
    if (n < 1) {
      throw ConfigError("voxelize: cells per axis must be at least 1");
    }
  }
  Vec3 lo = points.front();
  Vec3 hi = points.front();
  for (const auto & p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }

  VoxelGrid grid;
  grid.cells_per_axis = cells_per_axis;
  for (int a = 0; a < 3; ++a) {
    const double extent = hi[a] - lo[a];
    if (extent <= 0.0) {
      grid.cell_size[a] = kDegenerateCell;
      grid.origin[a] = lo[a] - 0.5 * kDegenerateCell;
    } else {
      grid.origin[a] = lo[a] - kInflate;
      grid.cell_size[a] = (extent + 2.0 * kInflate) / cells_per_axis[a];
    }
  }

  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3 & p = points[i];
    CellIndex c{};
    for (int a = 0; a < 3; ++a) {
      int k = static_cast<int>(std::floor((p[a] - grid.origin[a]) / grid.cell_size[a]));
      k = std::clamp(k, 0, cells_per_axis[a] - 1);
      // Division rounding can land one cell off the half-open box.
      if (k > 0 && p[a] < grid.origin[a] + k * grid.cell_size[a]) {
        --k;
      } else if (k + 1 < cells_per_axis[a] && p[a] >= grid.origin[a] + (k + 1) * grid.cell_size[a]) {
        ++k;
      }
      c[a] = k;
    }
    auto & cell = grid.cells[c];
    cell.indices.push_back(i);
    cell.points.push_back(p);
  }
  return grid;
}

}  // namespace cam::geom
