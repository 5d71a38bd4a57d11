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
#include <fstream>

namespace cam::elem
{

namespace
{

Image<Rgb> shade_depth(const DepthImage & depth)
{
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double d : depth.data) {
    if (d > 0.0) {
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  Image<Rgb> img(depth.width, depth.height, Rgb{0, 0, 0});
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t i = 0; i < depth.data.size(); ++i) {
    const double d = depth.data[i];
    if (d > 0.0) {
      const auto g = static_cast<std::uint8_t>(220.0 - 160.0 * (d - lo) / span);
      img.data[i] = {g, g, g};
    }
  }
  return img;
}

}  // namespace

Annotation annotate(
  const ElementSet & elements, std::span<const DepthImage> depths,
  std::span<const CameraModel> cams)
{
  if (depths.size() != cams.size()) {
    throw DimensionMismatch("annotate: depth image count differs from camera count");
  }
  Annotation out;
  for (const auto & e : elements.elements) {
    out.legend.emplace_back(e.id, e.color);
  }
  for (std::size_t view = 0; view < cams.size(); ++view) {
    const auto & cam = cams[view];
    AnnotatedView av{shade_depth(depths[view]), {}};
    for (const auto & e : elements.elements) {
      const auto rgb = color_rgb(e.color);
      for (std::size_t k = 0; k < e.points.size(); ++k) {
        const auto px = cam.project(e.points[k]);
        if (!px) {
          continue;
        }
        const int u = static_cast<int>(std::lround(px->first.x()));
        const int v = static_cast<int>(std::lround(px->first.y()));
        if (u < 0 || v < 0 || u >= cam.width || v >= cam.height) {
          continue;
        }
        av.stamps.push_back({e.id, static_cast<int>(k), u, v, e.color});
        for (int dv = -1; dv <= 1; ++dv) {
          for (int du = -1; du <= 1; ++du) {
            const int x = u + du;
            const int y = v + dv;
            if (x >= 0 && y >= 0 && x < cam.width && y < cam.height) {
              av.image.at(x, y) = rgb;
            }
          }
        }
      }
    }
    out.views.push_back(std::move(av));
  }
  return out;
}

void write_ppm(const Image<Rgb> & image, const std::filesystem::path & path)
{
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw ConfigError("cannot write " + path.string());
  }
  f << "P6\n" << image.width << " " << image.height << "\n255\n";
  for (const auto & px : image.data) {
    f.write(reinterpret_cast<const char *>(px.data()), 3);
  }
}

}  // namespace cam::elem
