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

#include <cstdint>
#include <vector>

#include "cam/error.hpp"

namespace cam
{

/// Row-major 2D image. Pixel (u, v) is column u, row v.
template<typename T>
struct Image
{
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, T fill = T{})
  : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  T & at(int u, int v) {return data[static_cast<std::size_t>(v) * width + u];}
  const T & at(int u, int v) const {return data[static_cast<std::size_t>(v) * width + u];}

  bool same_shape(int w, int h) const {return width == w && height == h;}

  friend bool operator==(const Image &, const Image &) = default;
};

using DepthImage = Image<double>;
using LabelImage = Image<std::int32_t>;
using MaskImage = Image<std::uint8_t>;

/// Label value for pixels whose ray hit nothing.
inline constexpr std::int32_t kNoLabel = -1;

}  // namespace cam
