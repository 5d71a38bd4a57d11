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


#include "cam/error.hpp"
#include "cam/simlab.hpp"

namespace cam::sim
{

std::vector<geom::RenderedView> render(const SimState & s, std::span<const CameraModel> cams)
{
  std::vector<geom::Primitive> prims;
  prims.reserve(s.objects.size());
  for (const auto & o : s.objects) {
    prims.push_back({o.pose, o.shape, o.id, kNoLabel});
  }
  std::vector<geom::RenderedView> views;
  views.reserve(cams.size());
  for (const auto & cam : cams) {
    auto view = geom::raycast_depth(prims, cam);
    const Vec3 origin = cam.origin();
    for (int v = 0; v < cam.height; ++v) {
      for (int u = 0; u < cam.width; ++u) {
        const int id = view.instance_ids.at(u, v);
        if (id < 0) {
          continue;
        }
        const auto & o = s.objects[static_cast<std::size_t>(id)];
        if (o.parts.empty()) {
          continue;
        }
        const Vec3 hit = origin + cam.pixel_ray(u, v) * view.depth.at(u, v);
        const Vec3 local = o.pose.inverse().apply(hit);
        for (const auto & part : o.parts) {
          if (geom::shape_contains(part.shape, part.local.inverse().apply(local), 1e-6)) {
            view.part_ids.at(u, v) = part.id;
            break;
          }
        }
      }
    }
    views.push_back(std::move(view));
  }
  return views;
}

elem::MaskBundle masks_for(
  const SimState & s, std::span<const geom::RenderedView> views, const std::string & entity,
  const std::string & part, const elem::ElementType & type)
{
  const auto & o = s.object(entity);
  int part_id = kNoLabel;
  if (part != "body") {
    const Part * p = o.part(part);
    if (!p) {
      throw ConfigError(entity + " has no part '" + part + "'");
    }
    part_id = p->id;
  }
  elem::MaskBundle b;
  b.type = type;
  b.entity = entity;
  b.part = part;
  for (const auto & v : views) {
    elem::ViewMasks m{MaskImage(v.depth.width, v.depth.height, 0),
      MaskImage(v.depth.width, v.depth.height, 0)};
    for (std::size_t i = 0; i < v.instance_ids.data.size(); ++i) {
      const bool mine = v.instance_ids.data[i] == o.id;
      m.instance.data[i] = mine;
      m.part.data[i] = mine && (part_id == kNoLabel || v.part_ids.data[i] == part_id);
    }
    b.views.push_back(std::move(m));
  }
  return b;
}

}  // namespace cam::sim
