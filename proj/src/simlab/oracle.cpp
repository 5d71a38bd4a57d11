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


#include <cmath>
#include <numbers>

#include "cam/simlab.hpp"

namespace cam::sim
{

namespace
{

constexpr double kDeg = std::numbers::pi / 180.0;

bool stacked(const SimObject & top, const SimObject & below, double half)
{
  if (top.attached_to != below.id) {
    return false;
  }
  const Vec3 d = top.pose.translation - below.pose.translation;
  return std::abs(d.x()) < half && std::abs(d.y()) < half && d.z() > 0;
}

}  // namespace

int sweep_count(const SimState & s, const task::TaskTemplate & t)
{
  int n = 0;
  for (const auto & name : t.objects) {
    const Vec3 c = s.object(name).pose.translation;
    if (c.x() >= t.param("region_x0") && c.x() <= t.param("region_x1") &&
      c.y() >= t.param("region_y0") && c.y() <= t.param("region_y1"))
    {
      ++n;
    }
  }
  return n;
}

bool oracle_success(const SimState & s, const task::TaskTemplate & t)
{
  using task::TaskName;
  switch (t.name) {
    case TaskName::StackInOrder: {
        const double half = t.param("block_size") / 2;
        const auto & r = s.object(t.objects[0]);
        const auto & g = s.object(t.objects[1]);
        const auto & b = s.object(t.objects[2]);
        return r.attached_to == kWorld && stacked(g, r, half) && stacked(b, g, half);
      }
    case TaskName::SweepHalf: {
        const int n = sweep_count(s, t);
        return n >= 16 && n <= 24;
      }
    case TaskName::SlotPen: {
        const auto & pen = s.object("pen");
        const auto & holder = s.object("holder");
        const Vec3 d = pen.pose.translation - holder.pose.translation;
        return pen.attached_to == holder.id && tilt(pen) <= 10 * kDeg &&
               std::hypot(d.x(), d.y()) <= holder.bore_radius;
      }
    case TaskName::StowBook: {
        const auto & book = s.object("book");
        return book.attached_to == s.find("shelf") && tilt(book) <= 10 * kDeg;
      }
    case TaskName::PourTea:
      return s.pour_ticks >= 15 && !s.spilled;
  }
  return false;
}

}  // namespace cam::sim
