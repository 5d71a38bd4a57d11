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
#include <cstdio>
#include <numbers>
#include <random>

#include "cam/error.hpp"
#include "cam/simlab.hpp"

namespace cam::sim
{

namespace
{

using Eigen::AngleAxisd;
using Eigen::Quaterniond;

constexpr double kCarry = 0.15;  // carry height of a block center

struct Scripter
{
  SimState & s;
  PolicyScript script;

  const SimObject & o(const std::string & name) const {return s.object(name);}

  void move(const Pose & ee, int dwell = 0)
  {
    Waypoint w;
    w.ee = ee;
    w.dwell = dwell;
    script.waypoints.push_back(w);
  }

  void event(WaypointEvent e, int object, const Pose & expected = {})
  {
    auto & w = script.waypoints.back();
    w.event = e;
    w.object = object;
    w.expected_object = expected;
  }

  // Gripper pose that puts the held object at obj_pose.
  Pose ee_for(const Pose & obj_pose) const {return obj_pose * s.grasp_rel.inverse();}

  Pose last_ee() const {return script.waypoints.empty() ? s.ee : script.waypoints.back().ee;}

  // Object pose after turning it by r about the gripper point.
  Pose turned(const SimObject & ob, const Quaterniond & r) const
  {
    return {(r * ob.pose.rotation).normalized(),
      s.ee.translation + r * (ob.pose.translation - s.ee.translation)};
  }

  Quaterniond upright_fix(const SimObject & ob) const
  {
    return Quaterniond::FromTwoVectors(ob.pose.rotate(ob.up_axis), Vec3::UnitZ());
  }

  void pick(const SimObject & ob)
  {
    const Aabb b = bounds(ob.shape, ob.pose);
    const Vec3 anchor(ob.pose.translation.x(), ob.pose.translation.y(), b.hi.z());
    const double lift = std::max(0.17, anchor.z() + 0.08);
    const Quaterniond down = Quaterniond::Identity();
    move({down, Vec3(anchor.x(), anchor.y(), lift)});
    move({down, anchor});
    event(WaypointEvent::Grasp, ob.id, ob.pose);
    move({down, Vec3(anchor.x(), anchor.y(), lift)});
  }

  // Lowers the held object until its bottom is `clearance` above `surface`, then lets go.
  void lower_and_release(const SimObject & ob, const Pose & above, double surface, double clearance)
  {
    Pose at = above;
    at.translation.z() += surface + clearance - bounds(ob.shape, above).lo.z();
    move(ee_for(above));
    move(ee_for(at));
    event(WaypointEvent::Release, ob.id);
    Pose up = script.waypoints.back().ee;
    up.translation.z() += 0.08;
    move(up);
  }
};

}  // namespace

void PolicyScript::validate(const std::vector<SimObject> & objects) const
{
  for (const auto & w : waypoints) {
    if (!(w.speed > 0) || !(w.angular_speed > 0) || w.dwell < 0) {
      throw ConfigError("script '" + action + "': speeds must be positive");
    }
    if (w.event != WaypointEvent::None &&
      (w.object < 0 || w.object >= static_cast<int>(objects.size())))
    {
      throw ConfigError("script '" + action + "': event names no object");
    }
  }
}

PolicyScript make_script(SimState & s, const task::TaskTemplate & t, const task::Subgoal & sg)
{
  Scripter p{s, {}};
  p.script.action = sg.action;
  using task::TaskName;

  if (t.name == TaskName::SweepHalf) {
    if (sg.action == "sweep") {
      for (double x : {-0.09, -0.03, 0.03, 0.09}) {
        p.move({Quaterniond::Identity(), Vec3(x, -0.29, 0.08)});
        p.move({Quaterniond::Identity(), Vec3(x, -0.29, 0.01)});
        p.move({Quaterniond::Identity(), Vec3(x, 0.08, 0.01)});
        p.move({Quaterniond::Identity(), Vec3(x, 0.08, 0.08)});
      }
    } else {
      Vec3 back = s.ee.translation - Vec3(0, 0.03, 0);
      p.move({s.ee.rotation, back});
      back.z() = std::max(back.z(), 0.1);
      p.move({s.ee.rotation, back});
    }
    return p.script;
  }

  const SimObject & ob = p.o(sg.object);
  if (sg.action == "pick") {
    p.pick(ob);
    return p.script;
  }

  const Quaterniond level = (p.upright_fix(ob) * ob.pose.rotation).normalized();
  if (sg.action == "relevel" || sg.action == "restore") {
    p.move(p.ee_for(p.turned(ob, p.upright_fix(ob))));
    return p.script;
  }

  switch (t.name) {
    case TaskName::StackInOrder: {
        const double h = t.param("block_size") / 2;
        Vec3 target;
        if (sg.target == "base") {
          target = Vec3(t.param("base_x"), t.param("base_y"), h);
        } else {
          const auto & sup = p.o(sg.target);
          target = sup.pose.translation;
          target.z() = bounds(sup.shape, sup.pose).hi.z() + h;
        }
        if (s.placement_q > 0) {
          const double r = std::uniform_real_distribution<double>(0, s.placement_q)(s.rng);
          const double a = std::uniform_real_distribution<double>(0, 2 * std::numbers::pi)(s.rng);
          target += Vec3(r * std::cos(a), r * std::sin(a), 0);
          char buf[64];
          std::snprintf(buf, sizeof(buf), "placement_noise %s %.4f m", ob.name.c_str(), r);
          s.log.push_back({s.tick, "inject", buf});
        }
        Pose above{level, Vec3(target.x(), target.y(), std::max(kCarry, target.z() + 0.06))};
        p.lower_and_release(ob, above, target.z() - h, 0.003);
        return p.script;
      }
    case TaskName::SlotPen: {
        const auto & holder = p.o(sg.target.empty() ? "holder" : sg.target);
        const Aabb hb = bounds(holder.shape, holder.pose);
        const double half = std::get<geom::Cylinder>(ob.shape).height / 2;
        const Vec3 over(holder.pose.translation.x(), holder.pose.translation.y(),
          hb.hi.z() + half + 0.03);
        if (sg.action == "transfer") {
          p.move(p.ee_for({level, Vec3(ob.pose.translation.x(), ob.pose.translation.y(), over.z())}));
          p.move(p.ee_for({level, over}));
          return p.script;
        }
        if (sg.action == "insert") {
          const Pose down{level, Vec3(over.x(), over.y(), hb.lo.z() + holder.floor_height + half +
            0.002)};
          p.move(p.ee_for(down));
          p.event(WaypointEvent::Release, ob.id);
          Pose up = p.last_ee();
          up.translation.z() += 0.1;
          p.move(up);
          return p.script;
        }
        break;
      }
    case TaskName::StowBook: {
        constexpr double kCarryBook = 0.3;
        if (sg.action == "orient") {
          p.move(p.ee_for({level, Vec3(ob.pose.translation.x(), ob.pose.translation.y(),
            kCarryBook)}));
          return p.script;
        }
        const auto & shelf = p.o("shelf");
        const Vec3 over(shelf.pose.translation.x(), shelf.pose.translation.y(), kCarryBook);
        if (sg.action == "transfer") {
          p.move(p.ee_for({ob.pose.rotation, over}));
          return p.script;
        }
        if (sg.action == "place") {
          p.lower_and_release(ob, {ob.pose.rotation, over},
            bounds(shelf.shape, shelf.pose).hi.z(), 0.002);
          return p.script;
        }
        break;
      }
    case TaskName::PourTea: {
        constexpr double kCarryPot = 0.2;
        const auto & cup = p.o("cup");
        if (sg.action == "transfer") {
          const Vec3 pos = ob.pose.translation;
          const double z = std::max(kCarryPot, pos.z());
          p.move(p.ee_for({ob.pose.rotation, Vec3(pos.x(), pos.y(), z)}));
          p.move(p.ee_for({ob.pose.rotation, Vec3(cup.pose.translation.x() - t.param("pour_dx"),
            cup.pose.translation.y(), z)}));
          return p.script;
        }
        if (sg.action == "pour") {
          const Quaterniond tip(AngleAxisd(60 * std::numbers::pi / 180, Vec3::UnitY()));
          p.move(p.ee_for(p.turned(ob, tip * p.upright_fix(ob))), 20);
          return p.script;
        }
        break;
      }
    case TaskName::SweepHalf:
      break;
  }
  throw ConfigError(
    std::string(task::task_name(t.name)) + ": no script for action '" + sg.action + "'");
}

}  // namespace cam::sim
