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


#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "cam/error.hpp"
#include "cam/simlab.hpp"

namespace cam::sim
{

namespace
{

using Eigen::AngleAxisd;
using Eigen::Quaterniond;

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kSnapTilt = 20 * kDeg;
constexpr double kGraspReach = 0.02;
constexpr double kGraspTurn = 15 * kDeg;
constexpr double kEps = 1e-6;

std::string fmt(const char * f, double a, double b = 0.0)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a, b);
  return buf;
}

SimObject & obj(SimState & s, int id)
{
  return s.objects.at(static_cast<std::size_t>(id));
}

double uniform(SimState & s, double lo, double hi)
{
  return hi > lo ? std::uniform_real_distribution<double>(lo, hi)(s.rng) : lo;
}

// True when b rests on a, directly or through other objects.
bool rests_on(const SimState & s, int b, int a)
{
  for (int i = 0, cur = b; i < static_cast<int>(s.objects.size()) && cur >= 0; ++i) {
    cur = s.objects[static_cast<std::size_t>(cur)].attached_to;
    if (cur == a) {
      return true;
    }
  }
  return false;
}

Vec3 half_extents(const Shape & shape)
{
  if (auto b = std::get_if<geom::Box>(&shape)) {
    return b->half_extents;
  }
  const auto & c = std::get<geom::Cylinder>(shape);
  return {c.radius, c.radius, c.height / 2};
}

// Upright is stable for squat shapes only.
bool stable(const Shape & shape, const Quaterniond & r)
{
  const Eigen::Matrix3d m = r.toRotationMatrix();
  if (auto c = std::get_if<geom::Cylinder>(&shape)) {
    const bool upright = std::abs(m(2, 2)) > 0.5;
    return !upright || c->height <= 4 * c->radius;
  }
  const Vec3 h = half_extents(shape);
  int up = 0;
  (m.row(2).cwiseAbs()).maxCoeff(&up);
  double base = 1e9;
  for (int k = 0; k < 3; ++k) {
    if (k != up) {
      base = std::min(base, h[k]);
    }
  }
  return h[up] <= 2.5 * base;
}

// Nearest resting rotation: a face down (boxes) or the axis vertical or level (cylinders).
std::pair<Quaterniond, double> nearest_face(const Shape & shape, const Quaterniond & r)
{
  const Eigen::Matrix3d m = r.toRotationMatrix();
  if (std::holds_alternative<geom::Cylinder>(shape)) {
    const Vec3 a = m.col(2);
    const double off_vertical = std::acos(std::clamp(std::abs(a.z()), 0.0, 1.0));
    if (off_vertical <= std::numbers::pi / 4) {
      const Vec3 target(0, 0, a.z() >= 0 ? 1 : -1);
      return {Quaterniond::FromTwoVectors(a, target) * r, off_vertical};
    }
    Vec3 flat(a.x(), a.y(), 0);
    flat.normalize();
    return {Quaterniond::FromTwoVectors(a, flat) * r, std::numbers::pi / 2 - off_vertical};
  }
  int up = 0;
  m.row(2).cwiseAbs().maxCoeff(&up);
  const Vec3 a = m.col(up);
  const Vec3 target(0, 0, a.z() >= 0 ? 1 : -1);
  return {Quaterniond::FromTwoVectors(a, target) * r,
    std::acos(std::clamp(std::abs(a.z()), 0.0, 1.0))};
}

// Where an unstable object ends up: on its broadest face, or lying down.
Quaterniond toppled(const Shape & shape, const Quaterniond & r)
{
  const Eigen::Matrix3d m = r.toRotationMatrix();
  if (std::holds_alternative<geom::Cylinder>(shape)) {
    const Vec3 a = m.col(2);
    Vec3 flat(a.x(), a.y(), 0);
    if (flat.norm() < 1e-9) {
      flat = m.col(0);
      flat.z() = 0;
    }
    return Quaterniond::FromTwoVectors(a, flat.normalized()) * r;
  }
  int thin = 0;
  half_extents(shape).minCoeff(&thin);
  const Vec3 a = m.col(thin);
  return Quaterniond::FromTwoVectors(a, Vec3(0, 0, a.z() >= 0 ? 1 : -1)) * r;
}

bool overlap_xy(const Aabb & a, const Aabb & b)
{
  return a.lo.x() < b.hi.x() - kEps && b.lo.x() < a.hi.x() - kEps &&
         a.lo.y() < b.hi.y() - kEps && b.lo.y() < a.hi.y() - kEps;
}

bool overlap_3d(const Aabb & a, const Aabb & b)
{
  return overlap_xy(a, b) && a.lo.z() < b.hi.z() - kEps && b.lo.z() < a.hi.z() - kEps;
}

bool contains_xy(const Aabb & a, const Vec3 & p)
{
  return p.x() >= a.lo.x() && p.x() <= a.hi.x() && p.y() >= a.lo.y() && p.y() <= a.hi.y();
}

// Highest surface under the footprint whose top is not above bottom; -1 for the table.
int support_below(
  const SimState & s, int id, const Aabb & footprint, double bottom, const std::vector<int> & skip)
{
  int best = kWorld;
  double best_top = 0.0;
  for (const auto & c : s.objects) {
    if (c.id == id || c.attached_to == kEndEffector || rests_on(s, c.id, id) ||
      std::find(skip.begin(), skip.end(), c.id) != skip.end())
    {
      continue;
    }
    const Aabb cb = bounds(c.shape, c.pose);
    if (cb.hi.z() > bottom + kEps || !overlap_xy(cb, footprint)) {
      continue;
    }
    if (cb.hi.z() > best_top) {
      best_top = cb.hi.z();
      best = c.id;
    }
  }
  return best;
}

void settle_dependents(SimState & s, int id)
{
  std::vector<int> deps;
  for (const auto & o : s.objects) {
    if (o.attached_to == id) {
      deps.push_back(o.id);
    }
  }
  for (int d : deps) {
    obj(s, d).attached_to = kWorld;
    settle(s, d);
  }
}

// Pushes o sideways out of anything it intersects.
void clear_overlaps(SimState & s, SimObject & o)
{
  for (int iter = 0; iter < 6; ++iter) {
    bool moved = false;
    for (const auto & c : s.objects) {
      if (c.id == o.id || c.attached_to == kEndEffector || c.id == o.attached_to) {
        continue;
      }
      const Aabb a = bounds(o.shape, o.pose);
      const Aabb b = bounds(c.shape, c.pose);
      if (!overlap_3d(a, b)) {
        continue;
      }
      const double push[4] = {b.hi.x() - a.lo.x(), a.hi.x() - b.lo.x(), b.hi.y() - a.lo.y(),
        a.hi.y() - b.lo.y()};
      const int k = static_cast<int>(std::min_element(push, push + 4) - push);
      const double d = push[k] + 0.002;
      o.pose.translation += k == 0 ? Vec3(d, 0, 0) : k == 1 ? Vec3(-d, 0, 0) :
        k == 2 ? Vec3(0, d, 0) : Vec3(0, -d, 0);
      moved = true;
    }
    if (!moved) {
      return;
    }
  }
}

// Holder-like receptacle whose bore o currently sits in, or -1.
int bore_under(const SimState & s, const SimObject & o)
{
  const Aabb ob = bounds(o.shape, o.pose);
  for (const auto & c : s.objects) {
    if (c.id == o.id || c.bore_radius <= 0 || c.attached_to == kEndEffector) {
      continue;
    }
    const Aabb cb = bounds(c.shape, c.pose);
    const double floor = cb.lo.z() + c.floor_height;
    const Vec3 d = o.pose.translation - c.pose.translation;
    if (std::hypot(d.x(), d.y()) <= c.bore_radius && ob.lo.z() >= floor - kEps &&
      ob.lo.z() < cb.hi.z())
    {
      return c.id;
    }
  }
  return -1;
}

void follow_held(SimState & s)
{
  if (s.held < 0) {
    return;
  }
  auto & o = obj(s, s.held);
  o.pose = s.ee * s.grasp_rel;
  settle_dependents(s, o.id);
}

// Rotates the held object about the gripper point.
void turn_held(SimState & s, const Quaterniond & r)
{
  auto & o = obj(s, s.held);
  o.pose.rotation = (r * o.pose.rotation).normalized();
  o.pose.translation = s.ee.translation + r * (o.pose.translation - s.ee.translation);
  s.grasp_rel = s.ee.inverse() * o.pose;
}

void log_inject(SimState & s, const std::string & detail)
{
  s.log.push_back({s.tick, "inject", detail});
}

void log_skip(SimState & s, const std::string & detail)
{
  s.log.push_back({s.tick, "inject_skipped", detail});
}

void apply(SimState & s, ArmedDisturbance & a)
{
  const auto & d = a.spec;
  const char * name = disturbance_name(d.kind);
  switch (d.kind) {
    case DisturbanceKind::DropWithProb:
      if (s.held == a.target) {
        const std::string who = obj(s, a.target).name;
        log_inject(s, std::string(name) + " " + who);
        release_held(s, "dropped");
      } else {
        log_skip(s, std::string(name) + " nothing held");
      }
      return;
    case DisturbanceKind::PlacementNoise:
      return;
    case DisturbanceKind::MoveObject: {
        const int id = s.find(d.object);
        if (id < 0 || s.held == id) {
          log_skip(s, std::string(name) + " " + d.object);
          return;
        }
        auto & o = obj(s, id);
        o.pose.translation += d.axis * d.distance;
        if (o.attached_to != kWorld) {
          o.attached_to = kWorld;
        }
        o.pose.translation.z() += kEps;  // lift clear so settle re-finds the support
        settle(s, id);
        log_inject(s, std::string(name) + " " + d.object + fmt(" %.4f m", d.distance));
        return;
      }
    case DisturbanceKind::RotateObject: {
        const int id = s.find(d.object);
        if (id < 0 || s.held == id) {
          log_skip(s, std::string(name) + " " + d.object);
          return;
        }
        auto & o = obj(s, id);
        o.pose.rotation = (Quaterniond(AngleAxisd(d.angle, d.axis)) * o.pose.rotation).normalized();
        o.pose.translation.z() += 0.05;  // turning lifts it off its face; settle puts it back
        settle(s, id);
        log_inject(s, std::string(name) + " " + d.object + fmt(" %.4f rad", d.angle));
        return;
      }
    case DisturbanceKind::ForceRelease:
      if (s.held < 0) {
        log_skip(s, name);
        return;
      }
      log_inject(s, std::string(name) + " " + obj(s, s.held).name);
      release_held(s, "forced");
      return;
    case DisturbanceKind::TiltHeld:
      if (s.held < 0) {
        log_skip(s, name);
        return;
      }
      turn_held(s, Quaterniond(AngleAxisd(d.angle, d.axis)));
      log_inject(s, std::string(name) + " " + obj(s, s.held).name + fmt(" %.4f rad", d.angle));
      return;
    case DisturbanceKind::RelevelHeld: {
        if (s.held < 0) {
          log_skip(s, name);
          return;
        }
        auto & o = obj(s, s.held);
        const double before = tilt(o);
        turn_held(s, Quaterniond::FromTwoVectors(o.pose.rotate(o.up_axis), Vec3::UnitZ()));
        log_inject(s, std::string(name) + " " + o.name + fmt(" %.4f rad", before));
        return;
      }
  }
}

void fire_due(SimState & s)
{
  // index loop: applying may schedule nothing new but keeps references stable
  for (std::size_t i = 0; i < s.pending.size(); ++i) {
    auto & a = s.pending[i];
    if (!a.fired && a.fire_tick >= 0 && a.fire_tick <= s.tick) {
      a.fired = true;
      ArmedDisturbance copy = a;
      apply(s, copy);
    }
  }
}

// Ticks until the active script releases what it holds, or ends.
int held_ticks_left(const SimState & s)
{
  if (!s.script) {
    return 0;
  }
  double ticks = 0;
  Pose at = s.ee;
  for (auto i = s.waypoint; i < s.script->waypoints.size(); ++i) {
    const auto & w = s.script->waypoints[i];
    ticks += std::max(
      std::ceil((w.ee.translation - at.translation).norm() / w.speed),
      std::ceil(at.rotation.angularDistance(w.ee.rotation) / w.angular_speed)) + w.dwell;
    at = w.ee;
    if (w.event == WaypointEvent::Release) {
      break;
    }
  }
  return static_cast<int>(ticks);
}

// One Bernoulli draw per step that carries an object; a hit drops it at a
// uniform moment of the remaining carry.
void maybe_schedule_drop(SimState & s)
{
  if (s.drop_p <= 0 || s.held < 0 || !std::bernoulli_distribution(s.drop_p)(s.rng)) {
    return;
  }
  ArmedDisturbance a;
  a.spec.kind = DisturbanceKind::DropWithProb;
  a.spec.p = s.drop_p;
  a.target = s.held;
  a.fire_tick = s.tick +
    std::uniform_int_distribution<int>(1, std::max(1, held_ticks_left(s)))(s.rng);
  s.pending.push_back(a);
}

void grasp(SimState & s, const Waypoint & w)
{
  auto & o = obj(s, w.object);
  const double off = (o.pose.translation - w.expected_object.translation).norm();
  const double turn = o.pose.rotation.angularDistance(w.expected_object.rotation);
  if (s.held == o.id) {
    return;
  }
  if (s.held >= 0 || off > kGraspReach || turn > kGraspTurn) {
    note_event(s, "grasp_failed:" + o.name, fmt("%.4f m %.4f rad", off, turn));
    return;
  }
  s.held = o.id;
  o.attached_to = kEndEffector;
  s.grasp_rel = s.ee.inverse() * o.pose;
  note_event(s, "grasp:" + o.name);
  maybe_schedule_drop(s);
}

void push_blocks(SimState & s)
{
  constexpr double kHalfWidth = 0.03;
  std::vector<SimObject *> lane;
  for (auto & o : s.objects) {
    const double h = half_extents(o.shape).x();
    if (o.attached_to != kEndEffector &&
      std::abs(o.pose.translation.x() - s.ee.translation.x()) < kHalfWidth + h &&
      o.pose.translation.y() + h > s.ee.translation.y())
    {
      lane.push_back(&o);
    }
  }
  std::sort(
    lane.begin(), lane.end(), [](auto * a, auto * b) {
      return a->pose.translation.y() < b->pose.translation.y() ||
      (a->pose.translation.y() == b->pose.translation.y() && a->id < b->id);
    });
  double front = s.ee.translation.y() + 0.002;
  for (auto * o : lane) {
    const double h = half_extents(o->shape).y();
    if (o->pose.translation.y() - h < front) {
      o->pose.translation.y() = front + h;
    }
    front = o->pose.translation.y() + h;
  }
}

void pour_bookkeeping(SimState & s, bool translating)
{
  if (s.teapot < 0 || s.held != s.teapot) {
    s.spill_run = 0;
    return;
  }
  const auto & pot = obj(s, s.teapot);
  const double t = tilt(pot);
  if (s.cup >= 0) {
    const Vec3 d = pot.pose.translation - obj(s, s.cup).pose.translation;
    if (t >= 40 * kDeg && std::hypot(d.x(), d.y()) <= 0.15) {
      ++s.pour_ticks;
    }
  }
  s.spill_run = (t > 15 * kDeg && translating) ? s.spill_run + 1 : 0;
  if (s.spill_run >= 10 && !s.spilled) {
    s.spilled = true;
    s.log.push_back({s.tick, "spill", fmt("%.4f rad", t)});
  }
}

}  // namespace

void arm_disturbances(SimState & s, const std::vector<Disturbance> & ds)
{
  for (auto d : ds) {
    d.validate();
    if (d.kind == DisturbanceKind::DropWithProb) {
      s.drop_p = d.p;
      continue;
    }
    if (d.kind == DisturbanceKind::PlacementNoise) {
      s.placement_q = d.q;
      continue;
    }
    ArmedDisturbance a;
    if (d.trigger.offset_max >= d.trigger.offset) {
      d.trigger.offset = std::uniform_int_distribution<int>(d.trigger.offset, d.trigger.offset_max)(
        s.rng);
    }
    d.distance = uniform(s, d.distance, d.distance_max);
    const double sign = std::bernoulli_distribution(0.5)(s.rng) ? 1.0 : -1.0;
    d.angle = sign * uniform(s, d.angle, d.angle_max);
    if (d.axis.norm() < 1e-12) {
      const double heading = uniform(s, 0, 2 * std::numbers::pi);
      d.axis = Vec3(std::cos(heading), std::sin(heading), 0);
    } else {
      d.axis.normalize();
    }
    a.spec = d;
    if (d.trigger.tick >= 0) {
      a.fire_tick = d.trigger.tick + d.trigger.offset;
    }
    s.pending.push_back(a);
  }
}

void note_event(SimState & s, const std::string & event, const std::string & detail)
{
  s.log.push_back({s.tick, event, detail});
  if (std::find(s.seen_events.begin(), s.seen_events.end(), event) != s.seen_events.end()) {
    return;
  }
  s.seen_events.push_back(event);
  for (auto & a : s.pending) {
    if (!a.fired && a.fire_tick < 0 && a.spec.trigger.event == event) {
      a.fire_tick = s.tick + a.spec.trigger.offset;
    }
  }
}

void start_script(SimState & s, PolicyScript script)
{
  script.validate(s.objects);
  const std::string action = script.action;
  s.script = std::move(script);
  s.waypoint = 0;
  s.dwell_left = -1;
  // a step's drop belongs to that step
  std::erase_if(s.pending, [](const ArmedDisturbance & a) {
      return a.spec.kind == DisturbanceKind::DropWithProb && !a.fired;
    });
  note_event(s, "script:" + action);
  maybe_schedule_drop(s);
}

void release_held(SimState & s, const std::string & why)
{
  if (s.held < 0) {
    return;
  }
  const int id = s.held;
  s.held = -1;
  obj(s, id).attached_to = kWorld;
  settle(s, id);
  note_event(s, "release:" + obj(s, id).name, why);
}

void settle(SimState & s, int id)
{
  auto & o = obj(s, id);
  if (o.attached_to == kEndEffector) {
    return;
  }
  const Aabb before = bounds(o.shape, o.pose);
  const double bottom = before.lo.z();

  // inside a bore: stands on the receptacle floor if roughly upright
  if (const int r = bore_under(s, o); r >= 0) {
    const auto & rc = obj(s, r);
    if (tilt(o) <= kSnapTilt) {
      o.pose.rotation = (Quaterniond::FromTwoVectors(o.pose.rotate(o.up_axis), Vec3::UnitZ()) *
        o.pose.rotation).normalized();
      const Aabb b = bounds(o.shape, o.pose);
      o.pose.translation.z() += bounds(rc.shape, rc.pose).lo.z() + rc.floor_height - b.lo.z();
      o.attached_to = r;
      settle_dependents(s, id);
      return;
    }
  }

  auto [rot, off] = nearest_face(o.shape, o.pose.rotation);
  if (off > kSnapTilt) {
    rot = toppled(o.shape, o.pose.rotation);
  }
  std::vector<int> skip;
  int support = kWorld;
  for (int attempt = 0; attempt < 4; ++attempt) {
    const Aabb foot = bounds(o.shape, Pose{rot, o.pose.translation});
    support = support_below(s, id, foot, bottom, skip);
    const bool on_receptacle = support >= 0 && obj(s, support).receptacle;
    if (!stable(o.shape, rot) && !on_receptacle) {
      rot = toppled(o.shape, rot);
      continue;
    }
    if (support < 0) {
      break;
    }
    const Aabb sb = bounds(obj(s, support).shape, obj(s, support).pose);
    if (contains_xy(sb, o.pose.translation)) {
      break;
    }
    // center hangs over the edge: falls off beside the support
    const Vec3 d = o.pose.translation - obj(s, support).pose.translation;
    const Aabb ob = bounds(o.shape, Pose{rot, o.pose.translation});
    const Vec3 half = (ob.hi - ob.lo) / 2;
    if (std::abs(d.x()) >= std::abs(d.y())) {
      o.pose.translation.x() = d.x() >= 0 ? sb.hi.x() + half.x() + 0.002 :
        sb.lo.x() - half.x() - 0.002;
    } else {
      o.pose.translation.y() = d.y() >= 0 ? sb.hi.y() + half.y() + 0.002 :
        sb.lo.y() - half.y() - 0.002;
    }
    skip.push_back(support);
    support = kWorld;
  }
  o.pose.rotation = rot.normalized();
  const double top = support >= 0 ?
    bounds(obj(s, support).shape, obj(s, support).pose).hi.z() : 0.0;
  const Aabb placed = bounds(o.shape, o.pose);
  o.pose.translation.z() += top - placed.lo.z();
  o.attached_to = support;
  clear_overlaps(s, o);
  settle_dependents(s, id);
}

void step(SimState & s, task::Control control)
{
  ++s.tick;
  const Vec3 ee_before = s.ee.translation;
  if (control == task::Control::Continue && s.script && !s.motion_finished()) {
    const Waypoint & w = s.script->waypoints[s.waypoint];
    const Vec3 d = w.ee.translation - s.ee.translation;
    const double n = d.norm();
    s.ee.translation = n <= w.speed ? w.ee.translation : Vec3(s.ee.translation + d / n * w.speed);
    const double ang = s.ee.rotation.angularDistance(w.ee.rotation);
    s.ee.rotation = ang <= w.angular_speed ? w.ee.rotation :
      s.ee.rotation.slerp(w.angular_speed / ang, w.ee.rotation).normalized();
    follow_held(s);
    const bool reached = s.ee.translation == w.ee.translation &&
      s.ee.rotation.coeffs() == w.ee.rotation.coeffs();
    if (reached) {
      if (s.dwell_left < 0) {
        s.dwell_left = w.dwell;
      }
      if (s.dwell_left > 0) {
        --s.dwell_left;
      } else {
        s.dwell_left = -1;
        ++s.waypoint;
        if (w.event == WaypointEvent::Grasp) {
          grasp(s, w);
        } else if (w.event == WaypointEvent::Release && s.held == w.object) {
          release_held(s, "script");
        }
      }
    }
    s.pusher_active = s.script->action == "sweep" && s.ee.translation.z() <= 0.015;
    if (s.pusher_active) {
      push_blocks(s);
    }
  }
  fire_due(s);
  pour_bookkeeping(s, (s.ee.translation - ee_before).norm() > 1e-9);
}

}  // namespace cam::sim
