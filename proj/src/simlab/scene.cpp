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

#include "cam/error.hpp"
#include "cam/simlab.hpp"

namespace cam::sim
{

namespace
{

using Eigen::AngleAxisd;
using Eigen::Quaterniond;

// Points that must lie inside the owner for a part to be inside it.
std::vector<Vec3> hull_samples(const Shape & shape)
{
  std::vector<Vec3> out;
  if (auto b = std::get_if<geom::Box>(&shape)) {
    for (int i = 0; i < 8; ++i) {
      out.emplace_back(
        (i & 1 ? 1 : -1) * b->half_extents.x(), (i & 2 ? 1 : -1) * b->half_extents.y(),
        (i & 4 ? 1 : -1) * b->half_extents.z());
    }
  } else {
    const auto & c = std::get<geom::Cylinder>(shape);
    for (int i = 0; i < 16; ++i) {
      const double a = 2 * std::numbers::pi * i / 16;
      for (double z : {-0.5, 0.5}) {
        out.emplace_back(c.radius * std::cos(a), c.radius * std::sin(a), z * c.height);
      }
    }
  }
  return out;
}

Quaterniond yaw(double a)
{
  return Quaterniond(AngleAxisd(a, Vec3::UnitZ()));
}

struct SceneBuilder
{
  SimState & s;
  int next_part = 1;

  SimObject & add(std::string name, Shape shape, Pose pose)
  {
    SimObject o;
    o.id = static_cast<int>(s.objects.size());
    o.name = std::move(name);
    o.shape = shape;
    o.pose = pose;
    s.objects.push_back(std::move(o));
    return s.objects.back();
  }

  void part(SimObject & o, std::string name, Shape shape, Vec3 offset)
  {
    o.parts.push_back({std::move(name), shape, Pose::from_translation(offset), next_part++});
  }
};

}  // namespace

void SimObject::validate() const
{
  if (auto b = std::get_if<geom::Box>(&shape)) {
    if (!(b->half_extents.minCoeff() > 0)) {
      throw ConfigError(name + ": box extents must be positive");
    }
  } else {
    const auto & c = std::get<geom::Cylinder>(shape);
    if (!(c.radius > 0) || !(c.height > 0)) {
      throw ConfigError(name + ": cylinder radius and height must be positive");
    }
  }
  for (const auto & p : parts) {
    for (const auto & q : hull_samples(p.shape)) {
      if (!geom::shape_contains(shape, p.local.apply(q), 1e-9)) {
        throw ConfigError(name + ": part '" + p.name + "' leaves the shape");
      }
    }
  }
}

const Part * SimObject::part(const std::string & n) const
{
  for (const auto & p : parts) {
    if (p.name == n) {
      return &p;
    }
  }
  return nullptr;
}

Aabb bounds(const Shape & shape, const Pose & pose)
{
  const Eigen::Matrix3d r = pose.rotation.toRotationMatrix();
  Vec3 half;
  if (auto b = std::get_if<geom::Box>(&shape)) {
    half = r.cwiseAbs() * b->half_extents;
  } else {
    const auto & c = std::get<geom::Cylinder>(shape);
    const Vec3 a = r.col(2);
    for (int i = 0; i < 3; ++i) {
      half[i] = std::abs(a[i]) * c.height / 2 +
        c.radius * std::sqrt(std::max(0.0, 1 - a[i] * a[i]));
    }
  }
  return {pose.translation - half, pose.translation + half};
}

double tilt(const SimObject & o)
{
  return geom::angle_between<double>(o.pose.rotate(o.up_axis), Vec3::UnitZ());
}

int SimState::find(const std::string & name) const
{
  for (const auto & o : objects) {
    if (o.name == name) {
      return o.id;
    }
  }
  return -1;
}

const SimObject & SimState::object(const std::string & name) const
{
  const int id = find(name);
  if (id < 0) {
    throw ConfigError("no object named '" + name + "'");
  }
  return objects[static_cast<std::size_t>(id)];
}

bool SimState::motion_finished() const
{
  return !script || waypoint >= script->waypoints.size();
}

const char * disturbance_name(DisturbanceKind k)
{
  switch (k) {
    case DisturbanceKind::DropWithProb: return "drop_with_prob";
    case DisturbanceKind::PlacementNoise: return "placement_noise";
    case DisturbanceKind::MoveObject: return "move_object";
    case DisturbanceKind::ForceRelease: return "force_release";
    case DisturbanceKind::RotateObject: return "rotate_object";
    case DisturbanceKind::TiltHeld: return "tilt_held";
    case DisturbanceKind::RelevelHeld: return "relevel_held";
  }
  return "?";
}

DisturbanceKind disturbance_from_name(const std::string & s)
{
  for (auto k : {DisturbanceKind::DropWithProb, DisturbanceKind::PlacementNoise,
      DisturbanceKind::MoveObject, DisturbanceKind::ForceRelease, DisturbanceKind::RotateObject,
      DisturbanceKind::TiltHeld, DisturbanceKind::RelevelHeld})
  {
    if (s == disturbance_name(k)) {
      return k;
    }
  }
  throw ConfigError("unknown disturbance '" + s + "'");
}

void Disturbance::validate() const
{
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError("drop probability must be in [0, 1]");
  }
  if (!(q >= 0.0)) {
    throw ConfigError("placement noise must be non-negative");
  }
  const bool per_event =
    kind == DisturbanceKind::DropWithProb || kind == DisturbanceKind::PlacementNoise;
  if (!per_event && trigger.tick < 0 && trigger.event.empty()) {
    throw ConfigError(std::string(disturbance_name(kind)) + " needs a trigger");
  }
  if (trigger.offset < 0) {
    throw ConfigError("trigger offset must be non-negative");
  }
  if ((kind == DisturbanceKind::MoveObject || kind == DisturbanceKind::RotateObject) &&
    object.empty())
  {
    throw ConfigError(std::string(disturbance_name(kind)) + " needs an object");
  }
  if (!std::isfinite(distance) || !std::isfinite(angle)) {
    throw ConfigError("disturbance magnitudes must be finite");
  }
}

std::vector<CameraModel> default_cameras()
{
  CameraModel front;
  front.camera_to_world = geom::look_at(Vec3(0, -0.8, 0.5), Vec3(0, 0, 0.05), Vec3(0, 0, 1));
  CameraModel top;
  top.camera_to_world = geom::look_at(Vec3(0, 0, 1.1), Vec3(0, 0, 0), Vec3(0, 1, 0));
  return {front, top};
}

SimState build_scene(const task::TaskTemplate & t, std::uint64_t seed)
{
  SimState s;
  s.rng.seed(seed ^ 0x5eedf00dULL);
  std::mt19937_64 jitter_rng(seed);
  const auto jitter = [&](double a) {
      return std::uniform_real_distribution<double>(-a, a)(jitter_rng);
    };
  SceneBuilder b{s};
  s.ee = Pose::from_translation(Vec3(0, -0.05, 0.3));

  switch (t.name) {
    case task::TaskName::StackInOrder: {
        const double h = t.param("block_size") / 2;
        const Vec3 starts[] = {{-0.12, -0.10, 0}, {0.0, -0.14, 0}, {-0.14, 0.06, 0}};
        for (int i = 0; i < 3; ++i) {
          const Vec3 c = starts[i] + Vec3(jitter(0.01), jitter(0.01), h);
          auto & o = b.add(t.objects[static_cast<std::size_t>(i)], geom::Box{Vec3::Constant(h)},
            {yaw(jitter(0.2)), c});
          b.part(o, "top", geom::Box{Vec3(h, h, 0.0015)}, Vec3(0, 0, h - 0.0015));
        }
        break;
      }
    case task::TaskName::SweepHalf: {
        const double h = t.param("block_size") / 2;
        const double lanes[] = {-0.09, -0.03, 0.03, 0.09};
        for (std::size_t i = 0; i < t.objects.size(); ++i) {
          const double x = lanes[i % 4] + jitter(0.005);
          const double y = -0.25 + 0.025 * static_cast<double>(i / 4) + jitter(0.002);
          b.add(t.objects[i], geom::Box{Vec3::Constant(h)}, {yaw(0), Vec3(x, y, h)});
        }
        break;
      }
    case task::TaskName::SlotPen: {
        const Quaterniond lying = yaw(jitter(0.3)) * Quaterniond(AngleAxisd(
          std::numbers::pi / 2, Vec3::UnitY()));
        auto & pen = b.add(
          "pen", geom::Cylinder{0.006, 0.14},
          {lying, Vec3(-0.12 + jitter(0.01), -0.08 + jitter(0.01), 0.006)});
        b.part(pen, "tip", geom::Cylinder{0.006, 0.01}, Vec3(0, 0, 0.065));
        auto & holder = b.add(
          "holder", geom::Cylinder{0.025, 0.08},
          Pose::from_translation(Vec3(t.param("holder_x"), t.param("holder_y"), 0.04)));
        b.part(holder, "rim", geom::Cylinder{0.025, 0.003}, Vec3(0, 0, 0.0385));
        holder.receptacle = true;
        holder.bore_radius = 0.019;
        holder.floor_height = 0.005;
        break;
      }
    case task::TaskName::StowBook: {
        auto & book = b.add(
          "book", geom::Box{Vec3(0.1, 0.075, 0.015)},
          {yaw(jitter(0.15)), Vec3(-0.10 + jitter(0.01), -0.08 + jitter(0.01), 0.015)});
        b.part(book, "spine", geom::Box{Vec3(0.1, 0.004, 0.015)}, Vec3(0, -0.071, 0));
        book.up_axis = Vec3::UnitX();
        const double top = t.param("shelf_top");
        auto & shelf = b.add(
          "shelf", geom::Box{Vec3(t.param("shelf_hx"), t.param("shelf_hy"), top / 2)},
          Pose::from_translation(Vec3(t.param("shelf_x"), t.param("shelf_y"), top / 2)));
        shelf.receptacle = true;
        break;
      }
    case task::TaskName::PourTea: {
        auto & pot = b.add(
          "teapot", geom::Cylinder{0.05, 0.10},
          Pose::from_translation(Vec3(-0.12 + jitter(0.01), -0.05 + jitter(0.01), 0.05)));
        b.part(pot, "lid", geom::Cylinder{0.03, 0.004}, Vec3(0, 0, 0.048));
        s.teapot = pot.id;  // before the next add invalidates the reference
        auto & cup = b.add(
          "cup", geom::Cylinder{0.035, 0.06},
          Pose::from_translation(Vec3(t.param("cup_x"), t.param("cup_y"), 0.03)));
        b.part(cup, "rim", geom::Cylinder{0.035, 0.003}, Vec3(0, 0, 0.0285));
        s.cup = cup.id;
        break;
      }
  }
  for (const auto & o : s.objects) {
    o.validate();
  }
  for (const auto & name : t.objects) {
    if (s.find(name) < 0) {
      throw ConfigError("template object '" + name + "' is not in the scene");
    }
  }
  return s;
}

}  // namespace cam::sim
