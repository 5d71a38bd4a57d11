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
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cam/elementizer.hpp"
#include "cam/geom3d.hpp"
#include "cam/monitor.hpp"
#include "cam/taskgen.hpp"
#include "json.hpp"

namespace cam::sim
{

using geom::CameraModel;
using geom::Pose;
using geom::Shape;
using geom::Vec3;

inline constexpr double kTickHz = 20.0;
inline constexpr int kWorld = -1;        // resting on the table
inline constexpr int kEndEffector = -2;  // held

struct Part
{
  std::string name;
  Shape shape;
  Pose local;  // in the owner's frame
  int id = kNoLabel;
};

struct SimObject
{
  int id = 0;
  std::string name;
  Shape shape;
  Pose pose;
  std::vector<Part> parts;
  int attached_to = kWorld;
  Vec3 up_axis = Vec3::UnitZ();  // local axis that points up when the object is upright
  bool receptacle = false;       // may hold tall objects upright
  double bore_radius = 0.0;      // > 0 when objects can sit inside
  double floor_height = 0.0;

  /// Throws ConfigError when a dimension is non-positive or a part leaves the shape.
  void validate() const;
  const Part * part(const std::string & name) const;
};

/// World-frame axis-aligned bounds.
struct Aabb
{
  Vec3 lo;
  Vec3 hi;
};

Aabb bounds(const Shape & shape, const Pose & pose);

enum class WaypointEvent { None, Grasp, Release };

struct Waypoint
{
  Pose ee;
  WaypointEvent event = WaypointEvent::None;
  int object = -1;
  Pose expected_object;  // grasp succeeds only near this pose
  double speed = 0.01;          // m per tick
  double angular_speed = 0.1;   // rad per tick
  int dwell = 0;                // ticks to hold once reached
};

struct PolicyScript
{
  std::string action;
  std::vector<Waypoint> waypoints;
  bool open_loop = true;

  void validate(const std::vector<SimObject> & objects) const;
};

enum class DisturbanceKind
{
  DropWithProb, PlacementNoise, MoveObject, ForceRelease, RotateObject, TiltHeld, RelevelHeld
};

const char * disturbance_name(DisturbanceKind k);
DisturbanceKind disturbance_from_name(const std::string & s);

/// Fires at an absolute tick, or offset ticks after the first occurrence
/// of an event ("script:<action>", "grasp:<object>", "release:<object>").
struct Trigger
{
  int tick = -1;
  std::string event;
  int offset = 0;
  int offset_max = -1;  // when >= offset the offset is drawn uniformly from [offset, offset_max]
};

struct Disturbance
{
  DisturbanceKind kind = DisturbanceKind::MoveObject;
  double p = 0.0;          // DropWithProb
  double q = 0.0;          // PlacementNoise, meters
  std::string object;      // MoveObject, RotateObject
  double distance = 0.0;   // MoveObject: magnitude in the table plane
  double distance_max = -1.0;
  Vec3 axis = Vec3::UnitX();  // rotation axis or move direction; zero draws a random horizontal one
  double angle = 0.0;
  double angle_max = -1.0;
  Trigger trigger;

  void validate() const;
};

struct SimEvent
{
  int tick = 0;
  std::string kind;
  std::string detail;
};

/// A disturbance with its random draws resolved.
struct ArmedDisturbance
{
  Disturbance spec;
  int fire_tick = -1;  // -1 while waiting for the trigger event
  bool fired = false;
  int target = -1;     // scheduled drops
};

struct SimState
{
  int tick = 0;
  std::vector<SimObject> objects;
  Pose ee;
  int held = -1;
  Pose grasp_rel;
  std::optional<PolicyScript> script;
  std::size_t waypoint = 0;
  int dwell_left = -1;
  std::vector<ArmedDisturbance> pending;
  std::vector<SimEvent> log;
  std::mt19937_64 rng;
  double drop_p = 0.0;
  double placement_q = 0.0;
  std::vector<std::string> seen_events;

  // pour bookkeeping
  int pour_ticks = 0;
  int spill_run = 0;
  bool spilled = false;
  int cup = -1;
  int teapot = -1;
  // sweep bookkeeping
  bool pusher_active = false;

  int find(const std::string & name) const;  // -1 when absent
  const SimObject & object(const std::string & name) const;
  bool motion_finished() const;
};

/// Builds the task scene. seed jitters object placement.
SimState build_scene(const task::TaskTemplate & tmpl, std::uint64_t seed);

/// Arms disturbances; the state's rng must already be seeded.
void arm_disturbances(SimState & s, const std::vector<Disturbance> & ds);

/// Records an event and arms triggers waiting for it.
void note_event(SimState & s, const std::string & event, const std::string & detail = {});

void start_script(SimState & s, PolicyScript script);

void step(SimState & s, task::Control control);

/// Instant drop-to-support for an object that is not held.
void settle(SimState & s, int id);

void release_held(SimState & s, const std::string & why);

/// Tilt of an object's up axis from vertical, radians.
double tilt(const SimObject & o);

// ---- policies ----

PolicyScript make_script(SimState & s, const task::TaskTemplate & tmpl, const task::Subgoal & sg);

// ---- rendering ----

std::vector<CameraModel> default_cameras();

std::vector<geom::RenderedView> render(const SimState & s, std::span<const CameraModel> cams);

/// Instance and part masks for one entity in every view.
elem::MaskBundle masks_for(
  const SimState & s, std::span<const geom::RenderedView> views, const std::string & entity,
  const std::string & part, const elem::ElementType & type);

// ---- oracle ----

bool oracle_success(const SimState & s, const task::TaskTemplate & tmpl);

/// Centers of sweep blocks inside the target region.
int sweep_count(const SimState & s, const task::TaskTemplate & tmpl);

// ---- episodes ----

enum class MonitorMode { Off, ReactiveOnly, ProactiveOnly, Full };

const char * monitor_mode_name(MonitorMode m);
MonitorMode monitor_mode_from_name(const std::string & s);

struct EpisodeConfig
{
  task::TaskTemplate task;
  std::vector<Disturbance> disturbances;
  MonitorMode mode = MonitorMode::Full;
  std::uint64_t seed = 0;
  int budget_ticks = 1400;
  mon::TrackerConfig tracker;
  mon::DebouncePolicy debounce;
  std::size_t history_capacity = 256;
  int max_retries = 5;
  const task::RuleTable * rules = nullptr;  // defaults when null
  const lang::ThresholdKB * kb = nullptr;
  bool record_elements = true;  // element points in the event stream
};

struct LogEvent
{
  int tick = 0;
  std::string kind;
  nlohmann::json payload;
};

struct EpisodeResult
{
  bool success = false;
  int ticks = 0;  // tick at which the plan ended, or the budget
  bool aborted = false;
  std::string end_reason;
  std::vector<mon::Verdict> verdicts;   // violations and completions
  std::vector<mon::Marker> injections;
  std::vector<LogEvent> events;
  int validation_failures = 0;
};

/// Default time budget for a task, ticks at 20 Hz.
int default_budget(task::TaskName t);

EpisodeResult run_episode(const EpisodeConfig & cfg);

nlohmann::json elements_json(const elem::ElementSet & elems, bool with_points);

/// Element set the first subgoal would see (used by validate and tests).
elem::ElementSet first_subgoal_elements(const task::TaskTemplate & tmpl, std::uint64_t seed);

}  // namespace cam::sim
