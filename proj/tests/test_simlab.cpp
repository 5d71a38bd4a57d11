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



#include "doctest.h"

#include <cmath>
#include <numbers>

#include "cam/error.hpp"
#include "cam/simlab.hpp"

using namespace cam;
using namespace cam::sim;
using task::TaskName;

namespace
{

constexpr double kDeg = std::numbers::pi / 180.0;

task::TaskTemplate tmpl(TaskName t) {return task::default_template(t);}

SimObject & obj(SimState & s, const std::string & name)
{
  return s.objects[static_cast<std::size_t>(s.find(name))];
}

Disturbance at_tick(DisturbanceKind k, int tick)
{
  Disturbance d;
  d.kind = k;
  d.trigger.tick = tick;
  return d;
}

task::Subgoal first_subgoal(const task::TaskTemplate & t)
{
  return task::nominal_sequence(t).front();
}

// Runs the active script to its end (or a tick cap).
void run_script(SimState & s, int cap = 2000)
{
  for (int i = 0; i < cap && !s.motion_finished(); ++i) {
    step(s, task::Control::Continue);
  }
}

bool logged(const SimState & s, const std::string & kind, const std::string & prefix = "")
{
  for (const auto & e : s.log) {
    if (e.kind == kind && e.detail.rfind(prefix, 0) == 0) {
      return true;
    }
  }
  return false;
}

std::string dump(const EpisodeResult & r)
{
  std::string out;
  for (const auto & e : r.events) {
    out += std::to_string(e.tick) + " " + e.kind + " " + e.payload.dump() + "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("stepping without a script only advances time")
{
  auto s = build_scene(tmpl(TaskName::StackInOrder), 3);
  const auto before = s.objects;
  const auto ee = s.ee.translation;
  for (int i = 0; i < 10; ++i) {
    step(s, task::Control::Continue);
  }
  CHECK(s.tick == 10);
  CHECK(s.ee.translation == ee);
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(s.objects[i].pose.translation == before[i].pose.translation);
  }
}

TEST_CASE("a released block drops to the table")
{
  auto s = build_scene(tmpl(TaskName::StackInOrder), 0);
  auto & red = obj(s, "red");
  const double h = 0.02;
  red.pose.translation = Vec3(0.2, -0.2, h + 0.1);
  red.attached_to = kEndEffector;
  s.held = red.id;
  s.grasp_rel = s.ee.inverse() * red.pose;
  release_held(s, "test");
  CHECK(s.held == -1);
  CHECK(obj(s, "red").pose.translation.z() == doctest::Approx(h).epsilon(1e-12));
  CHECK(obj(s, "red").attached_to == kWorld);
  CHECK(logged(s, "release:red"));
}

TEST_CASE("a block released over another lands on it")
{
  auto s = build_scene(tmpl(TaskName::StackInOrder), 0);
  const auto red = obj(s, "red");
  auto & green = obj(s, "green");
  green.pose = red.pose;
  green.pose.translation.z() += 0.15;
  green.attached_to = kEndEffector;
  s.held = green.id;
  release_held(s, "test");
  CHECK(obj(s, "green").pose.translation.z() == doctest::Approx(0.06));
  CHECK(obj(s, "green").attached_to == red.id);
}

TEST_CASE("held object follows the gripper rigidly")
{
  const auto t = tmpl(TaskName::StackInOrder);
  auto s = build_scene(t, 4);
  auto seq = task::nominal_sequence(t);
  int held_ticks = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    start_script(s, make_script(s, t, seq[i]));
    int last_tick = s.tick;
    while (!s.motion_finished()) {
      step(s, task::Control::Continue);
      CHECK(s.tick == last_tick + 1);
      last_tick = s.tick;
      if (s.held >= 0) {
        ++held_ticks;
        const Pose want = s.ee * s.grasp_rel;
        const auto & o = s.objects[static_cast<std::size_t>(s.held)];
        CHECK((o.pose.translation - want.translation).norm() < 1e-9);
        CHECK(o.pose.rotation.angularDistance(want.rotation) < 1e-9);
      }
    }
  }
  CHECK(held_ticks > 20);
  CHECK(s.held == -1);
  CHECK(obj(s, "red").attached_to == kWorld);
}

TEST_CASE("halt freezes motion but disturbances still fire")
{
  const auto t = tmpl(TaskName::StackInOrder);
  auto s = build_scene(t, 1);
  auto d = at_tick(DisturbanceKind::MoveObject, 3);
  d.object = "blue";
  d.distance = 0.05;
  d.axis = Vec3::UnitY();
  arm_disturbances(s, {d});
  const Vec3 blue0 = obj(s, "blue").pose.translation;
  start_script(s, make_script(s, t, first_subgoal(t)));
  const Vec3 ee0 = s.ee.translation;
  for (int i = 0; i < 5; ++i) {
    step(s, task::Control::HaltAndReplan);
  }
  CHECK(s.ee.translation == ee0);
  const Vec3 moved = obj(s, "blue").pose.translation - blue0;
  CHECK(moved.y() == doctest::Approx(0.05));
  CHECK(std::abs(moved.x()) < 1e-12);
  CHECK(logged(s, "inject", "move_object blue"));
}

TEST_CASE("certain drop releases the block during the carry")
{
  const auto t = tmpl(TaskName::StackInOrder);
  auto s = build_scene(t, 2);
  Disturbance d;
  d.kind = DisturbanceKind::DropWithProb;
  d.p = 1.0;
  arm_disturbances(s, {d});
  start_script(s, make_script(s, t, first_subgoal(t)));
  run_script(s);
  CHECK(logged(s, "grasp:red"));
  CHECK(logged(s, "inject", "drop_with_prob red"));
  CHECK(s.held == -1);
  CHECK(obj(s, "red").pose.translation.z() == doctest::Approx(0.02));
}

TEST_CASE("zero drop probability never releases")
{
  const auto t = tmpl(TaskName::StackInOrder);
  auto s = build_scene(t, 2);
  Disturbance d;
  d.kind = DisturbanceKind::DropWithProb;
  d.p = 0.0;
  arm_disturbances(s, {d});
  start_script(s, make_script(s, t, first_subgoal(t)));
  run_script(s);
  CHECK(s.held == obj(s, "red").id);
  CHECK_FALSE(logged(s, "inject"));
}

TEST_CASE("placement noise stays within q")
{
  const auto t = tmpl(TaskName::StackInOrder);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto s = build_scene(t, seed);
    Disturbance d;
    d.kind = DisturbanceKind::PlacementNoise;
    d.q = 0.03;
    arm_disturbances(s, {d});
    const auto seq = task::nominal_sequence(t);
    start_script(s, make_script(s, t, seq[0]));
    run_script(s);
    start_script(s, make_script(s, t, seq[1]));
    run_script(s);
    const Vec3 base(t.param("base_x"), t.param("base_y"), 0.02);
    const double off = (obj(s, "red").pose.translation - base).head<2>().norm();
    CHECK(off <= 0.03 + 1e-9);
    CHECK(logged(s, "inject", "placement_noise red"));
  }
}

TEST_CASE("force release with nothing held is skipped")
{
  auto s = build_scene(tmpl(TaskName::SlotPen), 0);
  arm_disturbances(s, {at_tick(DisturbanceKind::ForceRelease, 0)});
  step(s, task::Control::Continue);
  CHECK(logged(s, "inject_skipped"));
  CHECK_FALSE(logged(s, "inject"));
}

TEST_CASE("event triggers fire at the offset after the event")
{
  auto s = build_scene(tmpl(TaskName::StackInOrder), 0);
  Disturbance d;
  d.kind = DisturbanceKind::RotateObject;
  d.object = "green";
  d.axis = Vec3::UnitZ();
  d.angle = 30 * kDeg;
  d.trigger.event = "custom";
  d.trigger.offset = 4;
  arm_disturbances(s, {d});
  const auto q0 = obj(s, "green").pose.rotation;
  step(s, task::Control::Continue);
  note_event(s, "custom");
  const int fired_at = s.tick + 4;
  while (s.tick < fired_at - 1) {
    step(s, task::Control::Continue);
    CHECK(obj(s, "green").pose.rotation.angularDistance(q0) < 1e-12);
  }
  step(s, task::Control::Continue);
  CHECK(obj(s, "green").pose.rotation.angularDistance(q0) == doctest::Approx(30 * kDeg));
}

TEST_CASE("tilting the held teapot changes its tilt by the angle")
{
  const auto t = tmpl(TaskName::PourTea);
  auto s = build_scene(t, 0);
  auto d = at_tick(DisturbanceKind::TiltHeld, 60);
  d.axis = Vec3::UnitY();
  d.angle = 20 * kDeg;
  arm_disturbances(s, {d});
  start_script(s, make_script(s, t, first_subgoal(t)));
  run_script(s);
  REQUIRE(s.held == s.teapot);
  const Vec3 ee = s.ee.translation;
  while (s.tick < 60) {
    step(s, task::Control::HaltAndReplan);
  }
  CHECK(tilt(s.objects[static_cast<std::size_t>(s.teapot)]) == doctest::Approx(20 * kDeg));
  CHECK(s.ee.translation == ee);
}

TEST_CASE("disturbance validation")
{
  Disturbance d;
  d.kind = DisturbanceKind::DropWithProb;
  d.p = 1.5;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d.p = 0.5;
  CHECK_NOTHROW(d.validate());
  d.kind = DisturbanceKind::PlacementNoise;
  d.q = -0.01;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  Disturbance m;
  m.kind = DisturbanceKind::MoveObject;
  m.object = "pen";
  CHECK_THROWS_AS(m.validate(), ConfigError);  // no trigger
  m.trigger.tick = 3;
  CHECK_NOTHROW(m.validate());
  m.object.clear();
  CHECK_THROWS_AS(m.validate(), ConfigError);
  CHECK(disturbance_from_name("tilt_held") == DisturbanceKind::TiltHeld);
  CHECK_THROWS_AS(disturbance_from_name("wobble"), ConfigError);
}

TEST_CASE("empty scene renders as all misses")
{
  SimState s;
  const auto cams = default_cameras();
  for (const auto & v : render(s, cams)) {
    for (std::size_t i = 0; i < v.depth.data.size(); ++i) {
      CHECK(v.depth.data[i] == 0.0);
      CHECK(v.instance_ids.data[i] == kNoLabel);
    }
  }
}

TEST_CASE("pen tip pixels carry the tip part id")
{
  auto s = build_scene(tmpl(TaskName::SlotPen), 0);
  auto & pen = obj(s, "pen");
  pen.pose = {Eigen::Quaterniond(Eigen::AngleAxisd(90 * kDeg, Vec3::UnitY())),
    Vec3(0.0, 0.0, 0.006)};
  const int tip = pen.part("tip")->id;
  const auto cams = default_cameras();
  const auto views = render(s, cams);
  int tip_pixels = 0;
  int body_pixels = 0;
  for (std::size_t c = 0; c < cams.size(); ++c) {
    const auto & v = views[c];
    for (int y = 0; y < v.depth.height; ++y) {
      for (int x = 0; x < v.depth.width; ++x) {
        if (v.instance_ids.at(x, y) != pen.id) {
          continue;
        }
        const Vec3 hit = cams[c].origin() + cams[c].pixel_ray(x, y) * v.depth.at(x, y);
        // the tip is the last centimeter along the pen axis
        const bool in_tip = pen.pose.inverse().apply(hit).z() >= 0.06 - 1e-9;
        CHECK((v.part_ids.at(x, y) == tip) == in_tip);
        (in_tip ? tip_pixels : body_pixels)++;
      }
    }
  }
  CHECK(tip_pixels > 0);
  CHECK(body_pixels > tip_pixels);
}

TEST_CASE("top view of a stack shows only the top block")
{
  auto s = build_scene(tmpl(TaskName::StackInOrder), 0);
  auto & red = obj(s, "red");
  red.pose = Pose::from_translation(Vec3(0.0, 0.0, 0.02));
  auto & green = obj(s, "green");
  green.pose = Pose::from_translation(Vec3(0.0, 0.0, 0.06));
  green.attached_to = red.id;
  const auto cams = default_cameras();
  const auto views = render(s, cams);
  // cameras are front then top
  const auto & top = views[1];
  int red_px = 0;
  int green_px = 0;
  for (int id : top.instance_ids.data) {
    red_px += id == red.id;
    green_px += id == green.id;
  }
  CHECK(red_px == 0);
  CHECK(green_px > 0);
  int red_front = 0;
  for (int id : views[0].instance_ids.data) {
    red_front += id == red.id;
  }
  CHECK(red_front > 0);
}

TEST_CASE("oracle examples")
{
  const auto t = tmpl(TaskName::StackInOrder);
  auto s = build_scene(t, 0);
  auto place = [&](const std::string & name, const Vec3 & at, int on) {
      auto & o = obj(s, name);
      o.pose = Pose::from_translation(at);
      o.attached_to = on;
    };
  place("red", Vec3(0.1, 0.1, 0.02), kWorld);
  place("green", Vec3(0.105, 0.1, 0.06), obj(s, "red").id);
  place("blue", Vec3(0.1, 0.095, 0.10), obj(s, "green").id);
  CHECK(oracle_success(s, t));
  place("green", Vec3(-0.1, 0.1, 0.02), kWorld);
  place("blue", Vec3(-0.1, 0.1, 0.06), obj(s, "green").id);
  CHECK_FALSE(oracle_success(s, t));

  const auto sw = tmpl(TaskName::SweepHalf);
  auto z = build_scene(sw, 0);
  auto arrange = [&](int inside) {
      for (int i = 0; i < 40; ++i) {
        auto & o = z.objects[static_cast<std::size_t>(i)];
        const double x = -0.1 + 0.025 * (i % 8);
        const double y = i < inside ? 0.05 + 0.025 * (i / 8) : -0.25 + 0.025 * (i / 8);
        o.pose = Pose::from_translation(Vec3(x, y, 0.01));
      }
    };
  arrange(20);
  CHECK(sweep_count(z, sw) == 20);
  CHECK(oracle_success(z, sw));
  arrange(25);
  CHECK_FALSE(oracle_success(z, sw));
  arrange(16);
  CHECK(oracle_success(z, sw));
  arrange(15);
  CHECK_FALSE(oracle_success(z, sw));
}

TEST_CASE("mode names and budgets")
{
  for (auto m : {MonitorMode::Off, MonitorMode::ReactiveOnly, MonitorMode::ProactiveOnly,
      MonitorMode::Full})
  {
    CHECK(monitor_mode_from_name(monitor_mode_name(m)) == m);
  }
  CHECK_THROWS_AS(monitor_mode_from_name("sometimes"), ConfigError);
  // 70 s at 20 Hz
  CHECK(default_budget(TaskName::StackInOrder) == 1400);
}

TEST_CASE("first subgoal elements match the subgoal's element list")
{
  for (auto name : task::all_tasks()) {
    const auto t = tmpl(name);
    const auto es = first_subgoal_elements(t, 7);
    const auto sg = first_subgoal(t);
    REQUIRE(es.size() == sg.elements.size());
    for (std::size_t i = 0; i < sg.elements.size(); ++i) {
      CHECK(es.elements[i].entity == sg.elements[i].entity);
      CHECK(es.elements[i].type.kind == sg.elements[i].type.kind);
      CHECK(static_cast<int>(es.elements[i].points.size()) ==
        sg.elements[i].type.required_points());
    }
  }
}

TEST_CASE("episodes are deterministic")
{
  EpisodeConfig c;
  c.task = tmpl(TaskName::StackInOrder);
  Disturbance d;
  d.kind = DisturbanceKind::DropWithProb;
  d.p = 0.3;
  c.disturbances = {d};
  c.seed = 11;
  const auto a = run_episode(c);
  const auto b = run_episode(c);
  CHECK(dump(a) == dump(b));
  c.seed = 12;
  CHECK(dump(run_episode(c)) != dump(a));
}

TEST_CASE("clean episodes: monitor and oracle agree")
{
  for (auto name : task::all_tasks()) {
    const auto t = tmpl(name);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      CAPTURE(task::task_name(name));
      CAPTURE(seed);
      EpisodeConfig c;
      c.task = t;
      c.seed = seed;
      c.budget_ticks = default_budget(name);
      c.record_elements = false;
      const auto r = run_episode(c);
      CHECK(r.success);
      CHECK_FALSE(r.aborted);
      CHECK(r.validation_failures == 0);
      CHECK(r.injections.empty());
      for (const auto & v : r.verdicts) {
        if (v.outcome != mon::Outcome::Violation) {
          continue;
        }
        // the sweep halts by design when its during constraint flips
        CHECK(name == TaskName::SweepHalf);
        CHECK(v.reason.find("halt sweeping") != std::string::npos);
      }
      c.mode = MonitorMode::Off;
      CHECK(run_episode(c).success == (name != TaskName::SweepHalf));
    }
  }
}

TEST_CASE("episode log covers verdicts, injections and subgoals")
{
  EpisodeConfig c;
  c.task = tmpl(TaskName::SlotPen);
  Disturbance d;
  d.kind = DisturbanceKind::ForceRelease;
  d.trigger.event = "script:transfer";
  d.trigger.offset = 8;
  c.disturbances = {d};
  c.seed = 5;
  c.budget_ticks = default_budget(TaskName::SlotPen);
  const auto r = run_episode(c);
  CHECK(r.success);
  REQUIRE(r.injections.size() == 1);
  int verdicts = 0;
  int injects = 0;
  int subgoals = 0;
  int elements = 0;
  for (const auto & e : r.events) {
    verdicts += e.kind == "verdict";
    injects += e.kind == "inject";
    subgoals += e.kind == "subgoal";
    elements += e.kind == "elements";
  }
  CHECK(verdicts == static_cast<int>(r.verdicts.size()));
  CHECK(injects == 1);
  CHECK(subgoals == elements);
  CHECK(r.events.front().kind == "episode_start");
  CHECK(r.events.back().kind == "episode_end");
  bool dropped = false;
  for (const auto & v : r.verdicts) {
    dropped = dropped || (v.outcome == mon::Outcome::Violation && v.tick >= r.injections[0].tick);
  }
  CHECK(dropped);
}
