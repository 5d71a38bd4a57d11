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
#include <array>
#include <cstdio>
#include <stdexcept>

#include "cam/error.hpp"
#include "cam/taskgen.hpp"

namespace cam::task
{

namespace
{

using elem::ElementType;

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string vec(double x, double y, double z)
{
  return "(" + num(x) + ", " + num(y) + ", " + num(z) + ")";
}

// Builds one program's text. Tolerances come from the KB scaled by relax.
class ProgramBuilder
{
public:
  ProgramBuilder(const TaskTemplate & t, const lang::ThresholdKB & kb, double relax)
  : t_(t), kb_(kb), relax_(relax) {}

  std::string operator()(
    const std::string & name, lang::Mode mode,
    const std::vector<std::pair<std::string, std::string>> & tols, const std::string & body,
    const std::string & reason) const
  {
    std::string s = "constraint \"" + name + "\" mode " + lang::mode_name(mode) + "\n";
    for (const auto & [local, kind] : tols) {
      s += "  tol " + local + " = " + tolerance(kind) + "\n";
    }
    s += "{\n  " + body + "\n}\nfail \"" + reason + "\"\n";
    return s;
  }

private:
  std::string tolerance(const std::string & kind) const
  {
    const auto entry = lang::kb_lookup(kb_, task_name(t_.name), kind);
    if (!entry) {
      throw ConfigError(
              std::string("no tolerance for ") + task_name(t_.name) + "." + kind);
    }
    double v = entry->value;
    // counts are band edges, never relaxed
    if (entry->unit != lang::Unit::Count) {
      v *= relax_;
    }
    const char * unit = entry->unit == lang::Unit::Meters ? "m" :
      entry->unit == lang::Unit::Radians ? "rad" : "count";
    return num(v) + " " + unit;
  }

  const TaskTemplate & t_;
  const lang::ThresholdKB & kb_;
  double relax_;
};

constexpr auto During = lang::Mode::During;
constexpr auto Done = lang::Mode::OnCompletion;

ElementSpec spec(std::string entity, std::string part, ElementType type, std::string serves)
{
  return {std::move(entity), std::move(part), type, std::move(serves)};
}

ElementSpec ee_spec()
{
  return spec(kEndEffector, "body", ElementType::point(), "gripper position");
}

std::string sweep_list(const TaskTemplate & t)
{
  std::string s = "[";
  for (std::size_t i = 0; i < t.objects.size(); ++i) {
    s += (i ? ", e(" : "e(") + std::to_string(i) + ")";
  }
  return s + "]";
}

std::string sweep_region(const TaskTemplate & t)
{
  return "box(" + vec(t.param("region_x0"), t.param("region_y0"), -1) + ", " +
         vec(t.param("region_x1"), t.param("region_y1"), 1) + ")";
}

// ---- stack_in_order ----

void stack_programs(
  const Subgoal & sg, const TaskTemplate & t, const ProgramBuilder & P, EmittedConstraints & out)
{
  const auto & obj = sg.object;
  const double h = t.param("block_size");
  if (sg.action == "pick") {
    // once the gripper has reached the block, the block has to stay with it
    const std::string gap = "dist(centroid(e(0)), pos(e(1), 0))";
    out.during.push_back(
      P(
        "held", During, {{"hold", "point_coincidence"}},
        gap + " <= hold or at(" + gap + ", 6) > hold",
        obj + " dropped while lifting ({dist} m from gripper)"));
    out.completion.push_back(
      P(
        "grasped", Done, {{"hold", "point_coincidence"}},
        "dist(centroid(e(0)), pos(e(1), 0)) <= hold",
        obj + " block not grasped ({dist} m from gripper)"));
    return;
  }
  // place: e(0) block, then support when stacking, then gripper
  const bool on_base = sg.target == "base";
  const std::string target = on_base ?
    vec(t.param("base_x"), t.param("base_y"), h) :
    "centroid(e(1)) + " + vec(0, 0, h);
  const std::string ee = on_base ? "e(1)" : "e(2)";
  out.during.push_back(
    P(
      "held", During, {{"hold", "point_coincidence"},
        {"zone", on_base ? "base_zone" : "placement_zone"}},
      "dist(centroid(e(0)), pos(" + ee + ", 0)) <= hold or dist(centroid(e(0)), " + target +
      ") <= zone",
      obj + " dropped during transfer ({dist} m from gripper)"));
  if (on_base) {
    out.completion.push_back(
      P(
        "base_placed", Done, {{"zone", "base_zone"}},
        "dist(centroid(e(0)), " + target + ") <= zone",
        obj + " block not at base ({dist} m)"));
  } else {
    out.completion.push_back(
      P(
        "stacked_on", Done, {{"limit", "stacked_on"}},
        "dist(centroid(e(0)), " + target + ") <= limit",
        "block not on target ({dist} m)"));
  }
}

// ---- sweep_half ----

void sweep_programs(
  const Subgoal & sg, const TaskTemplate & t, const ProgramBuilder & P, EmittedConstraints & out)
{
  const std::string count = "count_within(" + sweep_list(t) + ", " + sweep_region(t) + ")";
  if (sg.action == "sweep") {
    // leaving this program's satisfied set is what halts the sweeping policy
    out.during.push_back(
      P(
        "half_reached", During, {{"low", "band_low"}}, count + " < low",
        "{count_within} blocks in region, halt sweeping"));
  }
  out.completion.push_back(
    P(
      "count_band", Done, {{"low", "band_low"}, {"high", "band_high"}},
      count + " >= low and " + count + " <= high",
      "{count_within} blocks in region, outside band"));
}

// ---- slot_pen: e(0) pen, e(1) holder rim, e(2) gripper ----

void slot_programs(
  const Subgoal & sg, const TaskTemplate &, const ProgramBuilder & P, EmittedConstraints & out)
{
  if (sg.action == "pick") {
    out.during.push_back(
      P(
        "pen_still", During, {{"hold", "point_coincidence"}, {"still", "object_still"}},
        "dist(centroid(e(0)), pos(e(1), 0)) <= hold or displacement(e(0), 255) <= still",
        "pen moved during grasping ({displacement} m)"));
    out.completion.push_back(
      P(
        "grasped", Done, {{"hold", "point_coincidence"}},
        "dist(centroid(e(0)), pos(e(1), 0)) <= hold",
        "pen not grasped ({dist} m from gripper)"));
    return;
  }
  const std::string held = "dist(centroid(e(0)), pos(e(2), 0)) <= hold";
  if (sg.action == "transfer" || sg.action == "relevel") {
    out.during.push_back(
      P(
        "held", During, {{"hold", "point_coincidence"}}, held,
        "pen dropped during transfer ({dist} m from gripper)"));
    out.completion.push_back(
      P(
        "held", Done, {{"hold", "point_coincidence"}}, held,
        "pen not held ({dist} m from gripper)"));
    if (sg.action == "transfer") {
      out.completion.push_back(
        P(
          "aligned", Done, {{"vert", "verticality"}, {"xy", "alignment_xy"}},
          "angle(dir(e(0)), axis_z) <= vert and "
          "dist(proj_xy(centroid(e(0))), proj_xy(centroid(e(1)))) <= xy",
          "pen not aligned over holder ({angle} rad, {dist} m)"));
    } else {
      out.completion.push_back(
        P(
          "upright", Done, {{"vert", "verticality"}}, "angle(dir(e(0)), axis_z) <= vert",
          "pen not upright ({angle} rad)"));
    }
    return;
  }
  // insert
  out.during.push_back(
    P(
      "holder_still", During, {{"still", "object_still"}}, "displacement(e(1), 255) <= still",
      "holder moved during insertion ({displacement} m)"));
  out.completion.push_back(
    P(
      "in_holder", Done, {{"vert", "verticality"}},
      "angle(dir(e(0)), axis_z) <= vert and inside(centroid(e(0)), "
      "box(centroid(e(1)) - (0.015, 0.015, 0.12), centroid(e(1)) + (0.015, 0.015, 0.01)))",
      "pen not in holder ({angle} rad)"));
}

// ---- stow_book: e(0) spine, e(1) book, e(2) gripper ----

void stow_programs(
  const Subgoal & sg, const TaskTemplate & t, const ProgramBuilder & P, EmittedConstraints & out)
{
  const std::string upright = "angle(dir(e(0)), axis_z) <= vert";
  // Once lifted, the grip sits off the body centroid; later subgoals compare
  // against the offset seen when they started.
  const std::string gap = "dist(centroid(e(1)), pos(e(2), 0))";
  const auto held_prog = [&](lang::Mode m, bool relative) {
      return P(
        "held", m, {{"hold", "point_coincidence"}},
        gap + " <= " + (relative ? "at(" + gap + ", 255) + hold" : "hold"),
        "book not held ({dist} m from gripper)");
    };
  const std::string shelf_xy = "box(" + vec(
    t.param("shelf_x") - t.param("shelf_hx"),
    t.param("shelf_y") - t.param("shelf_hy"), -1) + ", " +
    vec(
    t.param("shelf_x") + t.param("shelf_hx"),
    t.param("shelf_y") + t.param("shelf_hy"), 1) + ")";
  if (sg.action == "pick") {
    out.during.push_back(
      P(
        "grasp_rotation", During, {{"rot", "grasp_rotation"}}, "rotation(e(0), 255) <= rot",
        "book rotated during grasping ({rotation} rad)"));
    out.completion.push_back(held_prog(Done, false));
    return;
  }
  if (sg.action == "orient" || sg.action == "relevel") {
    out.during.push_back(held_prog(During, true));
    out.completion.push_back(held_prog(Done, true));
    out.completion.push_back(
      P(
        "upright", Done, {{"vert", "verticality"}}, upright,
        "book spine not vertical ({angle} rad)"));
    return;
  }
  if (sg.action == "transfer") {
    out.during.push_back(held_prog(During, true));
    out.during.push_back(
      P(
        "upright", During, {{"vert", "verticality"}}, upright,
        "book tilted during transfer ({angle} rad)"));
    out.completion.push_back(held_prog(Done, true));
    out.completion.push_back(
      P(
        "above_shelf", Done, {}, "inside(proj_xy(centroid(e(1))), " + shelf_xy + ")",
        "book not above shelf"));
    return;
  }
  // place
  const double top = t.param("shelf_top");
  const std::string shelf_box = "box(" + vec(
    t.param("shelf_x") - t.param("shelf_hx"),
    t.param("shelf_y") - t.param("shelf_hy"), top) + ", " +
    vec(
    t.param("shelf_x") + t.param("shelf_hx"),
    t.param("shelf_y") + t.param("shelf_hy"), top + 0.25) + ")";
  out.during.push_back(
    P(
      "stays_upright", During, {{"vert", "verticality"}}, upright,
      "book fell over ({angle} rad)"));
  out.completion.push_back(
    P(
      "on_shelf", Done, {{"vert", "verticality"}},
      upright + " and inside(centroid(e(1)), " + shelf_box + ")",
      "book not upright on shelf ({angle} rad)"));
}

// ---- pour_tea: e(0) lid, e(1) cup rim, e(2) gripper; pick and relevel skip the cup ----

void pour_programs(
  const Subgoal & sg, const TaskTemplate & t, const ProgramBuilder & P, EmittedConstraints & out)
{
  const std::string tilt = "angle(normal(e(0)), axis_z)";
  const bool with_cup = sg.action == "transfer" || sg.action == "pour";
  const std::string ee = with_cup ? "e(2)" : "e(1)";
  const auto held = [&](lang::Mode m) {
      return P(
        "held", m, {{"hold", "point_coincidence"}},
        "dist(centroid(e(0)), pos(" + ee + ", 0)) <= hold",
        "teapot not held ({dist} m from gripper)");
    };
  if (sg.action == "pick") {
    out.completion.push_back(held(Done));
    return;
  }
  if (sg.action == "transfer") {
    out.during.push_back(held(During));
    out.during.push_back(
      P("level_surface", During, {{"level", "level_surface"}}, tilt + " <= level",
        "teapot tilted {angle}"));
    out.completion.push_back(held(Done));
    out.completion.push_back(
      P(
        "over_cup", Done, {{"xy", "alignment_xy"}},
        "dist(proj_xy(centroid(e(0))), proj_xy(centroid(e(1))) - " +
        vec(t.param("pour_dx"), 0, 0) + ") <= xy",
        "teapot not beside cup ({dist} m)"));
    return;
  }
  if (sg.action == "pour") {
    out.during.push_back(held(During));
    out.during.push_back(
      P(
        "pour_hold", During, {{"drop", "pour_drop"}},
        tilt + " >= at(" + tilt + ", 5) - drop",
        "teapot returned level during pour ({angle} rad)"));
    out.completion.push_back(
      P("poured", Done, {{"tilt", "pour_tilt"}}, tilt + " >= tilt",
        "teapot not tilted for pouring ({angle} rad)"));
    return;
  }
  // restore or relevel
  out.during.push_back(held(During));
  out.completion.push_back(
    P("level_surface", Done, {{"level", "level_surface"}}, tilt + " <= level",
      "teapot still tilted {angle}"));
}

std::string block_name(int i)
{
  char buf[16];
  std::snprintf(buf, sizeof(buf), "block%02d", i);
  return buf;
}

}  // namespace

const char * task_name(TaskName t)
{
  switch (t) {
    case TaskName::StackInOrder: return "stack_in_order";
    case TaskName::SweepHalf: return "sweep_half";
    case TaskName::SlotPen: return "slot_pen";
    case TaskName::StowBook: return "stow_book";
    case TaskName::PourTea: return "pour_tea";
  }
  return "?";
}

TaskName task_from_name(const std::string & s)
{
  for (auto t : all_tasks()) {
    if (s == task_name(t)) {
      return t;
    }
  }
  throw ConfigError("unknown task '" + s + "'");
}

const std::vector<TaskName> & all_tasks()
{
  static const std::vector<TaskName> v{
    TaskName::StackInOrder, TaskName::SweepHalf, TaskName::SlotPen, TaskName::StowBook,
    TaskName::PourTea};
  return v;
}

double TaskTemplate::param(const std::string & key) const
{
  auto it = params.find(key);
  if (it == params.end()) {
    throw ConfigError(std::string(task_name(name)) + ": missing parameter '" + key + "'");
  }
  return it->second;
}

TaskTemplate default_template(TaskName t)
{
  TaskTemplate tt;
  tt.name = t;
  switch (t) {
    case TaskName::StackInOrder:
      tt.instruction = "stack the blocks in order: red at the bottom, then green, then blue";
      tt.objects = {"red", "green", "blue"};
      tt.params = {{"block_size", 0.04}, {"base_x", 0.12}, {"base_y", 0.10}};
      break;
    case TaskName::SweepHalf:
      tt.instruction = "sweep half of the blocks into the target area";
      for (int i = 0; i < 40; ++i) {
        tt.objects.push_back(block_name(i));
      }
      tt.params = {{"block_size", 0.02}, {"region_x0", -0.15}, {"region_x1", 0.15},
        {"region_y0", 0.03}, {"region_y1", 0.30}};
      break;
    case TaskName::SlotPen:
      tt.instruction = "put the pen into the pen holder";
      tt.objects = {"pen", "holder"};
      tt.params = {{"holder_x", 0.15}, {"holder_y", 0.10}};
      break;
    case TaskName::StowBook:
      tt.instruction = "place the book upright on the bookshelf";
      tt.objects = {"book", "shelf"};
      tt.params = {{"shelf_x", 0.16}, {"shelf_y", 0.12}, {"shelf_hx", 0.06},
        {"shelf_hy", 0.10}, {"shelf_top", 0.10}};
      break;
    case TaskName::PourTea:
      tt.instruction = "pour tea from the teapot into the cup";
      tt.objects = {"teapot", "cup"};
      tt.params = {{"cup_x", 0.16}, {"cup_y", 0.06}, {"pour_dx", 0.10}};
      break;
  }
  return tt;
}

Subgoal make_subgoal(
  const TaskTemplate & t, const std::string & action, const std::string & object,
  const std::string & target)
{
  Subgoal sg;
  sg.action = action;
  sg.object = object;
  sg.target = target;
  const auto unknown = [&] {
      return ConfigError(
        std::string(task_name(t.name)) + ": no subgoal for action '" + action + "'");
    };
  switch (t.name) {
    case TaskName::StackInOrder: {
        const auto block = spec(object, "top", ElementType::point(), "block top");
        if (action == "pick") {
          sg.text = "pick " + object + " block";
          sg.elements = {block, ee_spec()};
        } else if (action == "place") {
          if (target == "base") {
            sg.text = "place " + object + " block at the base position";
            sg.elements = {block, ee_spec()};
          } else {
            sg.text = "place " + object + " block on " + target + " block";
            sg.elements = {block, spec(target, "top", ElementType::point(), "support top"),
              ee_spec()};
          }
        } else {
          throw unknown();
        }
        break;
      }
    case TaskName::SweepHalf:
      if (action == "sweep") {
        sg.text = "sweep the blocks into the target area";
      } else if (action == "retract") {
        sg.text = "stop sweeping";
        sg.terminal = true;
      } else {
        throw unknown();
      }
      for (const auto & b : t.objects) {
        sg.elements.push_back(spec(b, "body", ElementType::point(), "block position"));
      }
      sg.elements.push_back(ee_spec());
      break;
    case TaskName::SlotPen: {
        const auto pen = spec("pen", "body", ElementType::line(), "pen axis");
        const auto rim = spec("holder", "rim", ElementType::point(), "holder opening");
        if (action == "pick") {
          sg.text = "pick the pen";
          sg.elements = {pen, ee_spec()};
        } else if (action == "transfer") {
          sg.text = "hold the pen upright above the holder";
          sg.elements = {pen, rim, ee_spec()};
        } else if (action == "relevel") {
          sg.text = "turn the pen upright";
          sg.elements = {pen, rim, ee_spec()};
        } else if (action == "insert") {
          sg.text = "insert the pen into the holder";
          sg.elements = {pen, rim, ee_spec()};
        } else {
          throw unknown();
        }
        break;
      }
    case TaskName::StowBook: {
        const auto spine = spec("book", "spine", ElementType::line(), "book spine");
        const auto book = spec("book", "body", ElementType::point(), "book position");
        sg.elements = {spine, book, ee_spec()};
        if (action == "pick") {
          sg.text = "pick the book";
        } else if (action == "orient") {
          sg.text = "turn the book so its spine is vertical";
        } else if (action == "relevel") {
          sg.text = "re-orient the book upright";
        } else if (action == "transfer") {
          sg.text = "move the book above the shelf";
        } else if (action == "place") {
          sg.text = "place the book upright on the shelf";
        } else {
          throw unknown();
        }
        break;
      }
    case TaskName::PourTea: {
        const auto lid = spec("teapot", "lid", ElementType::surface(), "teapot lid");
        const auto cup = spec("cup", "rim", ElementType::point(), "cup opening");
        if (action == "pick") {
          sg.text = "pick the teapot";
          sg.elements = {lid, ee_spec()};
        } else if (action == "transfer") {
          sg.text = "carry the teapot level to the cup";
          sg.elements = {lid, cup, ee_spec()};
        } else if (action == "pour") {
          sg.text = "pour tea into the cup";
          sg.elements = {lid, cup, ee_spec()};
        } else if (action == "restore") {
          sg.text = "return the teapot to level";
          sg.elements = {lid, ee_spec()};
        } else if (action == "relevel") {
          sg.text = "re-level teapot";
          sg.elements = {lid, ee_spec()};
        } else {
          throw unknown();
        }
        break;
      }
  }
  return sg;
}

std::vector<Subgoal> nominal_sequence(const TaskTemplate & t)
{
  std::vector<std::array<std::string, 3>> steps;
  switch (t.name) {
    case TaskName::StackInOrder:
      steps = {{"pick", "red", ""}, {"place", "red", "base"}, {"pick", "green", ""},
        {"place", "green", "red"}, {"pick", "blue", ""}, {"place", "blue", "green"}};
      break;
    case TaskName::SweepHalf:
      steps = {{"sweep", "blocks", "region"}};
      break;
    case TaskName::SlotPen:
      steps = {{"pick", "pen", ""}, {"transfer", "pen", "holder"}, {"insert", "pen", "holder"}};
      break;
    case TaskName::StowBook:
      steps = {{"pick", "book", ""}, {"orient", "book", ""}, {"transfer", "book", "shelf"},
        {"place", "book", "shelf"}};
      break;
    case TaskName::PourTea:
      steps = {{"pick", "teapot", ""}, {"transfer", "teapot", "cup"}, {"pour", "teapot", "cup"},
        {"restore", "teapot", ""}};
      break;
  }
  std::vector<Subgoal> out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    auto sg = make_subgoal(t, steps[i][0], steps[i][1], steps[i][2]);
    sg.nominal_index = static_cast<int>(i);
    out.push_back(std::move(sg));
  }
  return out;
}

EmittedConstraints emit_constraints(
  const Subgoal & sg, const TaskTemplate & t, const lang::ThresholdKB & kb, double relax)
{
  if (!(relax > 0.0)) {
    throw std::invalid_argument("relax must be positive");
  }
  const ProgramBuilder P(t, kb, relax);
  EmittedConstraints out;
  switch (t.name) {
    case TaskName::StackInOrder: stack_programs(sg, t, P, out); break;
    case TaskName::SweepHalf: sweep_programs(sg, t, P, out); break;
    case TaskName::SlotPen: slot_programs(sg, t, P, out); break;
    case TaskName::StowBook: stow_programs(sg, t, P, out); break;
    case TaskName::PourTea: pour_programs(sg, t, P, out); break;
  }
  return out;
}

std::vector<std::pair<std::string, lang::Mode>> emitted_kinds(const TaskTemplate & t)
{
  std::vector<Subgoal> all = nominal_sequence(t);
  // recovery-only subgoals
  switch (t.name) {
    case TaskName::SweepHalf: all.push_back(make_subgoal(t, "retract", "blocks", "")); break;
    case TaskName::SlotPen: all.push_back(make_subgoal(t, "relevel", "pen", "")); break;
    case TaskName::StowBook: all.push_back(make_subgoal(t, "relevel", "book", "")); break;
    case TaskName::PourTea: all.push_back(make_subgoal(t, "relevel", "teapot", "")); break;
    default: break;
  }
  std::vector<std::pair<std::string, lang::Mode>> kinds;
  for (const auto & sg : all) {
    const auto e = emit_constraints(sg, t, lang::default_kb());
    for (const auto * list : {&e.during, &e.completion}) {
      for (const auto & src : *list) {
        const auto p = lang::parse(src);
        const std::pair<std::string, lang::Mode> k{p.name, p.mode};
        if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) {
          kinds.push_back(k);
        }
      }
    }
  }
  return kinds;
}

}  // namespace cam::task
