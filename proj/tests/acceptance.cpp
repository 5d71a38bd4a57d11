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


// Acceptance gate: experiment-level criteria A1..A6 and property suites P1..P7.
// Prints one PASS/FAIL line per criterion; exits non-zero when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "cam/harness.hpp"
#include "support/oracles.hpp"
#include "support/program_gen.hpp"

using namespace cam;
using harness::parse_spec;
using harness::run_experiment;
using sim::MonitorMode;

namespace
{

struct Outcome
{
  bool pass = false;
  std::string detail;
};

std::string fmt(const char * f, auto... args)
{
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Full-mode stack results under p = 0.3 are shared by A1 and A6.
const harness::ExperimentResult & stack_drop(double * secs = nullptr)
{
  static double elapsed = 0;
  static const harness::ExperimentResult r = [] {
      const auto t0 = std::chrono::steady_clock::now();
      auto res = run_experiment(parse_spec(
        "name = stack_drop\ntask = stack_in_order\nmodes = off, full\nepisodes = 200\n"
        "seed = 1000\ncell = p0.3 : drop_with_prob p=0.3\n"));
      elapsed = seconds_since(t0);
      return res;
    }();
  if (secs) {
    *secs = elapsed;
  }
  return r;
}

Outcome a1()
{
  double secs = 0;
  const auto & rep = stack_drop(&secs).report;
  const auto & off = rep.at("p0.3", MonitorMode::Off);
  const auto & full = rep.at("p0.3", MonitorMode::Full);
  const auto z = harness::two_proportion_z(full.successes, full.episodes, off.successes, off.episodes);
  const bool ok = off.success_rate <= 0.45 && full.success_rate >= 0.85 && z.p_one_sided < 1e-3 &&
    secs <= 120.0;
  return {ok, fmt("off %.1f%% (<= 45), full %.1f%% (>= 85), z %.2f p %.2g (< 0.001), %.1f s (<= 120)",
    100 * off.success_rate, 100 * full.success_rate, z.z, z.p_one_sided, secs)};
}

Outcome a2()
{
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_experiment(parse_spec(
    "name = stack_noise\ntask = stack_in_order\nmodes = off, full\nepisodes = 200\n"
    "seed = 1000\ncell = q3cm : placement_noise q=3cm\n"));
  const double secs = seconds_since(t0);
  const auto & off = r.report.at("q3cm", MonitorMode::Off);
  const auto & full = r.report.at("q3cm", MonitorMode::Full);
  const double gap = 100 * (full.success_rate - off.success_rate);
  return {gap >= 30.0 && secs <= 120.0,
    fmt("off %.1f%%, full %.1f%%, gap %.1f pp (>= 30), %.1f s (<= 120)", 100 * off.success_rate,
    100 * full.success_rate, gap, secs)};
}

Outcome a3()
{
  const auto r = run_experiment(parse_spec(
    "name = sweep_half\ntask = sweep_half\nmodes = off, full\nepisodes = 100\nseed = 1000\n"
    "tracker.sigma = 0\ntracker.dropout = 0\n"));
  int in_band = 0, monitored = 0;
  for (const auto & run : r.runs) {
    if (run.mode != MonitorMode::Full) {
      continue;
    }
    ++monitored;
    for (const auto & e : run.events) {
      if (e.kind == "episode_end") {
        const int n = e.payload.at("region_count");
        in_band += n >= 16 && n <= 24;
      }
    }
  }
  const double frac = static_cast<double>(in_band) / monitored;
  const auto & off = r.report.at("clean", MonitorMode::Off);
  return {frac >= 0.95 && off.successes == 0,
    fmt("count in [16, 24] in %.1f%% of monitored episodes (>= 95), off success %.1f%% (= 0)",
    100 * frac, 100 * off.success_rate)};
}

Outcome a4()
{
  const auto spec = parse_spec(
    "name = pour_tilt\ntask = pour_tea\nmodes = full\nepisodes = 50\nseed = 1000\n"
    "tracker.sigma = 2mm\ndebounce.k = 3\ncell = clean :\n"
    "cell = tilt : tilt_held axis=y angle=20deg after=script:transfer+10\n");
  const auto r = run_experiment(spec);
  const int bound = spec.debounce.k + spec.tracker.resync_interval;
  int detected = 0, tilted = 0, worst = 0, false_pos = 0;
  for (const auto & run : r.runs) {
    int inject = -1;
    int latency = -1;
    for (const auto & e : run.events) {
      if (e.kind == "inject" && inject < 0) {
        inject = e.tick;
      }
      if (e.kind == "verdict" && e.payload.at("outcome") == "violation") {
        if (run.cell == "clean") {
          ++false_pos;
        } else if (inject >= 0 && latency < 0 && e.payload.at("mode") == "during") {
          latency = e.tick - inject;
        }
      }
    }
    if (run.cell == "tilt") {
      ++tilted;
      if (latency >= 0 && latency <= bound) {
        ++detected;
      }
      worst = std::max(worst, latency);
    }
  }
  return {detected == tilted && false_pos == 0,
    fmt("detected within %d ticks in %d/%d, worst latency %d, clean false positives %d",
    bound, detected, tilted, worst, false_pos)};
}

Outcome a5()
{
  const auto r = run_experiment(parse_spec(
    "name = slot_ablation\ntask = slot_pen\nmodes = reactive_only, proactive_only, full\n"
    "episodes = 100\nseed = 1000\n"
    "cell = all : move_object object=pen distance=3cm..6cm axis=random after=script:pick+5..20;"
    " force_release after=script:transfer+5..20;"
    " move_object object=holder distance=3cm..6cm axis=random after=script:insert+2..8\n"));
  const double full = r.report.at("all", MonitorMode::Full).success_rate;
  const double reactive = r.report.at("all", MonitorMode::ReactiveOnly).success_rate;
  const double proactive = r.report.at("all", MonitorMode::ProactiveOnly).success_rate;
  return {full >= reactive && full >= proactive,
    fmt("full %.1f%%, reactive_only %.1f%%, proactive_only %.1f%%", 100 * full, 100 * reactive,
    100 * proactive)};
}

Outcome a6()
{
  const auto r = run_experiment(parse_spec(
    "name = stack_drop_reactive\ntask = stack_in_order\nmodes = reactive_only\nepisodes = 200\n"
    "seed = 1000\ncell = p0.3 : drop_with_prob p=0.3\n"));
  const auto & reactive = r.report.at("p0.3", MonitorMode::ReactiveOnly);
  const auto & full = stack_drop().report.at("p0.3", MonitorMode::Full);
  const double cut = 1.0 - full.mean_ticks_success / reactive.mean_ticks_success;
  return {cut >= 0.10, fmt("successful mean ticks full %.1f vs reactive_only %.1f, %.1f%% lower (>= 10)",
    full.mean_ticks_success, reactive.mean_ticks_success, 100 * cut)};
}

// ---- property suites ----

Outcome p1()
{
  std::mt19937_64 rng(501);
  std::uniform_int_distribution<int> count(1, 64);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = count(rng);
    geom::PointList pts;
    for (int i = 0; i < n; ++i) {
      // a few tight blobs on top of uniform background
      if (i % 3 == 0) {
        pts.emplace_back(u(rng), u(rng), u(rng));
      } else {
        const double c = 0.25 * (i % 4);
        pts.emplace_back(c + 0.05 * u(rng), c + 0.05 * u(rng), 0.05 * u(rng));
      }
    }
    const double eps = 0.02 + 0.25 * u(rng);
    const std::size_t min_pts = 1 + rng() % 6;
    const auto got = geom::dbscan(pts, eps, min_pts);
    bad += !testing::same_partition(got.labels, testing::dbscan_oracle(pts, eps, min_pts));
  }
  return {bad == 0, fmt("%d/500 instances differ from the connectivity oracle", bad)};
}

Outcome p2()
{
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> size(0.03, 0.3);
  std::uniform_real_distribution<double> az(0, 2 * std::numbers::pi);
  double worst = 0;
  long points = 0;
  for (int scene_no = 0; scene_no < 100; ++scene_no) {
    geom::CameraModel cam;
    const double a = az(rng);
    cam.camera_to_world = geom::look_at(
      geom::Vec3(1.5 * std::cos(a), 1.5 * std::sin(a), 0.4 + size(rng)), geom::Vec3::Zero(),
      geom::Vec3::UnitZ());
    std::vector<geom::Primitive> scene;
    const int k_count = 1 + scene_no % 4;
    for (int k = 0; k < k_count; ++k) {
      const auto pose = testing::random_pose(rng, 0.3);
      geom::Shape shape = (rng() % 2) ? geom::Shape(geom::Box{geom::Vec3(size(rng), size(rng), size(rng))}) :
        geom::Shape(geom::Cylinder{size(rng), 2.0 * size(rng)});
      scene.push_back({pose, shape, k, k});
    }
    const auto view = geom::raycast_depth(scene, cam);
    for (int k = 0; k < k_count; ++k) {
      MaskImage mask(cam.width, cam.height, 0);
      for (std::size_t i = 0; i < mask.data.size(); ++i) {
        mask.data[i] = view.instance_ids.data[i] == k;
      }
      for (const auto & p : geom::unproject(view.depth, mask, cam)) {
        const auto local = scene[static_cast<std::size_t>(k)].pose.inverse().apply(p);
        worst = std::max(worst, testing::surface_residual(scene[static_cast<std::size_t>(k)].shape, local));
        ++points;
      }
    }
  }
  return {worst < 1e-5 && points > 0,
    fmt("worst residual %.3g m over %ld points in 100 scenes (< 1e-5)", worst, points)};
}

// z >= 0, ties toward +x then +y
geom::Vec3 canonical(geom::Vec3 v)
{
  const bool flip = v.z() < 0 || (v.z() == 0 && (v.x() < 0 || (v.x() == 0 && v.y() < 0)));
  return flip ? geom::Vec3(-v) : v;
}

Outcome p3()
{
  std::mt19937_64 rng(303);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double acc = 0, inv = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const geom::Vec3 n = canonical(geom::Vec3(g(rng), g(rng), g(rng)).normalized());
    const geom::Vec3 a = n.unitOrthogonal();
    const geom::Vec3 b = n.cross(a);
    const geom::Vec3 c(u(rng), u(rng), u(rng));
    geom::PointList plane, line;
    for (int i = 0; i < 40; ++i) {
      plane.push_back(c + u(rng) * a + u(rng) * b);
      line.push_back(c + 2 * u(rng) * n);
    }
    acc = std::max(acc, geom::angle_between<double>(geom::fit_plane(plane).axis, n));
    acc = std::max(acc, geom::angle_between<double>(geom::fit_line(line).axis, n));

    const auto pose = testing::random_pose(rng, 0.5);
    geom::PointList rp, rl;
    for (const auto & p : plane) {
      rp.push_back(pose.apply(p));
    }
    for (const auto & p : line) {
      rl.push_back(pose.apply(p));
    }
    for (auto [x, y] : {std::pair{geom::fit_plane(rp).axis, pose.rotate(geom::fit_plane(plane).axis)},
        {geom::fit_line(rl).axis, pose.rotate(geom::fit_line(line).axis)}})
    {
      const double t = geom::angle_between<double>(x, y);
      inv = std::max(inv, std::min(t, std::numbers::pi - t));
    }
  }
  return {acc < 1e-6 && inv < 1e-9,
    fmt("worst recovery error %.3g rad (< 1e-6), worst rotation drift %.3g rad (< 1e-9)", acc, inv)};
}

elem::ElementSet eval_scene(int lag_shift)
{
  elem::ElementSet s;
  for (int i = 0; i < 8; ++i) {
    const geom::Vec3 c(0.05 * i, 0.02 * (i % 3) + 0.001 * lag_shift, 0.1 + 0.01 * i);
    elem::ConstraintElement e;
    if (i % 3 == 0) {
      e.type = elem::ElementType::surface();
      e.points = {c, c + geom::Vec3(0.04, 0, 0.002 * i), c + geom::Vec3(0.04, 0.04, 0),
        c + geom::Vec3(0, 0.04, 0.001)};
      e.connections = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    } else if (i % 3 == 1) {
      e.type = elem::ElementType::line();
      e.points = {c, c + geom::Vec3(0.05, 0.01, 0.02)};
      e.connections = {{0, 1}};
    } else {
      e.type = elem::ElementType::point();
      e.points = {c};
    }
    s.add(std::move(e));
  }
  return s;
}

Outcome p4()
{
  testing::ProgramGenerator gen(404);
  const auto elems = eval_scene(0);
  lang::FrameHistory history;
  for (int lag = 12; lag >= 0; --lag) {
    history.push_all(eval_scene(lag));
  }
  const lang::EvalContext ctx{0, &elems, &history};
  int round_trip_bad = 0, eval_bad = 0, typed = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = gen.program();
    const auto text = lang::print(p);
    const auto q = lang::parse(text);
    round_trip_bad += !lang::structurally_equal(p, q) || lang::print(q) != text;
    typed += lang::typecheck(p, elems).empty();
    const auto r1 = lang::evaluate(p, ctx);
    const auto r2 = lang::evaluate(p, ctx);
    const auto r3 = lang::evaluate(q, ctx);
    eval_bad += !(r1 == r2) || !(r1 == r3);
  }
  // well-typed programs reach the geometry, so evaluation is compared on real values too
  testing::TypedSourceGenerator typed_gen(405, {0, 3, 6}, {1, 4, 7}, 8);
  int typed_bad = 0, ill_typed = 0, satisfied = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = lang::parse(typed_gen.program());
    ill_typed += !lang::typecheck(p, elems).empty();
    const auto text = lang::print(p);
    const auto q = lang::parse(text);
    round_trip_bad += !lang::structurally_equal(p, q) || lang::print(q) != text;
    const auto r1 = lang::evaluate(p, ctx);
    typed_bad += !(r1 == lang::evaluate(p, ctx)) || !(r1 == lang::evaluate(q, ctx));
    satisfied += r1.satisfied;
  }
  return {round_trip_bad == 0 && eval_bad == 0 && typed_bad == 0 && ill_typed == 0,
    fmt("round trip mismatches %d/2000; evaluation mismatches %d/1000 random (%d typed), "
    "%d/1000 typed (%d satisfied, %d failed typecheck)",
    round_trip_bad, eval_bad, typed, typed_bad, satisfied, ill_typed)};
}

// Digest of the first-subgoal element sets of every template over a few seeds.
std::string element_digest()
{
  std::uint64_t h = harness::fnv1a("");
  for (auto t : {task::TaskName::StackInOrder, task::TaskName::SweepHalf, task::TaskName::SlotPen,
      task::TaskName::StowBook, task::TaskName::PourTea})
  {
    for (std::uint64_t seed : {0, 1, 17}) {
      const auto set = sim::first_subgoal_elements(task::default_template(t), seed);
      for (const auto & e : set.elements) {
        std::string bytes = std::to_string(e.id) + e.entity + "/" + e.part + "/" + e.type.to_string();
        for (const auto & p : e.points) {
          char raw[3 * sizeof(double)];
          std::memcpy(raw, p.data(), sizeof(raw));
          bytes.append(raw, sizeof(raw));
        }
        for (auto [a, b] : e.connections) {
          bytes += "," + std::to_string(a) + "-" + std::to_string(b);
        }
        h = harness::fnv1a(bytes, h);
      }
    }
  }
  return fmt("%016llx", static_cast<unsigned long long>(h));
}

std::string self_path;

Outcome p5()
{
  const std::string here = element_digest();
  const std::string again = element_digest();
  std::string child;
  if (FILE * f = ::popen((self_path + " --element-digest").c_str(), "r")) {
    char buf[64] = {};
    if (std::fgets(buf, sizeof(buf), f)) {
      child = buf;
      while (!child.empty() && (child.back() == '\n' || child.back() == '\r')) {
        child.pop_back();
      }
    }
    ::pclose(f);
  }
  return {here == again && here == child,
    fmt("digest %s in-process, %s in a second process", here.c_str(),
    child.empty() ? "(none)" : child.c_str())};
}

Outcome p6()
{
  const auto r = harness::bench_monitor({16, 8, 10000, 0});
  return {r.median_us < 1000.0, fmt("median %.1f us (< 1000), p99 %.1f us, 16 elements, 8 programs",
    r.median_us, r.p99_us)};
}

Outcome p7()
{
  int runs = 0, bad = 0;
  std::string first;
  for (auto t : {task::TaskName::StackInOrder, task::TaskName::SweepHalf, task::TaskName::SlotPen,
      task::TaskName::StowBook, task::TaskName::PourTea})
  {
    for (int seed = 0; seed < 20; ++seed) {
      sim::EpisodeConfig c;
      c.task = task::default_template(t);
      c.seed = static_cast<std::uint64_t>(seed);
      c.budget_ticks = sim::default_budget(t);
      c.record_elements = false;
      const auto r = sim::run_episode(c);
      int subgoals = 0;
      for (const auto & e : r.events) {
        subgoals += e.kind == "subgoal";
      }
      ++runs;
      if (r.validation_failures != 0 || r.aborted || subgoals == 0) {
        ++bad;
        if (first.empty()) {
          first = fmt(" (first: %s seed %d: %s)", task::task_name(t), seed, r.end_reason.c_str());
        }
      }
    }
  }
  return {bad == 0, fmt("%d/%d clean episodes had a program rejected%s", bad, runs, first.c_str())};
}

}  // namespace

int main(int argc, char ** argv)
{
  self_path = argv[0];
  if (argc > 1 && std::strcmp(argv[1], "--element-digest") == 0) {
    std::printf("%s\n", element_digest().c_str());
    return 0;
  }
  const std::pair<const char *, std::function<Outcome()>> criteria[] = {
    {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5}, {"A6", a6},
    {"P1", p1}, {"P2", p2}, {"P3", p3}, {"P4", p4}, {"P5", p5}, {"P6", p6}, {"P7", p7}};
  int failed = 0;
  for (const auto & [name, fn] : criteria) {
    if (argc > 1 && std::strstr(argv[1], name) == nullptr) {
      continue;
    }
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception & e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s  %s\n", name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
