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
#include <chrono>
#include <cmath>

#include "cam/harness.hpp"

namespace cam::harness
{

namespace
{

using Vec3 = Eigen::Vector3d;
using elem::PointList;

elem::ElementSet bench_scene(int n)
{
  elem::ElementSet s;
  for (int i = 0; i < n; ++i) {
    const Vec3 c(0.05 * (i % 5) - 0.1, 0.05 * (i / 5) - 0.1, 0.02 + 0.01 * (i % 3));
    elem::ConstraintElement e;
    switch (i % 3) {
      case 0:
        e.type = elem::ElementType::surface();
        for (auto [x, y] : {std::pair{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}) {
          e.points.push_back(c + Vec3(0.02 * x, 0.02 * y, 0));
        }
        e.connections = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
        break;
      case 1:
        e.type = elem::ElementType::line();
        e.points = {c, c + Vec3(0.06, 0.01, 0.03)};  // off horizontal, so the sign convention holds
        e.connections = {{0, 1}};
        break;
      default:
        e.type = elem::ElementType::point();
        e.points = {c};
    }
    s.add(std::move(e));
  }
  return s;
}

// Rotates through level checks, pairwise distances and history reads.
std::vector<lang::MonitorProgram> bench_programs(const elem::ElementSet & s, int n)
{
  std::vector<int> surfaces, lines;
  for (const auto & e : s.elements) {
    if (e.type.kind == elem::ElementKind::Surface) {
      surfaces.push_back(e.id);
    } else if (e.type.kind == elem::ElementKind::Line) {
      lines.push_back(e.id);
    }
  }
  if (surfaces.empty() || lines.empty()) {
    throw ConfigError("bench needs at least 2 elements");
  }
  std::vector<lang::MonitorProgram> out;
  const int m = static_cast<int>(s.size());
  for (int i = 0; i < n; ++i) {
    const std::string a = std::to_string(surfaces[static_cast<std::size_t>(i) % surfaces.size()]);
    const std::string l = std::to_string(lines[static_cast<std::size_t>(i) % lines.size()]);
    const std::string b = std::to_string((i * 5 + 1) % m);
    std::string body;
    switch (i % 3) {
      case 0:
        body = "angle(normal(e(" + a + ")), axis_z) <= lim";
        break;
      case 1:
        body = "dist(centroid(e(" + a + ")), centroid(e(" + b + "))) <= 1 m or "
          "dist(centroid(e(" + a + ")), at(centroid(e(" + a + ")), 5)) <= 0.05 m";
        break;
      default:
        body = "angle(dir(e(" + l + ")), at(dir(e(" + l + ")), 8)) <= lim";
    }
    auto p = lang::parse(
      "constraint \"bench" + std::to_string(i) + "\" mode during tol lim = 45 deg { " + body +
      " } fail \"bench over {lim}\"");
    p.id = i;
    if (const auto errs = lang::typecheck(p, s); !errs.empty()) {
      throw Error("bench program does not typecheck: " + errs.front().message);
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

BenchResult bench_monitor(const BenchConfig & cfg)
{
  if (cfg.elements < 2 || cfg.programs < 1 || cfg.ticks < 1) {
    throw ConfigError("bench needs at least 2 elements, 1 program and 1 tick");
  }
  const auto elems = bench_scene(cfg.elements);
  auto programs = bench_programs(elems, cfg.programs);
  mon::Monitor monitor;
  monitor.load(std::move(programs), elems, 256);
  mon::TrackerConfig tc;
  tc.seed = cfg.seed;
  mon::Tracker tracker(tc);
  tracker.start(elems, 0);
  std::map<int, elem::PointList> truth;
  for (const auto & e : elems.elements) {
    truth[e.id] = e.points;
  }

  BenchResult r;
  r.ticks = cfg.ticks;
  r.elements = cfg.elements;
  r.programs = cfg.programs;
  std::vector<double> us;
  us.reserve(static_cast<std::size_t>(cfg.ticks));
  using clock = std::chrono::steady_clock;
  for (int t = 1; t <= cfg.ticks; ++t) {
    tracker.step(truth, t);
    const auto t0 = clock::now();
    const auto v = monitor.monitor_tick(tracker.tracks(), t);
    const auto t1 = clock::now();
    us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    if (v.outcome == mon::Outcome::Violation) {
      ++r.violations;
      monitor.acknowledge();
    }
  }
  double sum = 0;
  for (double x : us) {
    sum += x;
  }
  r.mean_us = sum / static_cast<double>(us.size());
  std::sort(us.begin(), us.end());
  const auto rank = [&](double q) {
      return us[std::min(us.size() - 1, static_cast<std::size_t>(q * static_cast<double>(us.size())))];
    };
  r.median_us = rank(0.5);
  r.p99_us = rank(0.99);
  r.max_us = us.back();
  return r;
}

nlohmann::json BenchResult::to_json() const
{
  return {{"ticks", ticks}, {"elements", elements}, {"programs", programs},
    {"median_us", median_us}, {"p99_us", p99_us}, {"mean_us", mean_us}, {"max_us", max_us},
    {"violations", violations}};
}

}  // namespace cam::harness
