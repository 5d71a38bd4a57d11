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
#include <random>

#include "cam/monitor.hpp"

using namespace cam;
using namespace cam::mon;
using elem::ConstraintElement;
using elem::ElementSet;
using elem::ElementType;

namespace
{

constexpr double kDeg = std::numbers::pi / 180.0;

PointList square(double tilt, const Vec3 & c = Vec3(0, 0, 0.2))
{
  const Eigen::AngleAxisd r(tilt, Vec3::UnitX());
  PointList pts;
  for (auto [x, y] : {std::pair{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}) {
    pts.push_back(c + r * Vec3(0.05 * x, 0.05 * y, 0));
  }
  return pts;
}

ElementSet lid_and_block()
{
  ElementSet s;
  ConstraintElement lid;
  lid.type = ElementType::surface();
  lid.points = square(0.0);
  lid.connections = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  s.add(lid);
  ConstraintElement block;
  block.type = ElementType::point();
  block.points = {Vec3(0.1, 0, 0.02)};
  s.add(block);
  ConstraintElement target;
  target.type = ElementType::point();
  target.points = {Vec3(0.1, 0, 0.02)};
  s.add(target);
  return s;
}

lang::MonitorProgram level(int id)
{
  auto p = lang::parse(
    "constraint \"level\" mode during tol amax = 15 deg "
    "{ angle(normal(e(0)), axis_z) <= amax } fail \"teapot tilted {angle}\"");
  p.id = id;
  return p;
}

lang::MonitorProgram on_target(int id)
{
  auto p = lang::parse(
    "constraint \"on_target\" mode on_completion tol t = 1.5 cm "
    "{ dist(pos(e(1), 0), pos(e(2), 0)) <= t } fail \"block not on target ({dist} m)\"");
  p.id = id;
  return p;
}

TrackerConfig exact()
{
  TrackerConfig c;
  c.sigma = 0.0;
  c.dropout = 0.0;
  return c;
}

}  // namespace

TEST_CASE("tracker: noiseless identity") {
  const auto s = lid_and_block();
  Tracker tr(exact());
  tr.start(s, 0);
  for (int t = 1; t < 50; ++t) {
    std::map<int, PointList> truth;
    for (const auto & e : s.elements) {
      PointList pts = e.points;
      for (auto & p : pts) {
        p.x() += 0.001 * t;
      }
      truth[e.id] = pts;
    }
    tr.step(truth, t);
    for (const auto & [id, pts] : truth) {
      CHECK(tr.tracks().points(id, 0) == pts);
    }
  }
}

TEST_CASE("tracker: total dropout holds the first value") {
  const auto s = lid_and_block();
  TrackerConfig c;
  c.dropout = 1.0;
  Tracker tr(c);
  tr.start(s, 0);
  for (int t = 1; t < 30; ++t) {
    std::map<int, PointList> truth;
    for (const auto & e : s.elements) {
      PointList pts = e.points;
      for (auto & p : pts) {
        p += Vec3(0.01 * t, 0, 0);
      }
      truth[e.id] = pts;
    }
    tr.step(truth, t);
  }
  for (const auto & e : s.elements) {
    const auto & track = tr.tracks().at(e.id);
    CHECK(track.latest().points == e.points);
    for (auto v : track.latest().valid) {
      CHECK(v == 0);
    }
  }
}

TEST_CASE("tracker: noise statistics") {
  ElementSet s;
  ConstraintElement e;
  e.type = ElementType::point();
  e.points = {Vec3(0.1, 0.2, 0.3)};
  s.add(e);
  TrackerConfig c;
  c.seed = 99;
  Tracker tr(c);
  tr.start(s, 0);
  double sq = 0.0;
  Vec3 bias = Vec3::Zero();
  double norm_sum = 0.0;
  int noisy = 0;
  const int n = 10000;
  for (int t = 1; t <= n; ++t) {
    tr.step({{0, e.points}}, t);
    const auto & entry = tr.tracks().at(0).latest();
    const Vec3 err = entry.points[0] - e.points[0];
    if (t <= 1000) {
      sq += err.squaredNorm() / 3.0;
    }
    bias += err;
    if (entry.valid[0] && t % c.resync_interval != 0) {
      norm_sum += err.norm();
      ++noisy;
    }
  }
  const double rms_axis = std::sqrt(sq / 1000.0);
  CHECK(rms_axis >= 0.0015);
  CHECK(rms_axis <= 0.0025);

  // E|N(0, s^2 I3)| = s * 2 sqrt(2 / pi)
  const double expected_norm = c.sigma * 2.0 * std::sqrt(2.0 / std::numbers::pi);
  CHECK(expected_norm == doctest::Approx(1.596 * c.sigma).epsilon(1e-3));
  CHECK(norm_sum / noisy == doctest::Approx(expected_norm).epsilon(0.03));

  bias /= n;
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(bias[i]) < 3.0 * c.sigma / std::sqrt(double(n)));
  }
}

TEST_CASE("tracker: errors and ring buffer") {
  const auto s = lid_and_block();
  Tracker tr(exact());
  tr.start(s, 0);
  CHECK_THROWS_AS(tr.step({{0, s.at(0).points}, {1, s.at(1).points}, {2, s.at(2).points}, {7, {}}}, 1), TrackError);
  CHECK_THROWS_AS(tr.step({{0, s.at(0).points}}, 1), TrackError);

  ElementTrack t(0, 4);
  for (int i = 0; i < 10; ++i) {
    t.push({i, {Vec3(i, 0, 0)}, {}});
  }
  CHECK(t.size() == 4);
  CHECK(t.latest().tick == 9);
  CHECK(t.at_lag(2).tick == 7);
  CHECK(t.at_lag(100).tick == 6);
  CHECK_THROWS_AS(t.push({9, {Vec3(0, 0, 0)}, {}}), TrackError);
  CHECK_THROWS_AS(t.push({10, {Vec3(0, 0, 0), Vec3(1, 0, 0)}, {}}), TrackError);

  TrackerConfig bad;
  bad.sigma = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS((DebouncePolicy{0, 5}.validate()), ConfigError);
}

TEST_CASE("monitor_tick: debounce") {
  const auto s = lid_and_block();
  Monitor m;
  m.load({level(0)}, s, 256);
  lang::FrameHistory h;

  SUBCASE("all satisfied") {
    for (int t = 0; t < 20; ++t) {
      h.push(0, square(0.05));
      CHECK(m.monitor_tick(h, t).outcome == Outcome::Ok);
    }
  }
  SUBCASE("tilt ramp fires exactly K-1 ticks after the first violating tick") {
    // tilt rises 1 degree per tick; the first tick past 15 degrees is t = 16
    int first_false = -1;
    int fired = -1;
    for (int t = 0; t < 40; ++t) {
      h.push(0, square(t * kDeg));
      if (first_false < 0 && t * kDeg > 15 * kDeg + 1e-12) {
        first_false = t;
      }
      const auto v = m.monitor_tick(h, t);
      if (v.outcome == Outcome::Violation) {
        CHECK(fired < 0);
        fired = t;
        CHECK(v.reason.rfind("teapot tilted", 0) == 0);
      }
    }
    CHECK(first_false == 16);
    CHECK(fired == first_false + m.policy().k - 1);
  }
  SUBCASE("single-tick spike") {
    for (int t = 0; t < 20; ++t) {
      h.push(0, square(t == 7 ? 40 * kDeg : 0.0));
      CHECK(m.monitor_tick(h, t).outcome == Outcome::Ok);
    }
  }
  SUBCASE("persistent violation emits once until acknowledged") {
    int count = 0;
    for (int t = 0; t < 100; ++t) {
      h.push(0, square(30 * kDeg));
      count += m.monitor_tick(h, t).outcome == Outcome::Violation;
    }
    CHECK(count == 1);
    m.acknowledge();
    for (int t = 100; t < 103; ++t) {
      h.push(0, square(30 * kDeg));
      count += m.monitor_tick(h, t).outcome == Outcome::Violation;
    }
    CHECK(count == 2);
  }
}

TEST_CASE("monitor_tick: first violation in id order wins") {
  const auto s = lid_and_block();
  Monitor m;
  auto a = level(5);
  auto b = level(2);
  b.reason_template = "second";
  m.load({a, b}, s, 256);
  lang::FrameHistory h;
  Verdict v;
  for (int t = 0; t < 3; ++t) {
    h.push(0, square(30 * kDeg));
    v = m.monitor_tick(h, t);
  }
  CHECK(v.outcome == Outcome::Violation);
  CHECK(v.constraint_id == 2);
  CHECK(v.reason == "second");
}

TEST_CASE("check_completion") {
  const auto s = lid_and_block();
  Monitor m;
  const int H = m.policy().h;

  SUBCASE("block on target") {
    m.load({on_target(0)}, s, 256);
    lang::FrameHistory h;
    h.push_all(s);
    for (int t = 1; t < H; ++t) {
      CHECK(m.check_completion(h, t).outcome == Outcome::NotYet);
    }
    CHECK(m.check_completion(h, H).outcome == Outcome::SubgoalComplete);
  }
  SUBCASE("bounced block") {
    m.load({on_target(0)}, s, 256);
    lang::FrameHistory h;
    h.push(0, s.at(0).points);
    h.push(1, {Vec3(0.1712, 0, 0.02)});
    h.push(2, s.at(2).points);
    Verdict v;
    int t = 0;
    do {
      v = m.check_completion(h, ++t);
    } while (v.outcome == Outcome::NotYet);
    CHECK(t == 3 * H);
    CHECK(v.outcome == Outcome::Violation);
    CHECK(v.reason == "block not on target (0.0712 m)");
  }
  SUBCASE("settling: completion at the end of the first full window") {
    for (int settle = 0; settle < 5 * H; ++settle) {
      m.load({on_target(0)}, s, 256);
      lang::FrameHistory h;
      h.push(0, s.at(0).points);
      h.push(2, s.at(2).points);
      std::vector<bool> sat;
      Verdict v;
      int t = 0;
      do {
        ++t;
        const bool ok = t >= settle;
        sat.push_back(ok);
        h.push(1, {ok ? s.at(1).points[0] : Vec3(0.3, 0, 0.02)});
        v = m.check_completion(h, t);
      } while (v.outcome == Outcome::NotYet);
      // window scan oracle: complete at the end of the first all-true H window,
      // violation at the first false tick at or after the 3H timeout
      int expected = -1;
      bool expect_violation = false;
      for (int i = 1; i <= static_cast<int>(sat.size()) && expected < 0; ++i) {
        if (i >= H && std::all_of(sat.begin() + i - H, sat.begin() + i, [](bool b) {return b;})) {
          expected = i;
        } else if (i >= 3 * H && !sat[static_cast<std::size_t>(i - 1)]) {
          expected = i;
          expect_violation = true;
        }
      }
      CHECK(t == expected);
      CHECK(v.outcome == (expect_violation ? Outcome::Violation : Outcome::SubgoalComplete));
    }
  }
}

TEST_CASE("next_verdict switches to completion when motion ends") {
  const auto s = lid_and_block();
  Monitor m;
  m.load({level(0), on_target(1)}, s, 256);
  lang::FrameHistory h;
  h.push_all(s);
  h.push(0, square(45 * kDeg));
  // the tilted lid no longer matters once motion is over
  for (int t = 0; t < m.policy().h - 1; ++t) {
    CHECK(m.next_verdict({t, true, &h}).outcome == Outcome::Ok);
  }
  CHECK(m.next_verdict({9, true, &h}).outcome == Outcome::SubgoalComplete);
}

TEST_CASE("load rejects programs reading past the history") {
  const auto s = lid_and_block();
  Monitor m;
  auto p = lang::parse("constraint \"d\" mode during { displacement(e(1), 300) < 1 cm } fail \"\"");
  CHECK_THROWS_AS(m.load({p}, s, 256), ConfigError);
  auto q = lang::parse("constraint \"d\" mode during { at(displacement(e(1), 100), 100) < 1 cm } fail \"\"");
  CHECK(q.max_lag() == 200);
  CHECK_NOTHROW(m.load({q}, s, 256));
}

TEST_CASE("latency_report") {
  const auto viol = [](int tick) {return Verdict{tick, Outcome::Violation, 0, lang::Mode::During, "x"};};
  const auto r = latency_report({{100, "tilt"}}, {viol(104)});
  REQUIRE(r.matched.size() == 1);
  CHECK(r.matched[0].latency == 4);
  CHECK(r.false_positives.empty());

  const auto empty = latency_report({}, {});
  CHECK(empty.matched.empty());
  CHECK(empty.false_positives.empty());

  const auto fp = latency_report({{100, "a"}}, {viol(50), viol(120), viol(130)});
  CHECK(fp.false_positives.size() == 2);
  CHECK(fp.matched.size() == 1);
  CHECK(fp.matched[0].latency == 20);
}

TEST_CASE("noiseless scripted tilt: latency within K plus resync") {
  const auto s = lid_and_block();
  for (int inject = 30; inject < 60; ++inject) {
    Monitor m;
    m.load({level(0)}, s, 256);
    TrackerConfig cfg;
    cfg.sigma = 0.0;
    cfg.dropout = 0.0;
    Tracker tr(cfg);
    tr.start(s, 0);
    std::vector<Verdict> verdicts;
    for (int t = 1; t < 120; ++t) {
      tr.step({{0, square(t >= inject ? 20 * kDeg : 0.0)}, {1, s.at(1).points}, {2, s.at(2).points}}, t);
      const auto v = m.monitor_tick(tr.tracks(), t);
      if (v.outcome == Outcome::Violation) {
        verdicts.push_back(v);
      }
    }
    const auto r = latency_report({{inject, "tilt"}}, verdicts);
    REQUIRE(r.matched.size() == 1);
    CHECK(r.matched[0].latency <= m.policy().k + cfg.resync_interval);
    CHECK(r.false_positives.empty());
  }
}

TEST_CASE("noise robustness: no false positives on a static held block") {
  ElementSet s;
  ConstraintElement block;
  block.type = ElementType::point_set(4);
  for (int i = 0; i < 4; ++i) {
    block.points.push_back(Vec3(0.01 * (i % 2), 0.01 * (i / 2), 0.3));
  }
  s.add(block);
  ConstraintElement ee;
  ee.type = ElementType::point();
  ee.points = {Vec3(0.005, 0.005, 0.3)};
  s.add(ee);
  auto held = lang::parse(
    "constraint \"held\" mode during tol t = 0.03 m "
    "{ dist(centroid(e(0)), pos(e(1), 0)) <= t } fail \"dropped {dist}\"");
  std::map<int, PointList> truth{{0, block.points}, {1, ee.points}};
  int violations = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TrackerConfig cfg;
    cfg.seed = seed;
    Tracker tr(cfg);
    tr.start(s, 0);
    Monitor m;
    m.load({held}, s, 256);
    for (int t = 1; t <= 10000; ++t) {
      tr.step(truth, t);
      violations += m.monitor_tick(tr.tracks(), t).outcome == Outcome::Violation;
    }
  }
  CHECK(violations == 0);
}
