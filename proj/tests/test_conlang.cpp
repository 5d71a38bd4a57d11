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
#include <fstream>
#include <numbers>
#include <sstream>

#include "cam/conlang.hpp"
#include "support/program_gen.hpp"

using namespace cam;
using namespace cam::lang;
using elem::ConstraintElement;
using elem::ElementSet;
using elem::ElementType;

namespace
{

constexpr double kDeg = std::numbers::pi / 180.0;

ConstraintElement surface_at(const Eigen::Matrix3d & rot, const Vec3 & c, double half = 0.05)
{
  ConstraintElement e;
  e.type = ElementType::surface();
  for (auto [x, y] : {std::pair{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}) {
    e.points.push_back(c + rot * Vec3(x * half, y * half, 0.0));
  }
  e.connections = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  return e;
}

ConstraintElement point_at(const Vec3 & p)
{
  ConstraintElement e;
  e.type = ElementType::point();
  e.points = {p};
  return e;
}

ConstraintElement line_between(const Vec3 & a, const Vec3 & b)
{
  ConstraintElement e;
  e.type = ElementType::line();
  e.points = {a, b};
  e.connections = {{0, 1}};
  return e;
}

/// e(0) point, e(1) point, e(2) surface.
ElementSet three_elements(double tilt = 0.0)
{
  ElementSet s;
  s.add(point_at(Vec3(0, 0, 0.1)));
  s.add(point_at(Vec3(0.1, 0, 0.1)));
  s.add(surface_at(Eigen::AngleAxisd(tilt, Vec3::UnitX()).toRotationMatrix(), Vec3(0, 0, 0.2)));
  return s;
}

const char * kLevel =
  "constraint \"level\" mode during tol amax = 15 deg "
  "{ angle(normal(e(2)), axis_z) <= amax } fail \"pan tilted {angle}\"";

EvalResult run(const MonitorProgram & p, const ElementSet & s)
{
  FrameHistory h;
  h.push_all(s);
  return evaluate(p, EvalContext{0, &s, &h});
}

}  // namespace

TEST_CASE("parse: level program") {
  const auto p = parse(kLevel);
  CHECK(p.mode == Mode::During);
  CHECK(p.name == "level");
  REQUIRE(p.tolerances.size() == 1);
  CHECK(p.tolerances[0].unit == Unit::Radians);
  CHECK(p.tolerances[0].value == doctest::Approx(0.2618).epsilon(1e-4));
  CHECK(p.reason_template == "pan tilted {angle}");
}

TEST_CASE("parse: errors") {
  CHECK_THROWS_AS(parse("{ 1 < }"), SyntaxError);
  try {
    parse_expr("dist(e(0),\n  1 <");
    FAIL("expected a syntax error");
  } catch (const SyntaxError & err) {
    CHECK(err.line == 2);
    CHECK(err.col == 6);
    CHECK_FALSE(err.expected.empty());
  }
  CHECK_THROWS_AS(
    parse("constraint \"x\" mode during tol a = 1 m tol a = 2 m { true } fail \"\""),
    DuplicateTolerance);
  CHECK_THROWS_AS(parse("constraint \"x\" mode during tol a = 1 { true } fail \"\""), SyntaxError);
  CHECK_THROWS_AS(parse("constraint \"x\" mode sometimes { true } fail \"\""), SyntaxError);
  CHECK_THROWS_AS(parse_expr("e(1.5)"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("\"open"), SyntaxError);
}

TEST_CASE("parse: units convert to SI") {
  const auto check_num = [](const char * src, double v, Unit u) {
      const auto e = parse_expr(src);
      const auto & n = std::get<ast::Number>(e->node);
      CHECK(n.value == doctest::Approx(v).epsilon(1e-15));
      CHECK(n.unit == u);
    };
  check_num("2 cm", 0.02, Unit::Meters);
  check_num("3 mm", 0.003, Unit::Meters);
  check_num("180 deg", std::numbers::pi, Unit::Radians);
  check_num("16 count", 16, Unit::Count);
  check_num("0.5", 0.5, Unit::None);
}

TEST_CASE("parse: precedence") {
  const auto e = parse_expr("not a < 1 + 2 * 3 and b or c");
  CHECK(print(*e) == "(((not (a < (1 + (2 * 3)))) and b) or c)");
  CHECK(print(*parse_expr("x within 1 cm of -y")) == "(x within 0.01 m of (-y))");
  CHECK(print(*parse_expr("if a then 1 else 2")) == "(if a then 1 else 2)");
}

TEST_CASE("print/parse round trip on generated programs") {
  testing::ProgramGenerator gen(2024);
  for (int i = 0; i < 100; ++i) {
    const auto p = gen.program();
    const auto text = print(p);
    const auto q = parse(text);
    CHECK_MESSAGE(structurally_equal(p, q), text);
    CHECK(print(q) == text);
  }
}

TEST_CASE("evaluate survives ill-typed programs") {
  const auto s = three_elements();
  const auto p = parse("constraint \"x\" mode during { dist(centroid(e(0))) < 1 } fail \"\"");
  const auto r = run(p, s);
  CHECK_FALSE(r.satisfied);
  CHECK(r.reason.value().find("wrong number of arguments") != std::string::npos);

  testing::ProgramGenerator gen(77);
  for (int i = 0; i < 300; ++i) {
    const auto q = gen.program();
    CHECK(run(q, s) == run(q, s));
  }
}

TEST_CASE("typecheck") {
  const auto s = three_elements();
  SUBCASE("normal of a point") {
    const auto p = parse("constraint \"n\" mode during { angle(normal(e(0)), axis_z) < 1 } fail \"\"");
    const auto errs = typecheck(p, s);
    REQUIRE(errs.size() == 1);
    CHECK(errs[0].message == "normal requires SURFACE");
  }
  SUBCASE("distance against a length") {
    const auto p = parse(
      "constraint \"d\" mode during tol t = 3 cm { dist(pos(e(0), 0), pos(e(0), 0)) <= t } "
      "fail \"{dist} {t}\"");
    CHECK(typecheck(p, s).empty());
  }
  SUBCASE("angle against a length") {
    const auto p = parse(
      "constraint \"a\" mode during tol t = 3 cm { angle(normal(e(2)), axis_z) <= t } fail \"\"");
    const auto errs = typecheck(p, s);
    REQUIRE(errs.size() == 1);
    CHECK(errs[0].message == "cannot compare rad with m");
  }
  SUBCASE("other failures") {
    const auto bad = [&](const char * body) {
        const auto p = parse(std::string("constraint \"x\" mode during tol t = 1 m { ") + body +
          " } fail \"\"");
        return typecheck(p, s).size();
      };
    CHECK(bad("dist(centroid(e(9)), centroid(e(0))) < t") == 1);
    CHECK(bad("dir(e(2)) == 1") == 1);
    CHECK(bad("rotation(e(0), 3) < 1") == 1);
    CHECK(bad("pos(e(0), 1) == 1") == 1);
    CHECK(bad("dist(centroid(e(0)))") == 1);
    CHECK(bad("dist(centroid(e(0)), centroid(e(1)))") == 1);
    CHECK(bad("u < 1") == 1);
    CHECK(bad("t * t < 1") == 1);
    CHECK(bad("dist(axis_z, centroid(e(0))) < t") == 1);
    CHECK(bad("count_within([e(0), e(1)], box((0,0,0), (1,1,1))) >= 2 count") == 0);
    CHECK(bad("above(centroid(e(0)), centroid(e(1)), 1 cm) and inside(pos(e(0), 0), box((0,0,0), (1,1,1)))") == 0);
    CHECK(bad("dist(centroid(e(0)), centroid(e(1)) + (0, 0, 0.04)) / t < 2") == 0);
    CHECK(bad("(if true then 1 m else 2 rad) < 1") == 1);
  }
  SUBCASE("unknown placeholder") {
    const auto p = parse("constraint \"x\" mode during { true } fail \"{dist}\"");
    REQUIRE(typecheck(p, s).size() == 1);
  }
}

TEST_CASE("evaluate: level surface") {
  const auto p = parse(kLevel);
  CHECK(run(p, three_elements()) == EvalResult{true, std::nullopt});
  const auto tilted = run(p, three_elements(20 * kDeg));
  CHECK_FALSE(tilted.satisfied);
  // 20 degrees in radians to four significant digits
  char expected[32];
  std::snprintf(expected, sizeof(expected), "pan tilted %.4g", 20.0 * std::numbers::pi / 180.0);
  CHECK(tilted.reason == std::string(expected));
  CHECK(tilted.reason == std::string("pan tilted 0.3491"));
}

TEST_CASE("evaluate: monotone in tilt around the tolerance") {
  const auto p = parse(kLevel);
  const double tol = 15 * kDeg;
  CHECK(run(p, three_elements(tol - 0.01)).satisfied);
  CHECK_FALSE(run(p, three_elements(tol + 0.01)).satisfied);
  bool was = true;
  for (int i = 0; i <= 90; ++i) {
    const bool now = run(p, three_elements(i * 0.5 * kDeg)).satisfied;
    CHECK((was || !now));
    was = now;
  }
}

TEST_CASE("evaluate: displacement and rotation over history") {
  ElementSet s;
  s.add(point_at(Vec3(0, 0, 0)));
  s.add(line_between(Vec3(-0.05, 0, 0.1), Vec3(0.05, 0, 0.1)));
  FrameHistory h;
  for (int t = 0; t <= 10; ++t) {
    h.push(0, {Vec3(0.002 * t, 0, 0)});
    // half turn about z, 18 degrees per tick
    const Eigen::AngleAxisd r(std::numbers::pi * t / 10.0, Vec3::UnitZ());
    h.push(1, {r * Vec3(-0.05, 0, 0) + Vec3(0, 0, 0.1), r * Vec3(0.05, 0, 0) + Vec3(0, 0, 0.1)});
  }
  const EvalContext ctx{10, &s, &h};
  auto disp = parse("constraint \"d\" mode during tol t = 1 cm { displacement(e(0), 10) <= t } "
      "fail \"moved {displacement}\"");
  const auto r1 = evaluate(disp, ctx);
  CHECK_FALSE(r1.satisfied);
  CHECK(r1.reason == std::string("moved 0.02"));

  auto rot = parse("constraint \"r\" mode during tol t = 179 deg { rotation(e(1), 10) <= t } "
      "fail \"turned {rotation}\"");
  const auto r2 = evaluate(rot, ctx);
  CHECK_FALSE(r2.satisfied);
  CHECK(r2.reason == std::string("turned 3.142"));

  // a lag past the recorded depth clamps to the oldest entry
  auto clamp = parse("constraint \"c\" mode during { displacement(e(0), 50) within 1e-12 m of 2 cm } fail \"\"");
  CHECK(evaluate(clamp, ctx).satisfied);
  auto nested = parse("constraint \"n\" mode during { at(dist(pos(e(0), 0), (0,0,0)), 4) within 1e-12 m of 1.2 cm } fail \"\"");
  CHECK(evaluate(nested, ctx).satisfied);
}

TEST_CASE("evaluate: runtime errors fail safe") {
  ElementSet s;
  ConstraintElement flat;
  flat.type = ElementType::surface();
  flat.points = {Vec3(0, 0, 0), Vec3(0.1, 0, 0), Vec3(0.2, 0, 0), Vec3(0.3, 0, 0)};
  s.elements.push_back(flat);
  const auto p = parse("constraint \"n\" mode during { angle(normal(e(0)), axis_z) < 1 } fail \"x\"");
  const auto r = run(p, s);
  CHECK_FALSE(r.satisfied);
  CHECK(r.reason->rfind("monitor internal error", 0) == 0);

  const auto div = parse("constraint \"z\" mode during { 1 / 0 < 1 } fail \"x\"");
  CHECK(run(div, s).reason->find("division by zero") != std::string::npos);
}

TEST_CASE("whitebox_validate") {
  const auto s = three_elements();
  FrameHistory h;
  h.push_all(s);
  const EvalContext ctx{0, &s, &h};

  SUBCASE("unknown element") {
    const auto p = parse("constraint \"x\" mode during { centroid(e(99)) == 1 } fail \"\"");
    const auto f = whitebox_validate(p, ctx);
    REQUIRE(f);
    CHECK(f->path == "e(99)");
  }
  SUBCASE("clamped history access") {
    const auto p = parse(
      "constraint \"x\" mode during tol t = 1 cm { displacement(e(0), 50) <= t } fail \"\"");
    CHECK_FALSE(whitebox_validate(p, ctx));
  }
  SUBCASE("during false at the first tick") {
    const auto p = parse(
      "constraint \"x\" mode during tol t = 1 cm { dist(centroid(e(0)), centroid(e(1))) <= t } "
      "fail \"{dist}\"");
    const auto f = whitebox_validate(p, ctx);
    REQUIRE(f);
    CHECK(f->error.find("0.1") != std::string::npos);
    auto completion = p;
    completion.mode = Mode::OnCompletion;
    CHECK_FALSE(whitebox_validate(completion, ctx));
  }
  SUBCASE("error on an untaken branch") {
    const auto p = parse(
      "constraint \"x\" mode during { if true then true else 1 / 0 < 2 } fail \"\"");
    CHECK(evaluate(p, ctx).satisfied);
    const auto f = whitebox_validate(p, ctx);
    REQUIRE(f);
    CHECK(f->path == "body/if.else");
    const auto q = parse("constraint \"x\" mode during { true or 1 / 0 < 2 } fail \"\"");
    REQUIRE(whitebox_validate(q, ctx));
    CHECK(whitebox_validate(q, ctx)->path == "body/or.rhs");
  }
}

TEST_CASE("evaluation is deterministic and scale consistent") {
  const char * src =
    "constraint \"m\" mode on_completion tol t = 1 cm "
    "{ dist(centroid(e(0)), centroid(e(1))) <= t and angle(normal(e(2)), axis_z) <= t / t } "
    "fail \"{dist} {angle}\"";
  const auto p = parse(src);
  ElementSet s = three_elements(0.3);
  const auto a = run(p, s);
  CHECK(run(p, s) == a);

  const auto dist_p = parse("constraint \"d\" mode during { dist(centroid(e(0)), centroid(e(2))) < 0 } fail \"{dist}\"");
  const auto ang_p = parse("constraint \"a\" mode during { angle(normal(e(2)), axis_y) < 0 } fail \"{angle}\"");
  const auto measure = [](const MonitorProgram & prog, const ElementSet & set) {
      return std::stod(run(prog, set).reason.value());
    };
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int i = 0; i < 20; ++i) {
    const double k = u(rng);
    ElementSet scaled = s;
    for (auto & e : scaled.elements) {
      for (auto & pt : e.points) {
        pt *= k;
      }
    }
    CHECK(measure(dist_p, scaled) == doctest::Approx(k * measure(dist_p, s)).epsilon(1e-3));
    // the reason string is rounded; compare the raw angle through a tight band instead
    const double ang = geom::angle_between<double>(geom::fit_plane(scaled.at(2).points).axis, Vec3::UnitY());
    const double ang0 = geom::angle_between<double>(geom::fit_plane(s.at(2).points).axis, Vec3::UnitY());
    CHECK(std::abs(ang - ang0) < 1e-9);
    CHECK(measure(ang_p, scaled) == measure(ang_p, s));
  }
}

TEST_CASE("threshold knowledge base") {
  const auto & kb = default_kb();
  const auto level = kb_lookup(kb, "pour_tea", "level_surface");
  REQUIRE(level);
  CHECK(level->value == doctest::Approx(15 * kDeg));
  CHECK(level->unit == Unit::Radians);
  CHECK(kb_lookup(kb, "unknown_task", "level_surface")->value == doctest::Approx(15 * kDeg));
  CHECK(kb_lookup(kb, "unknown_task", "verticality")->value == doctest::Approx(10 * kDeg));
  CHECK(kb_lookup(kb, "stack_in_order", "point_coincidence")->value == doctest::Approx(0.03));
  CHECK(kb_lookup(kb, "unknown_task", "point_coincidence")->unit == Unit::Meters);
  CHECK_FALSE(kb_lookup(kb, "unknown_task", "unknown_kind"));
  for (const auto & [key, entry] : kb.entries) {
    CHECK(entry.unit != Unit::None);
  }

  std::ifstream in(std::string(CAM_DATA_DIR) + "/thresholds.kb");
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == default_kb_text());

  CHECK_THROWS_AS(parse_kb("a.b = 3"), ConfigError);
  CHECK_THROWS_AS(parse_kb("ab = 3 m"), ConfigError);
  CHECK_THROWS_AS(parse_kb("a.b = 3 parsecs"), ConfigError);
}
