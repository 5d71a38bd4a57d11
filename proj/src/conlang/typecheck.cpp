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
#include <set>

#include "cam/conlang.hpp"

namespace cam::lang
{

namespace
{

enum class Kind { Bool, Scalar, Vector, Element, List, Box, Bad };

struct Type
{
  Kind kind = Kind::Bad;
  Unit unit = Unit::None;
  bool direction = false;
  elem::ElementKind element = elem::ElementKind::Point;
  int points = 0;
};

Type scalar(Unit u) {return {Kind::Scalar, u};}
Type vec(bool direction) {return {Kind::Vector, Unit::None, direction};}
Type boolean() {return {Kind::Bool};}
Type bad() {return {Kind::Bad};}

/// Unifies two scalar units; None is polymorphic.
std::optional<Unit> unify(Unit a, Unit b)
{
  if (a == b || b == Unit::None) {
    return a;
  }
  if (a == Unit::None) {
    return b;
  }
  return std::nullopt;
}

std::string unit_text(Unit u)
{
  return u == Unit::None ? "unitless" : unit_name(u);
}

class Checker
{
public:
  Checker(const MonitorProgram & p, const elem::ElementSet & elems)
  : prog_(p), elems_(elems) {}

  std::vector<TypeError> errors;
  std::set<Builtin> used;

  Type check(const Expr & e)
  {
    const auto err = [&](const std::string & msg) {
        errors.push_back({msg, e.line, e.col});
        return bad();
      };

    if (auto n = std::get_if<ast::Number>(&e.node)) {
      if (!std::isfinite(n->value)) {
        return err("non-finite literal");
      }
      return scalar(n->unit);
    }
    if (std::holds_alternative<ast::Bool>(e.node)) {
      return boolean();
    }
    if (auto t = std::get_if<ast::TolRef>(&e.node)) {
      if (auto tol = prog_.find_tolerance(t->name)) {
        return scalar(tol->unit);
      }
      return err("unknown name '" + t->name + "'");
    }
    if (auto r = std::get_if<ast::ElemRef>(&e.node)) {
      if (!elems_.contains(r->id)) {
        return err("unknown element e(" + std::to_string(r->id) + ")");
      }
      const auto & el = elems_.at(r->id);
      Type t{Kind::Element};
      t.element = el.type.kind;
      t.points = static_cast<int>(el.points.size());
      return t;
    }
    if (auto v = std::get_if<ast::Vector>(&e.node)) {
      bool ok = true;
      for (const auto & c : {v->x, v->y, v->z}) {
        const Type ct = check(*c);
        if (ct.kind == Kind::Bad) {
          ok = false;
        } else if (ct.kind != Kind::Scalar || !unify(ct.unit, Unit::Meters)) {
          err("vector components must be lengths");
          ok = false;
        }
      }
      return ok ? vec(false) : bad();
    }
    if (auto l = std::get_if<ast::List>(&e.node)) {
      bool ok = true;
      for (const auto & it : l->items) {
        const Type t = check(*it);
        if (t.kind != Kind::Element) {
          if (t.kind != Kind::Bad) {
            err("list items must be elements");
          }
          ok = false;
        }
      }
      return ok ? Type{Kind::List} : bad();
    }
    if (auto c = std::get_if<ast::Call>(&e.node)) {
      return call(e, *c);
    }
    if (auto u = std::get_if<ast::Unary>(&e.node)) {
      const Type t = check(*u->operand);
      if (t.kind == Kind::Bad) {
        return t;
      }
      if (u->op == UnaryOp::Not) {
        return t.kind == Kind::Bool ? t : err("'not' requires a boolean");
      }
      return t.kind == Kind::Scalar || t.kind == Kind::Vector ? t : err("cannot negate");
    }
    if (auto b = std::get_if<ast::Binary>(&e.node)) {
      return binary(e, *b);
    }
    if (auto w = std::get_if<ast::Within>(&e.node)) {
      const Type a = check(*w->lhs);
      const Type tol = check(*w->tol);
      const Type b = check(*w->rhs);
      if (a.kind == Kind::Bad || tol.kind == Kind::Bad || b.kind == Kind::Bad) {
        return bad();
      }
      if (tol.kind != Kind::Scalar) {
        return err("'within' tolerance must be a scalar");
      }
      if (a.kind == Kind::Vector && b.kind == Kind::Vector) {
        if (!unify(tol.unit, Unit::Meters)) {
          return err("'within' on vectors needs a length tolerance, got " + unit_text(tol.unit));
        }
        return boolean();
      }
      if (a.kind == Kind::Scalar && b.kind == Kind::Scalar) {
        const auto u = unify(a.unit, b.unit);
        if (!u || !unify(*u, tol.unit)) {
          return err("unit mismatch in 'within'");
        }
        return boolean();
      }
      return err("'within' needs two scalars or two vectors");
    }
    if (auto i = std::get_if<ast::If>(&e.node)) {
      const Type c = check(*i->cond);
      const Type a = check(*i->then_branch);
      const Type b = check(*i->else_branch);
      if (c.kind == Kind::Bad || a.kind == Kind::Bad || b.kind == Kind::Bad) {
        return bad();
      }
      if (c.kind != Kind::Bool) {
        return err("condition must be boolean");
      }
      if (a.kind != b.kind) {
        return err("branches have different types");
      }
      if (a.kind == Kind::Scalar) {
        const auto u = unify(a.unit, b.unit);
        if (!u) {
          return err("branches have different units");
        }
        return scalar(*u);
      }
      if (a.kind == Kind::Vector) {
        return vec(a.direction && b.direction);
      }
      return a;
    }
    if (auto a = std::get_if<ast::At>(&e.node)) {
      if (a->lag < 0) {
        return err("history offset must be non-negative");
      }
      return check(*a->inner);
    }
    return err("unsupported expression");
  }

private:
  std::optional<int> literal_int(const Expr & e)
  {
    auto n = std::get_if<ast::Number>(&e.node);
    if (!n || n->unit != Unit::None || n->value < 0 || n->value != std::floor(n->value)) {
      return std::nullopt;
    }
    return static_cast<int>(n->value);
  }

  Type call(const Expr & e, const ast::Call & c)
  {
    used.insert(c.fn);
    const std::string name = builtin_name(c.fn);
    const auto err = [&](const std::string & msg) {
        errors.push_back({msg, e.line, e.col});
        return bad();
      };
    const int want = builtin_arity(c.fn);
    if (static_cast<int>(c.args.size()) != want) {
      return err(name + " expects " + std::to_string(want) + " argument(s)");
    }
    std::vector<Type> a;
    for (const auto & arg : c.args) {
      a.push_back(check(*arg));
      if (a.back().kind == Kind::Bad) {
        return bad();
      }
    }
    const auto is_point = [](const Type & t) {return t.kind == Kind::Vector;};
    switch (c.fn) {
      case Builtin::Pos: {
          if (a[0].kind != Kind::Element) {
            return err("pos requires an element");
          }
          const auto idx = literal_int(*c.args[1]);
          if (!idx) {
            return err("pos index must be a non-negative integer literal");
          }
          if (*idx >= a[0].points) {
            return err("pos index " + std::to_string(*idx) + " out of range");
          }
          return vec(false);
        }
      case Builtin::Centroid:
        return a[0].kind == Kind::Element ? vec(false) : err("centroid requires an element");
      case Builtin::Normal:
        if (a[0].kind != Kind::Element || a[0].element != elem::ElementKind::Surface) {
          return err("normal requires SURFACE");
        }
        return vec(true);
      case Builtin::Dir:
        if (a[0].kind != Kind::Element || a[0].element != elem::ElementKind::Line) {
          return err("dir requires LINE");
        }
        return vec(true);
      case Builtin::Dist:
        if (!is_point(a[0]) || !is_point(a[1]) || a[0].direction || a[1].direction) {
          return err("dist requires two points");
        }
        return scalar(Unit::Meters);
      case Builtin::Angle:
        if (!is_point(a[0]) || !is_point(a[1])) {
          return err("angle requires two vectors");
        }
        return scalar(Unit::Radians);
      case Builtin::AxisX:
      case Builtin::AxisY:
      case Builtin::AxisZ:
        return vec(true);
      case Builtin::ProjXY:
        return is_point(a[0]) ? a[0] : err("proj_xy requires a vector");
      case Builtin::Displacement:
      case Builtin::Rotation: {
          if (a[0].kind != Kind::Element) {
            return err(name + " requires an element");
          }
          if (!literal_int(*c.args[1])) {
            return err(name + " offset must be a non-negative integer literal");
          }
          if (c.fn == Builtin::Displacement) {
            return scalar(Unit::Meters);
          }
          if (a[0].element != elem::ElementKind::Line &&
            a[0].element != elem::ElementKind::Surface)
          {
            return err("rotation requires LINE or SURFACE");
          }
          return scalar(Unit::Radians);
        }
      case Builtin::CountWithin:
        if (a[0].kind != Kind::List || a[1].kind != Kind::Box) {
          return err("count_within requires an element list and a box");
        }
        return scalar(Unit::Count);
      case Builtin::Inside:
        if (!is_point(a[0]) || a[1].kind != Kind::Box) {
          return err("inside requires a point and a box");
        }
        return boolean();
      case Builtin::Above:
        if (!is_point(a[0]) || !is_point(a[1]) || a[2].kind != Kind::Scalar ||
          !unify(a[2].unit, Unit::Meters))
        {
          return err("above requires two points and a length margin");
        }
        return boolean();
      case Builtin::Box:
        if (!is_point(a[0]) || !is_point(a[1])) {
          return err("box requires two corner points");
        }
        return Type{Kind::Box};
    }
    return err("unknown builtin");
  }

  Type binary(const Expr & e, const ast::Binary & b)
  {
    const Type l = check(*b.lhs);
    const Type r = check(*b.rhs);
    if (l.kind == Kind::Bad || r.kind == Kind::Bad) {
      return bad();
    }
    const auto err = [&](const std::string & msg) {
        errors.push_back({msg, e.line, e.col});
        return bad();
      };
    const std::string op = op_text(b.op);
    switch (b.op) {
      case BinaryOp::And:
      case BinaryOp::Or:
        if (l.kind != Kind::Bool || r.kind != Kind::Bool) {
          return err("'" + op + "' requires booleans");
        }
        return boolean();
      case BinaryOp::Lt:
      case BinaryOp::Le:
      case BinaryOp::Gt:
      case BinaryOp::Ge:
      case BinaryOp::Eq:
        if (b.op == BinaryOp::Eq && l.kind == Kind::Bool && r.kind == Kind::Bool) {
          return boolean();
        }
        if (l.kind != Kind::Scalar || r.kind != Kind::Scalar) {
          return err("'" + op + "' requires scalars");
        }
        if (!unify(l.unit, r.unit)) {
          return err("cannot compare " + unit_text(l.unit) + " with " + unit_text(r.unit));
        }
        return boolean();
      case BinaryOp::Add:
      case BinaryOp::Sub:
        if (l.kind == Kind::Scalar && r.kind == Kind::Scalar) {
          const auto u = unify(l.unit, r.unit);
          if (!u) {
            return err("unit mismatch: " + unit_text(l.unit) + " " + op + " " + unit_text(r.unit));
          }
          return scalar(*u);
        }
        if (l.kind == Kind::Vector && r.kind == Kind::Vector) {
          return vec(l.direction && r.direction);
        }
        return err("'" + op + "' requires two scalars or two vectors");
      case BinaryOp::Mul:
        if (l.kind == Kind::Scalar && r.kind == Kind::Scalar) {
          if (l.unit != Unit::None && r.unit != Unit::None) {
            return err("product of " + unit_text(l.unit) + " and " + unit_text(r.unit));
          }
          return scalar(l.unit == Unit::None ? r.unit : l.unit);
        }
        if ((l.kind == Kind::Scalar) != (r.kind == Kind::Scalar) &&
          (l.kind == Kind::Vector || r.kind == Kind::Vector))
        {
          const Type & s = l.kind == Kind::Scalar ? l : r;
          const Type & v = l.kind == Kind::Vector ? l : r;
          if (s.unit == Unit::None) {
            return v;
          }
          if (s.unit == Unit::Meters && v.direction) {
            return vec(false);
          }
          return err("cannot scale a vector by " + unit_text(s.unit));
        }
        return err("'*' requires scalars or a vector and a scalar");
      case BinaryOp::Div:
        if (r.kind != Kind::Scalar) {
          return err("divisor must be a scalar");
        }
        if (l.kind == Kind::Vector) {
          return r.unit == Unit::None ? l : err("cannot divide a vector by " + unit_text(r.unit));
        }
        if (l.kind != Kind::Scalar) {
          return err("'/' requires scalars");
        }
        if (r.unit == Unit::None) {
          return scalar(l.unit);
        }
        if (l.unit == r.unit) {
          return scalar(Unit::None);
        }
        return err("quotient of " + unit_text(l.unit) + " and " + unit_text(r.unit));
    }
    return err("unsupported operator");
  }

  const MonitorProgram & prog_;
  const elem::ElementSet & elems_;
};

}  // namespace

std::vector<TypeError> typecheck(const MonitorProgram & p, const elem::ElementSet & elems)
{
  Checker c(p, elems);
  if (!p.body) {
    return {{"empty program", 0, 0}};
  }
  const Type t = c.check(*p.body);
  if (t.kind != Kind::Bad && t.kind != Kind::Bool) {
    c.errors.push_back({"body must be boolean", p.body->line, p.body->col});
  }
  // placeholders in the failure template
  const auto & s = p.reason_template;
  for (std::size_t i = s.find('{'); i != std::string::npos; i = s.find('{', i + 1)) {
    const auto j = s.find('}', i);
    if (j == std::string::npos) {
      break;
    }
    const std::string name = s.substr(i + 1, j - i - 1);
    const auto fn = builtin_from_name(name);
    if (!(fn && c.used.count(*fn)) && !p.find_tolerance(name)) {
      c.errors.push_back({"unknown placeholder {" + name + "}", 0, 0});
    }
  }
  return c.errors;
}

}  // namespace cam::lang
