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
#include <cstdio>

#include "cam/conlang.hpp"

namespace cam::lang
{

namespace
{

struct BoxValue
{
  Vec3 lo;
  Vec3 hi;
};

struct ElemValue
{
  int id;
};

using Value = std::variant<bool, double, Vec3, ElemValue, std::vector<int>, BoxValue>;

std::string format(const Value & v)
{
  char buf[96];
  if (auto b = std::get_if<bool>(&v)) {
    return *b ? "true" : "false";
  }
  if (auto d = std::get_if<double>(&v)) {
    std::snprintf(buf, sizeof(buf), "%.4g", *d);
    return buf;
  }
  if (auto p = std::get_if<Vec3>(&v)) {
    std::snprintf(buf, sizeof(buf), "(%.4g, %.4g, %.4g)", p->x(), p->y(), p->z());
    return buf;
  }
  return "?";
}

Vec3 centroid_of(const PointList & pts)
{
  if (pts.empty()) {
    throw EvalError("element has no points");
  }
  Vec3 c = Vec3::Zero();
  for (const auto & p : pts) {
    c += p;
  }
  return c / static_cast<double>(pts.size());
}

/// Carries the branch path for validation messages.
class PathError : public Error
{
public:
  PathError(std::string p, const std::string & what)
  : Error(what), path(std::move(p)) {}
  std::string path;
};

class Evaluator
{
public:
  Evaluator(const MonitorProgram & p, const EvalContext & ctx, bool force)
  : prog_(p), ctx_(ctx), force_(force) {}

  std::array<std::optional<Value>, kBuiltinCount> first;

  bool run()
  {
    const Value v = eval(*prog_.body, 0);
    auto b = std::get_if<bool>(&v);
    if (!b) {
      fail("body did not produce a boolean");
    }
    return *b;
  }

  std::string path() const
  {
    std::string s = "body";
    for (const auto & p : path_) {
      s += "/";
      s += p;
    }
    return s;
  }

private:
  [[noreturn]] void fail(const std::string & msg) const
  {
    throw EvalError(msg);
  }

  template<typename T>
  const T & as(const Value & v, const char * what) const
  {
    auto p = std::get_if<T>(&v);
    if (!p) {
      fail(std::string("expected ") + what);
    }
    return *p;
  }

  double num(const Expr & e, int lag) {return as<double>(eval(e, lag), "a number");}
  bool truth(const Expr & e, int lag) {return as<bool>(eval(e, lag), "a boolean");}
  Vec3 vec(const Expr & e, int lag) {return as<Vec3>(eval(e, lag), "a vector");}

  Value branch(const char * label, const Expr & e, int lag)
  {
    path_.push_back(label);
    Value v = eval(e, lag);
    path_.pop_back();
    return v;
  }

  const elem::ConstraintElement & meta(int id) const
  {
    if (!ctx_.elements || !ctx_.elements->contains(id)) {
      fail("unknown element e(" + std::to_string(id) + ")");
    }
    return ctx_.elements->at(id);
  }

  const PointList & points(int id, int lag) const
  {
    if (!ctx_.history || !ctx_.history->has(id)) {
      fail("no track for e(" + std::to_string(id) + ")");
    }
    return ctx_.history->points(id, lag);
  }

  int elem_arg(const Expr & e, int lag)
  {
    return as<ElemValue>(eval(e, lag), "an element").id;
  }

  int int_arg(const Expr & e, int lag)
  {
    return static_cast<int>(num(e, lag));
  }

  /// Fitted axis signed by the element's own point order, so a half turn reads as pi.
  Vec3 oriented_axis(int id, int lag) const
  {
    const auto & pts = points(id, lag);
    const auto kind = meta(id).type.kind;
    if (kind == elem::ElementKind::Line) {
      Vec3 d = geom::fit_line(pts).axis;
      if (d.dot(pts.back() - pts.front()) < 0.0) {
        d = -d;
      }
      return d;
    }
    if (kind == elem::ElementKind::Surface) {
      Vec3 n = geom::fit_plane(pts).axis;
      Vec3 newell = Vec3::Zero();
      for (std::size_t i = 0; i < pts.size(); ++i) {
        newell += pts[i].cross(pts[(i + 1) % pts.size()]);
      }
      if (n.dot(newell) < 0.0) {
        n = -n;
      }
      return n;
    }
    fail("rotation requires LINE or SURFACE");
  }

  Value record(Builtin fn, Value v)
  {
    auto & slot = first[static_cast<std::size_t>(fn)];
    if (!slot) {
      slot = v;
    }
    return v;
  }

  Value call(const ast::Call & c, int lag)
  {
    const auto & a = c.args;
    if (static_cast<int>(a.size()) != builtin_arity(c.fn)) {
      fail(std::string(builtin_name(c.fn)) + " called with the wrong number of arguments");
    }
    switch (c.fn) {
      case Builtin::Pos: {
          const int id = elem_arg(*a[0], lag);
          const int i = int_arg(*a[1], lag);
          const auto & pts = points(id, lag);
          if (i < 0 || i >= static_cast<int>(pts.size())) {
            fail("pos index out of range");
          }
          return record(c.fn, pts[static_cast<std::size_t>(i)]);
        }
      case Builtin::Centroid:
        return record(c.fn, centroid_of(points(elem_arg(*a[0], lag), lag)));
      case Builtin::Normal:
        return record(c.fn, geom::fit_plane(points(elem_arg(*a[0], lag), lag)).axis);
      case Builtin::Dir:
        return record(c.fn, geom::fit_line(points(elem_arg(*a[0], lag), lag)).axis);
      case Builtin::Dist:
        return record(c.fn, (vec(*a[0], lag) - vec(*a[1], lag)).norm());
      case Builtin::Angle:
        return record(c.fn, geom::angle_between<double>(vec(*a[0], lag), vec(*a[1], lag)));
      case Builtin::AxisX:
        return Vec3(Vec3::UnitX());
      case Builtin::AxisY:
        return Vec3(Vec3::UnitY());
      case Builtin::AxisZ:
        return Vec3(Vec3::UnitZ());
      case Builtin::ProjXY: {
          Vec3 p = vec(*a[0], lag);
          p.z() = 0.0;
          return record(c.fn, p);
        }
      case Builtin::Displacement: {
          const int id = elem_arg(*a[0], lag);
          const int d = int_arg(*a[1], lag);
          return record(
            c.fn, (centroid_of(points(id, lag)) - centroid_of(points(id, lag + d))).norm());
        }
      case Builtin::Rotation: {
          const int id = elem_arg(*a[0], lag);
          const int d = int_arg(*a[1], lag);
          return record(
            c.fn, geom::angle_between<double>(oriented_axis(id, lag), oriented_axis(id, lag + d)));
        }
      case Builtin::CountWithin: {
          const auto ids = as<std::vector<int>>(eval(*a[0], lag), "an element list");
          const auto box = as<BoxValue>(eval(*a[1], lag), "a box");
          int count = 0;
          for (int id : ids) {
            const Vec3 ctr = centroid_of(points(id, lag));
            count += (ctr.array() >= box.lo.array()).all() && (ctr.array() <= box.hi.array()).all();
          }
          return record(c.fn, static_cast<double>(count));
        }
      case Builtin::Inside: {
          const Vec3 p = vec(*a[0], lag);
          const auto box = as<BoxValue>(eval(*a[1], lag), "a box");
          return record(
            c.fn, (p.array() >= box.lo.array()).all() && (p.array() <= box.hi.array()).all());
        }
      case Builtin::Above: {
          const Vec3 p = vec(*a[0], lag);
          const Vec3 q = vec(*a[1], lag);
          return record(c.fn, p.z() >= q.z() + num(*a[2], lag));
        }
      case Builtin::Box:
        return BoxValue{vec(*a[0], lag), vec(*a[1], lag)};
    }
    fail("unknown builtin");
  }

  Value arith(BinaryOp op, const Value & l, const Value & r)
  {
    const auto * ld = std::get_if<double>(&l);
    const auto * rd = std::get_if<double>(&r);
    const auto * lv = std::get_if<Vec3>(&l);
    const auto * rv = std::get_if<Vec3>(&r);
    switch (op) {
      case BinaryOp::Add:
        if (ld && rd) {return *ld + *rd;}
        if (lv && rv) {return Vec3(*lv + *rv);}
        break;
      case BinaryOp::Sub:
        if (ld && rd) {return *ld - *rd;}
        if (lv && rv) {return Vec3(*lv - *rv);}
        break;
      case BinaryOp::Mul:
        if (ld && rd) {return *ld * *rd;}
        if (ld && rv) {return Vec3(*ld * *rv);}
        if (lv && rd) {return Vec3(*lv * *rd);}
        break;
      case BinaryOp::Div:
        if (rd && *rd == 0.0) {
          fail("division by zero");
        }
        if (ld && rd) {return *ld / *rd;}
        if (lv && rd) {return Vec3(*lv / *rd);}
        break;
      default:
        break;
    }
    fail(std::string("bad operands for '") + op_text(op) + "'");
  }

  Value eval(const Expr & e, int lag)
  {
    if (auto n = std::get_if<ast::Number>(&e.node)) {
      return n->value;
    }
    if (auto b = std::get_if<ast::Bool>(&e.node)) {
      return b->value;
    }
    if (auto t = std::get_if<ast::TolRef>(&e.node)) {
      if (auto tol = prog_.find_tolerance(t->name)) {
        return tol->value;
      }
      fail("unknown name '" + t->name + "'");
    }
    if (auto r = std::get_if<ast::ElemRef>(&e.node)) {
      meta(r->id);
      return ElemValue{r->id};
    }
    if (auto v = std::get_if<ast::Vector>(&e.node)) {
      return Vec3(num(*v->x, lag), num(*v->y, lag), num(*v->z, lag));
    }
    if (auto l = std::get_if<ast::List>(&e.node)) {
      std::vector<int> ids;
      ids.reserve(l->items.size());
      for (const auto & it : l->items) {
        ids.push_back(elem_arg(*it, lag));
      }
      return ids;
    }
    if (auto c = std::get_if<ast::Call>(&e.node)) {
      return call(*c, lag);
    }
    if (auto u = std::get_if<ast::Unary>(&e.node)) {
      const Value v = eval(*u->operand, lag);
      if (u->op == UnaryOp::Not) {
        return !as<bool>(v, "a boolean");
      }
      if (auto d = std::get_if<double>(&v)) {
        return -*d;
      }
      return Vec3(-as<Vec3>(v, "a number or vector"));
    }
    if (auto b = std::get_if<ast::Binary>(&e.node)) {
      switch (b->op) {
        case BinaryOp::And: {
            const bool l = as<bool>(branch("and.lhs", *b->lhs, lag), "a boolean");
            if (!l && !force_) {
              return false;
            }
            const bool r = as<bool>(branch("and.rhs", *b->rhs, lag), "a boolean");
            return l && r;
          }
        case BinaryOp::Or: {
            const bool l = as<bool>(branch("or.lhs", *b->lhs, lag), "a boolean");
            if (l && !force_) {
              return true;
            }
            const bool r = as<bool>(branch("or.rhs", *b->rhs, lag), "a boolean");
            return l || r;
          }
        case BinaryOp::Lt:
          return num(*b->lhs, lag) < num(*b->rhs, lag);
        case BinaryOp::Le:
          return num(*b->lhs, lag) <= num(*b->rhs, lag);
        case BinaryOp::Gt:
          return num(*b->lhs, lag) > num(*b->rhs, lag);
        case BinaryOp::Ge:
          return num(*b->lhs, lag) >= num(*b->rhs, lag);
        case BinaryOp::Eq: {
            const Value l = eval(*b->lhs, lag);
            const Value r = eval(*b->rhs, lag);
            if (auto lb = std::get_if<bool>(&l)) {
              return *lb == as<bool>(r, "a boolean");
            }
            return as<double>(l, "a number") == as<double>(r, "a number");
          }
        default: {
            const Value l = eval(*b->lhs, lag);
            const Value r = eval(*b->rhs, lag);
            return arith(b->op, l, r);
          }
      }
    }
    if (auto w = std::get_if<ast::Within>(&e.node)) {
      const Value l = eval(*w->lhs, lag);
      const double tol = num(*w->tol, lag);
      const Value r = eval(*w->rhs, lag);
      if (auto ld = std::get_if<double>(&l)) {
        return std::abs(*ld - as<double>(r, "a number")) <= tol;
      }
      return (as<Vec3>(l, "a vector") - as<Vec3>(r, "a vector")).norm() <= tol;
    }
    if (auto i = std::get_if<ast::If>(&e.node)) {
      const bool c = as<bool>(branch("if.cond", *i->cond, lag), "a boolean");
      if (force_) {
        Value a = branch("if.then", *i->then_branch, lag);
        Value b = branch("if.else", *i->else_branch, lag);
        return c ? a : b;
      }
      return c ? eval(*i->then_branch, lag) : eval(*i->else_branch, lag);
    }
    if (auto a = std::get_if<ast::At>(&e.node)) {
      return eval(*a->inner, lag + a->lag);
    }
    fail("unsupported expression");
  }

  const MonitorProgram & prog_;
  const EvalContext & ctx_;
  bool force_;
  std::vector<const char *> path_;
};

std::string reason_for(const MonitorProgram & p, const Evaluator & ev)
{
  std::map<std::string, std::string> values;
  for (std::size_t i = 0; i < ev.first.size(); ++i) {
    if (ev.first[i]) {
      values[builtin_name(static_cast<Builtin>(i))] = format(*ev.first[i]);
    }
  }
  for (const auto & t : p.tolerances) {
    values.emplace(t.name, format(t.value));
  }
  return render_reason(p.reason_template, values);
}

}  // namespace

std::string render_reason(
  const std::string & tmpl, const std::map<std::string, std::string> & values)
{
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const auto open = tmpl.find('{', i);
    if (open == std::string::npos) {
      break;
    }
    const auto close = tmpl.find('}', open);
    if (close == std::string::npos) {
      break;
    }
    out.append(tmpl, i, open - i);
    const auto it = values.find(tmpl.substr(open + 1, close - open - 1));
    if (it != values.end()) {
      out += it->second;
    } else {
      out.append(tmpl, open, close - open + 1);
    }
    i = close + 1;
  }
  out.append(tmpl, i);
  return out;
}

EvalResult evaluate(const MonitorProgram & p, const EvalContext & ctx)
{
  Evaluator ev(p, ctx, false);
  try {
    if (!p.body) {
      throw EvalError("empty program");
    }
    if (ev.run()) {
      return {true, std::nullopt};
    }
    return {false, reason_for(p, ev)};
  } catch (const Error & err) {
    return {false, std::string("monitor internal error: ") + err.what()};
  }
}

std::optional<ValidationFailure> whitebox_validate(
  const MonitorProgram & p, const EvalContext & ctx)
{
  if (!p.body) {
    return ValidationFailure{"body", "empty program"};
  }
  for (int id : p.element_refs()) {
    if (!ctx.elements || !ctx.elements->contains(id)) {
      return ValidationFailure{"e(" + std::to_string(id) + ")", "unknown element"};
    }
    if (!ctx.history || !ctx.history->has(id)) {
      return ValidationFailure{"e(" + std::to_string(id) + ")", "element is not tracked"};
    }
  }
  Evaluator ev(p, ctx, true);
  bool ok = false;
  try {
    ok = ev.run();
  } catch (const Error & err) {
    return ValidationFailure{ev.path(), err.what()};
  }
  if (p.mode == Mode::During && !ok) {
    return ValidationFailure{"body", "during constraint is false at the first tick: " +
             reason_for(p, ev)};
  }
  return std::nullopt;
}

void FrameHistory::push(int id, PointList pts)
{
  frames_[id].push_back(std::move(pts));
}

void FrameHistory::push_all(const elem::ElementSet & elems)
{
  for (const auto & e : elems.elements) {
    push(e.id, e.points);
  }
}

bool FrameHistory::has(int id) const
{
  auto it = frames_.find(id);
  return it != frames_.end() && !it->second.empty();
}

const PointList & FrameHistory::points(int id, int lag) const
{
  const auto & f = frames_.at(id);
  const int n = static_cast<int>(f.size());
  const int idx = std::max(0, n - 1 - std::max(0, lag));
  return f[static_cast<std::size_t>(idx)];
}

}  // namespace cam::lang
