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
#include <cmath>
#include <numbers>

#include "cam/conlang.hpp"

namespace cam::lang
{

namespace
{

constexpr std::array<const char *, kBuiltinCount> kBuiltinNames = {
  "pos", "centroid", "normal", "dir", "dist", "angle", "axis_x", "axis_y", "axis_z", "proj_xy",
  "displacement", "rotation", "count_within", "inside", "above", "box",
};

template<class... Ts>
struct overloaded : Ts ... { using Ts::operator()...; };

bool eq(const ExprPtr & a, const ExprPtr & b)
{
  return structurally_equal(*a, *b);
}

void walk(const Expr & e, int offset, int & max_lag, std::vector<int> & refs)
{
  std::visit(
    overloaded{
      [&](const ast::ElemRef & n) {refs.push_back(n.id);},
      [&](const ast::Vector & n) {
        walk(*n.x, offset, max_lag, refs);
        walk(*n.y, offset, max_lag, refs);
        walk(*n.z, offset, max_lag, refs);
      },
      [&](const ast::List & n) {
        for (const auto & it : n.items) {
          walk(*it, offset, max_lag, refs);
        }
      },
      [&](const ast::Call & n) {
        int extra = 0;
        if ((n.fn == Builtin::Displacement || n.fn == Builtin::Rotation) && n.args.size() == 2) {
          if (auto num = std::get_if<ast::Number>(&n.args[1]->node)) {
            extra = static_cast<int>(num->value);
          }
        }
        max_lag = std::max(max_lag, offset + extra);
        for (const auto & a : n.args) {
          walk(*a, offset, max_lag, refs);
        }
      },
      [&](const ast::Unary & n) {walk(*n.operand, offset, max_lag, refs);},
      [&](const ast::Binary & n) {
        walk(*n.lhs, offset, max_lag, refs);
        walk(*n.rhs, offset, max_lag, refs);
      },
      [&](const ast::Within & n) {
        walk(*n.lhs, offset, max_lag, refs);
        walk(*n.tol, offset, max_lag, refs);
        walk(*n.rhs, offset, max_lag, refs);
      },
      [&](const ast::If & n) {
        walk(*n.cond, offset, max_lag, refs);
        walk(*n.then_branch, offset, max_lag, refs);
        walk(*n.else_branch, offset, max_lag, refs);
      },
      [&](const ast::At & n) {
        max_lag = std::max(max_lag, offset + n.lag);
        walk(*n.inner, offset + n.lag, max_lag, refs);
      },
      [](const auto &) {},
    },
    e.node);
}

}  // namespace

const char * mode_name(Mode m)
{
  return m == Mode::During ? "during" : "on_completion";
}

const char * unit_name(Unit u)
{
  switch (u) {
    case Unit::Meters: return "m";
    case Unit::Radians: return "rad";
    case Unit::Count: return "count";
    case Unit::None: break;
  }
  return "";
}

const char * builtin_name(Builtin b)
{
  return kBuiltinNames[static_cast<std::size_t>(b)];
}

int builtin_arity(Builtin b)
{
  static constexpr int arity[kBuiltinCount] = {2, 1, 1, 1, 2, 2, 0, 0, 0, 1, 2, 2, 2, 2, 3, 2};
  return arity[static_cast<std::size_t>(b)];
}

std::optional<Builtin> builtin_from_name(std::string_view name)
{
  for (std::size_t i = 0; i < kBuiltinNames.size(); ++i) {
    if (name == kBuiltinNames[i]) {
      return static_cast<Builtin>(i);
    }
  }
  return std::nullopt;
}

const char * op_text(BinaryOp op)
{
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Eq: return "==";
    case BinaryOp::And: return "and";
    case BinaryOp::Or: return "or";
  }
  return "?";
}

KbEntry parse_quantity(double number, std::string_view unit)
{
  if (unit == "m") {return {number, Unit::Meters};}
  if (unit == "cm") {return {number * 0.01, Unit::Meters};}
  if (unit == "mm") {return {number * 0.001, Unit::Meters};}
  if (unit == "deg") {return {number * std::numbers::pi / 180.0, Unit::Radians};}
  if (unit == "rad") {return {number, Unit::Radians};}
  if (unit == "count") {return {number, Unit::Count};}
  throw ConfigError("unknown unit '" + std::string(unit) + "'");
}

bool structurally_equal(const Expr & a, const Expr & b)
{
  if (a.node.index() != b.node.index()) {
    return false;
  }
  return std::visit(
    overloaded{
      [&](const ast::Number & x) {
        const auto & y = std::get<ast::Number>(b.node);
        return x.value == y.value && x.unit == y.unit;
      },
      [&](const ast::Bool & x) {return x.value == std::get<ast::Bool>(b.node).value;},
      [&](const ast::TolRef & x) {return x.name == std::get<ast::TolRef>(b.node).name;},
      [&](const ast::ElemRef & x) {return x.id == std::get<ast::ElemRef>(b.node).id;},
      [&](const ast::Vector & x) {
        const auto & y = std::get<ast::Vector>(b.node);
        return eq(x.x, y.x) && eq(x.y, y.y) && eq(x.z, y.z);
      },
      [&](const ast::List & x) {
        const auto & y = std::get<ast::List>(b.node);
        return std::equal(x.items.begin(), x.items.end(), y.items.begin(), y.items.end(), eq);
      },
      [&](const ast::Call & x) {
        const auto & y = std::get<ast::Call>(b.node);
        return x.fn == y.fn &&
               std::equal(x.args.begin(), x.args.end(), y.args.begin(), y.args.end(), eq);
      },
      [&](const ast::Unary & x) {
        const auto & y = std::get<ast::Unary>(b.node);
        return x.op == y.op && eq(x.operand, y.operand);
      },
      [&](const ast::Binary & x) {
        const auto & y = std::get<ast::Binary>(b.node);
        return x.op == y.op && eq(x.lhs, y.lhs) && eq(x.rhs, y.rhs);
      },
      [&](const ast::Within & x) {
        const auto & y = std::get<ast::Within>(b.node);
        return eq(x.lhs, y.lhs) && eq(x.tol, y.tol) && eq(x.rhs, y.rhs);
      },
      [&](const ast::If & x) {
        const auto & y = std::get<ast::If>(b.node);
        return eq(x.cond, y.cond) && eq(x.then_branch, y.then_branch) &&
               eq(x.else_branch, y.else_branch);
      },
      [&](const ast::At & x) {
        const auto & y = std::get<ast::At>(b.node);
        return x.lag == y.lag && eq(x.inner, y.inner);
      },
    },
    a.node);
}

bool structurally_equal(const MonitorProgram & a, const MonitorProgram & b)
{
  return a.name == b.name && a.mode == b.mode && a.tolerances == b.tolerances &&
         a.reason_template == b.reason_template && a.body && b.body &&
         structurally_equal(*a.body, *b.body);
}

const Tolerance * MonitorProgram::find_tolerance(std::string_view tol_name) const
{
  for (const auto & t : tolerances) {
    if (t.name == tol_name) {
      return &t;
    }
  }
  return nullptr;
}

int MonitorProgram::max_lag() const
{
  int lag = 0;
  std::vector<int> refs;
  if (body) {
    walk(*body, 0, lag, refs);
  }
  return lag;
}

std::vector<int> MonitorProgram::element_refs() const
{
  int lag = 0;
  std::vector<int> refs;
  if (body) {
    walk(*body, 0, lag, refs);
  }
  std::sort(refs.begin(), refs.end());
  refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
  return refs;
}

}  // namespace cam::lang
