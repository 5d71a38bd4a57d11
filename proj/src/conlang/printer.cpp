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

#include <cstdio>

#include "cam/conlang.hpp"

namespace cam::lang
{

namespace
{

std::string number_text(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string quoted(const std::string & s)
{
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out.push_back(c);
    }
  }
  return out + "\"";
}

void emit(const Expr & e, std::string & out);

void emit_list(const std::vector<ExprPtr> & items, std::string & out)
{
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) {
      out += ", ";
    }
    emit(*items[i], out);
  }
}

void emit(const Expr & e, std::string & out)
{
  if (auto n = std::get_if<ast::Number>(&e.node)) {
    out += number_text(n->value);
    if (n->unit != Unit::None) {
      out += ' ';
      out += unit_name(n->unit);
    }
  } else if (auto b = std::get_if<ast::Bool>(&e.node)) {
    out += b->value ? "true" : "false";
  } else if (auto t = std::get_if<ast::TolRef>(&e.node)) {
    out += t->name;
  } else if (auto r = std::get_if<ast::ElemRef>(&e.node)) {
    out += "e(" + std::to_string(r->id) + ")";
  } else if (auto v = std::get_if<ast::Vector>(&e.node)) {
    out += '(';
    emit_list({v->x, v->y, v->z}, out);
    out += ')';
  } else if (auto l = std::get_if<ast::List>(&e.node)) {
    out += '[';
    emit_list(l->items, out);
    out += ']';
  } else if (auto c = std::get_if<ast::Call>(&e.node)) {
    out += builtin_name(c->fn);
    if (c->fn != Builtin::AxisX && c->fn != Builtin::AxisY && c->fn != Builtin::AxisZ) {
      out += '(';
      emit_list(c->args, out);
      out += ')';
    }
  } else if (auto u = std::get_if<ast::Unary>(&e.node)) {
    out += u->op == UnaryOp::Neg ? "(-" : "(not ";
    emit(*u->operand, out);
    out += ')';
  } else if (auto bin = std::get_if<ast::Binary>(&e.node)) {
    out += '(';
    emit(*bin->lhs, out);
    out += ' ';
    out += op_text(bin->op);
    out += ' ';
    emit(*bin->rhs, out);
    out += ')';
  } else if (auto w = std::get_if<ast::Within>(&e.node)) {
    out += '(';
    emit(*w->lhs, out);
    out += " within ";
    emit(*w->tol, out);
    out += " of ";
    emit(*w->rhs, out);
    out += ')';
  } else if (auto i = std::get_if<ast::If>(&e.node)) {
    out += "(if ";
    emit(*i->cond, out);
    out += " then ";
    emit(*i->then_branch, out);
    out += " else ";
    emit(*i->else_branch, out);
    out += ')';
  } else if (auto a = std::get_if<ast::At>(&e.node)) {
    out += "at(";
    emit(*a->inner, out);
    out += ", " + std::to_string(a->lag) + ")";
  }
}

}  // namespace

std::string print(const Expr & e)
{
  std::string out;
  emit(e, out);
  return out;
}

std::string print(const MonitorProgram & p)
{
  std::string out = "constraint " + quoted(p.name) + " mode " + mode_name(p.mode) + "\n";
  for (const auto & t : p.tolerances) {
    out += "  tol " + t.name + " = " + number_text(t.value) + " " + unit_name(t.unit) + "\n";
  }
  out += "{ ";
  if (p.body) {
    emit(*p.body, out);
  }
  out += " }\nfail " + quoted(p.reason_template) + "\n";
  return out;
}

}  // namespace cam::lang
