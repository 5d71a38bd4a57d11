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

#include <fstream>
#include <set>
#include <sstream>

#include "cam/conlang.hpp"
#include "lexer.hpp"

namespace cam::lang
{

namespace
{

using detail::Tok;
using detail::Token;

const std::set<std::string, std::less<>> kReserved = {
  "constraint", "mode", "during", "on_completion", "tol", "fail", "if", "then", "else",
  "and", "or", "not", "within", "of", "true", "false", "e", "at",
  "m", "cm", "mm", "deg", "rad", "count",
};

bool is_unit(std::string_view s)
{
  return s == "m" || s == "cm" || s == "mm" || s == "deg" || s == "rad" || s == "count";
}

std::string describe(const Token & t)
{
  switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::String: return "string \"" + t.text + "\"";
    default: return "'" + t.text + "'";
  }
}

class Parser
{
public:
  explicit Parser(std::string_view src)
  : toks_(detail::lex(src)) {}

  bool at_end() const {return peek().kind == Tok::End;}

  MonitorProgram program()
  {
    MonitorProgram p;
    expect_word("constraint");
    p.name = expect_string();
    expect_word("mode");
    if (accept_word("during")) {
      p.mode = Mode::During;
    } else if (accept_word("on_completion")) {
      p.mode = Mode::OnCompletion;
    } else {
      fail({"during", "on_completion"});
    }
    while (accept_word("tol")) {
      const Token name = peek();
      const std::string id = identifier();
      if (p.find_tolerance(id)) {
        throw DuplicateTolerance(
          "line " + std::to_string(name.line) + ", col " + std::to_string(name.col) +
          ": tolerance '" + id + "' declared twice");
      }
      expect_punct("=");
      const double value = number();
      if (peek().kind != Tok::Ident || !is_unit(peek().text)) {
        fail({"unit"});
      }
      const auto q = parse_quantity(value, next().text);
      p.tolerances.push_back({id, q.value, q.unit});
    }
    expect_punct("{");
    p.body = expr();
    expect_punct("}");
    expect_word("fail");
    p.reason_template = expect_string();
    return p;
  }

  ExprPtr expr()
  {
    const Token & t = peek();
    if (accept_word("if")) {
      auto c = expr();
      expect_word("then");
      auto a = expr();
      expect_word("else");
      auto b = expr();
      return make_expr(ast::If{c, a, b}, t.line, t.col);
    }
    return or_expr();
  }

  void expect_end()
  {
    if (!at_end()) {
      fail({"end of input"});
    }
  }

private:
  const Token & peek() const {return toks_[pos_];}
  const Token & next() {return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_];}

  [[noreturn]] void fail(std::vector<std::string> expected) const
  {
    const Token & t = peek();
    throw SyntaxError(t.line, t.col, std::move(expected), describe(t));
  }

  bool is_word(std::string_view w) const {return peek().kind == Tok::Ident && peek().text == w;}
  bool is_punct(std::string_view p) const {return peek().kind == Tok::Punct && peek().text == p;}

  bool accept_word(std::string_view w)
  {
    if (is_word(w)) {
      next();
      return true;
    }
    return false;
  }

  bool accept_punct(std::string_view p)
  {
    if (is_punct(p)) {
      next();
      return true;
    }
    return false;
  }

  void expect_word(std::string_view w)
  {
    if (!accept_word(w)) {
      fail({std::string(w)});
    }
  }

  void expect_punct(std::string_view p)
  {
    if (!accept_punct(p)) {
      fail({"'" + std::string(p) + "'"});
    }
  }

  std::string expect_string()
  {
    if (peek().kind != Tok::String) {
      fail({"string"});
    }
    return next().text;
  }

  std::string identifier()
  {
    if (peek().kind != Tok::Ident || kReserved.count(peek().text) ||
      builtin_from_name(peek().text))
    {
      fail({"identifier"});
    }
    return next().text;
  }

  double number()
  {
    if (peek().kind != Tok::Number) {
      fail({"number"});
    }
    return next().number;
  }

  int integer()
  {
    if (peek().kind != Tok::Number || !peek().integral) {
      fail({"integer"});
    }
    return static_cast<int>(next().number);
  }

  ExprPtr or_expr()
  {
    auto lhs = and_expr();
    while (is_word("or")) {
      const Token t = next();
      lhs = make_expr(ast::Binary{BinaryOp::Or, lhs, and_expr()}, t.line, t.col);
    }
    return lhs;
  }

  ExprPtr and_expr()
  {
    auto lhs = not_expr();
    while (is_word("and")) {
      const Token t = next();
      lhs = make_expr(ast::Binary{BinaryOp::And, lhs, not_expr()}, t.line, t.col);
    }
    return lhs;
  }

  ExprPtr not_expr()
  {
    if (is_word("not")) {
      const Token t = next();
      return make_expr(ast::Unary{UnaryOp::Not, not_expr()}, t.line, t.col);
    }
    return cmp_expr();
  }

  ExprPtr cmp_expr()
  {
    auto lhs = add_expr();
    static const std::pair<const char *, BinaryOp> ops[] = {
      {"<", BinaryOp::Lt}, {"<=", BinaryOp::Le}, {">", BinaryOp::Gt},
      {">=", BinaryOp::Ge}, {"==", BinaryOp::Eq}};
    for (const auto & [text, op] : ops) {
      if (is_punct(text)) {
        const Token t = next();
        return make_expr(ast::Binary{op, lhs, add_expr()}, t.line, t.col);
      }
    }
    if (is_word("within")) {
      const Token t = next();
      auto tol = add_expr();
      expect_word("of");
      return make_expr(ast::Within{lhs, tol, add_expr()}, t.line, t.col);
    }
    return lhs;
  }

  ExprPtr add_expr()
  {
    auto lhs = mul_expr();
    while (is_punct("+") || is_punct("-")) {
      const Token t = next();
      const auto op = t.text == "+" ? BinaryOp::Add : BinaryOp::Sub;
      lhs = make_expr(ast::Binary{op, lhs, mul_expr()}, t.line, t.col);
    }
    return lhs;
  }

  ExprPtr mul_expr()
  {
    auto lhs = unary();
    while (is_punct("*") || is_punct("/")) {
      const Token t = next();
      const auto op = t.text == "*" ? BinaryOp::Mul : BinaryOp::Div;
      lhs = make_expr(ast::Binary{op, lhs, unary()}, t.line, t.col);
    }
    return lhs;
  }

  ExprPtr unary()
  {
    if (is_punct("-")) {
      const Token t = next();
      return make_expr(ast::Unary{UnaryOp::Neg, unary()}, t.line, t.col);
    }
    return primary();
  }

  ExprPtr primary()
  {
    const Token t = peek();
    if (t.kind == Tok::Number) {
      next();
      if (peek().kind == Tok::Ident && is_unit(peek().text)) {
        const auto q = parse_quantity(t.number, next().text);
        return make_expr(ast::Number{q.value, q.unit}, t.line, t.col);
      }
      return make_expr(ast::Number{t.number, Unit::None}, t.line, t.col);
    }
    if (accept_word("true")) {
      return make_expr(ast::Bool{true}, t.line, t.col);
    }
    if (accept_word("false")) {
      return make_expr(ast::Bool{false}, t.line, t.col);
    }
    if (accept_word("e")) {
      expect_punct("(");
      const int id = integer();
      expect_punct(")");
      return make_expr(ast::ElemRef{id}, t.line, t.col);
    }
    if (accept_word("at")) {
      expect_punct("(");
      auto inner = expr();
      expect_punct(",");
      const int lag = integer();
      expect_punct(")");
      return make_expr(ast::At{inner, lag}, t.line, t.col);
    }
    if (t.kind == Tok::Ident && !kReserved.count(t.text)) {
      next();
      if (auto fn = builtin_from_name(t.text)) {
        std::vector<ExprPtr> args;
        const bool constant =
          *fn == Builtin::AxisX || *fn == Builtin::AxisY || *fn == Builtin::AxisZ;
        if (!constant) {
          expect_punct("(");
          if (!accept_punct(")")) {
            do {
              args.push_back(expr());
            } while (accept_punct(","));
            expect_punct(")");
          }
        }
        return make_expr(ast::Call{*fn, std::move(args)}, t.line, t.col);
      }
      return make_expr(ast::TolRef{t.text}, t.line, t.col);
    }
    if (accept_punct("(")) {
      auto first = expr();
      if (accept_punct(",")) {
        auto y = expr();
        expect_punct(",");
        auto z = expr();
        expect_punct(")");
        return make_expr(ast::Vector{first, y, z}, t.line, t.col);
      }
      expect_punct(")");
      return first;
    }
    if (accept_punct("[")) {
      std::vector<ExprPtr> items;
      if (!accept_punct("]")) {
        do {
          items.push_back(expr());
        } while (accept_punct(","));
        expect_punct("]");
      }
      return make_expr(ast::List{std::move(items)}, t.line, t.col);
    }
    fail({"number", "identifier", "'('", "'['", "if", "not", "'-'"});
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

std::string join(const std::vector<std::string> & v)
{
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s += (i ? ", " : "") + v[i];
  }
  return s;
}

}  // namespace

SyntaxError::SyntaxError(
  int line_, int col_, std::vector<std::string> expected_, const std::string & found)
: Error(
    "line " + std::to_string(line_) + ", col " + std::to_string(col_) + ": expected " +
    join(expected_) + " but found " + found),
  line(line_), col(col_), expected(std::move(expected_))
{
}

MonitorProgram parse(std::string_view source)
{
  Parser p(source);
  auto prog = p.program();
  p.expect_end();
  return prog;
}

ExprPtr parse_expr(std::string_view source)
{
  Parser p(source);
  auto e = p.expr();
  p.expect_end();
  return e;
}

std::vector<MonitorProgram> parse_many(std::string_view source)
{
  Parser p(source);
  std::vector<MonitorProgram> out;
  while (!p.at_end()) {
    out.push_back(p.program());
  }
  return out;
}

std::vector<MonitorProgram> parse_file(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_many(ss.str());
}

}  // namespace cam::lang
