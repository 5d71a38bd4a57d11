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

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "cam/elementizer.hpp"
#include "cam/error.hpp"

namespace cam::lang
{

using geom::PointList;
using geom::Vec3;

enum class Mode { During, OnCompletion };

/// Internal units. Literals written without a unit are polymorphic (None).
enum class Unit { None, Meters, Radians, Count };

const char * mode_name(Mode m);
const char * unit_name(Unit u);

enum class Builtin
{
  Pos, Centroid, Normal, Dir, Dist, Angle, AxisX, AxisY, AxisZ, ProjXY,
  Displacement, Rotation, CountWithin, Inside, Above, Box,
};

inline constexpr int kBuiltinCount = 16;

const char * builtin_name(Builtin b);
std::optional<Builtin> builtin_from_name(std::string_view name);
int builtin_arity(Builtin b);

enum class UnaryOp { Neg, Not };
enum class BinaryOp { Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Eq, And, Or };

const char * op_text(BinaryOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

namespace ast
{
struct Number { double value; Unit unit; };
struct Bool { bool value; };
struct TolRef { std::string name; };
struct ElemRef { int id; };
struct Vector { ExprPtr x, y, z; };
struct List { std::vector<ExprPtr> items; };
struct Call { Builtin fn; std::vector<ExprPtr> args; };
struct Unary { UnaryOp op; ExprPtr operand; };
struct Binary { BinaryOp op; ExprPtr lhs, rhs; };
/// |lhs - rhs| <= tol, with the norm for vectors.
struct Within { ExprPtr lhs, tol, rhs; };
struct If { ExprPtr cond, then_branch, else_branch; };
/// Evaluates inner against the state lag ticks in the past.
struct At { ExprPtr inner; int lag; };
}  // namespace ast

struct Expr
{
  using Node = std::variant<
    ast::Number, ast::Bool, ast::TolRef, ast::ElemRef, ast::Vector, ast::List, ast::Call,
    ast::Unary, ast::Binary, ast::Within, ast::If, ast::At>;

  Node node;
  int line = 0;
  int col = 0;
};

template<typename T>
ExprPtr make_expr(T node, int line = 0, int col = 0)
{
  return std::make_shared<const Expr>(Expr{std::move(node), line, col});
}

/// Ignores source positions.
bool structurally_equal(const Expr & a, const Expr & b);

struct Tolerance
{
  std::string name;
  double value = 0.0;  // SI
  Unit unit = Unit::None;

  friend bool operator==(const Tolerance &, const Tolerance &) = default;
};

struct MonitorProgram
{
  int id = 0;
  std::string name;
  Mode mode = Mode::During;
  std::vector<Tolerance> tolerances;
  ExprPtr body;
  std::string reason_template;

  const Tolerance * find_tolerance(std::string_view tol_name) const;
  /// Largest total history offset any path of the body reads.
  int max_lag() const;
  /// Element ids referenced anywhere in the body, sorted and unique.
  std::vector<int> element_refs() const;
};

/// Ignores the id.
bool structurally_equal(const MonitorProgram & a, const MonitorProgram & b);

class SyntaxError : public Error
{
public:
  SyntaxError(int line, int col, std::vector<std::string> expected, const std::string & found);

  int line;
  int col;
  std::vector<std::string> expected;
};

class DuplicateTolerance : public Error
{
public:
  using Error::Error;
};

class EvalError : public Error
{
public:
  using Error::Error;
};

MonitorProgram parse(std::string_view source);
ExprPtr parse_expr(std::string_view source);
std::vector<MonitorProgram> parse_file(const std::filesystem::path & path);
/// Splits a file holding several programs.
std::vector<MonitorProgram> parse_many(std::string_view source);

/// Canonical form: fully parenthesized, SI values printed with 17 digits.
std::string print(const MonitorProgram & p);
std::string print(const Expr & e);

struct TypeError
{
  std::string message;
  int line = 0;
  int col = 0;
};

std::vector<TypeError> typecheck(const MonitorProgram & p, const elem::ElementSet & elems);

/// Point history of every element. Lag 0 is the current tick; lags beyond
/// the recorded depth clamp to the oldest entry.
class HistoryView
{
public:
  virtual ~HistoryView() = default;
  virtual bool has(int id) const = 0;
  virtual const PointList & points(int id, int lag) const = 0;
};

/// In-memory history, used by tests and by the validator.
class FrameHistory : public HistoryView
{
public:
  void push(int id, PointList pts);
  void push_all(const elem::ElementSet & elems);

  bool has(int id) const override;
  const PointList & points(int id, int lag) const override;

private:
  std::map<int, std::vector<PointList>> frames_;
};

struct EvalContext
{
  int tick = 0;
  const elem::ElementSet * elements = nullptr;
  const HistoryView * history = nullptr;
};

struct EvalResult
{
  bool satisfied = true;
  std::optional<std::string> reason;

  friend bool operator==(const EvalResult &, const EvalResult &) = default;
};

/// Runtime errors are reported as an unsatisfied result.
EvalResult evaluate(const MonitorProgram & p, const EvalContext & ctx);

struct ValidationFailure
{
  std::string path;
  std::string error;
};

/// Branch-forcing evaluation; nullopt when every path runs cleanly.
std::optional<ValidationFailure> whitebox_validate(
  const MonitorProgram & p, const EvalContext & ctx);

/// Fills {name} placeholders: builtin names take the first value that
/// builtin produced, tolerance names take the declared value.
std::string render_reason(
  const std::string & tmpl, const std::map<std::string, std::string> & values);

struct KbEntry
{
  double value = 0.0;
  Unit unit = Unit::None;
};

struct ThresholdKB
{
  std::map<std::pair<std::string, std::string>, KbEntry> entries;
};

ThresholdKB parse_kb(std::string_view text);
ThresholdKB load_kb(const std::filesystem::path & path);
/// Contents shipped as the default knowledge base file.
std::string_view default_kb_text();
const ThresholdKB & default_kb();

/// Entry for (task, kind), else the per-kind fallback, else nullopt.
std::optional<KbEntry> kb_lookup(const ThresholdKB & kb, const std::string & task, const std::string & kind);

/// Parses "<number> <unit>" into SI.
KbEntry parse_quantity(double number, std::string_view unit);

}  // namespace cam::lang
