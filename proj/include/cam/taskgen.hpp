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

#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cam/conlang.hpp"
#include "cam/monitor.hpp"

namespace cam::task
{

enum class TaskName { StackInOrder, SweepHalf, SlotPen, StowBook, PourTea };

const char * task_name(TaskName t);
TaskName task_from_name(const std::string & s);
const std::vector<TaskName> & all_tasks();

struct TaskTemplate
{
  TaskName name = TaskName::StackInOrder;
  std::string instruction;
  std::vector<std::string> objects;
  std::map<std::string, double> params;

  double param(const std::string & key) const;
};

/// Default scene parameters for each task (desk scale, meters).
TaskTemplate default_template(TaskName t);

struct ElementSpec
{
  std::string entity;
  std::string part;  // "body" selects the whole instance
  elem::ElementType type;
  std::string serves;
};

inline const std::string kEndEffector = "end_effector";

struct Subgoal
{
  int id = 0;
  int nominal_index = 0;
  bool recovery = false;
  bool terminal = false;  // plan ends once this completes
  std::string text;
  std::string action;  // policy script id
  std::string object;
  std::string target;
  std::vector<ElementSpec> elements;
  std::vector<std::string> during_sources;
  std::vector<std::string> completion_sources;
};

struct FailureFeedback
{
  int subgoal_id = 0;
  std::string reason;
  int constraint_id = -1;
  std::string constraint_kind;
  lang::Mode mode = lang::Mode::During;
};

/// DSL sources for the subgoal's during and completion constraints.
struct EmittedConstraints
{
  std::vector<std::string> during;
  std::vector<std::string> completion;
};

/// relax scales every tolerance; 1.0 is the knowledge-base value.
EmittedConstraints emit_constraints(
  const Subgoal & sg, const TaskTemplate & tmpl, const lang::ThresholdKB & kb, double relax = 1.0);

/// Nominal subgoal skeletons (action, object, target) with text and element specs.
std::vector<Subgoal> nominal_sequence(const TaskTemplate & tmpl);
Subgoal make_subgoal(
  const TaskTemplate & tmpl, const std::string & action, const std::string & object,
  const std::string & target);

enum class RecoveryAction { Repick, Relevel, Realign, Retry, Stop, Abort };

const char * action_name(RecoveryAction a);

struct RecoveryRule
{
  std::string task;
  std::string kind;
  lang::Mode mode = lang::Mode::During;
  RecoveryAction action = RecoveryAction::Abort;
};

struct RuleTable
{
  std::vector<RecoveryRule> rules;

  const RecoveryRule * match(const std::string & task, const std::string & kind, lang::Mode mode) const;
};

/// Lines of the form `task kind mode -> action`.
RuleTable parse_rules(std::string_view text);
RuleTable load_rules(const std::filesystem::path & path);
std::string_view default_rules_text();
const RuleTable & default_rules();

struct TaskDone {};

struct TaskAborted
{
  std::string reason;
};

using PlanResult = std::variant<Subgoal, TaskDone, TaskAborted>;

struct SceneSummary
{
  std::vector<std::string> objects;
};

/// Rule-based stand-in for the generator: success feedback advances the
/// nominal sequence, failure feedback inserts recovery subgoals.
class Planner
{
public:
  Planner(
    TaskTemplate tmpl, const RuleTable & rules, const lang::ThresholdKB & kb,
    int max_retries = 5);

  /// l_pre is the id of the previous subgoal, absent on the first call;
  /// f_pre is absent when that subgoal completed.
  PlanResult plan_next(
    const SceneSummary & scene, std::optional<int> l_pre,
    const std::optional<FailureFeedback> & f_pre);

  /// Sources re-emitted with relaxed tolerances after a validation failure.
  EmittedConstraints relaxed(const Subgoal & sg) const;

  const TaskTemplate & task() const {return tmpl_;}
  const std::optional<Subgoal> & current() const {return current_;}
  int retries_for(int nominal_index) const;

private:
  Subgoal instantiate(Subgoal sg, bool recovery);
  PlanResult advance();

  TaskTemplate tmpl_;
  const RuleTable & rules_;
  const lang::ThresholdKB & kb_;
  int max_retries_;
  std::vector<Subgoal> nominal_;
  std::size_t cursor_ = 0;  // next nominal subgoal
  std::deque<Subgoal> pending_;
  std::optional<Subgoal> current_;
  std::map<int, int> retries_;
  int next_id_ = 0;
  bool started_ = false;
  bool finished_ = false;
};

enum class Control { Continue, HaltAndReplan, Done };

const char * control_name(Control c);

Control halt_policy_hook(const mon::Verdict & verdict, bool last_subgoal);

/// Program name doubles as the constraint kind used for rule lookup.
std::vector<std::pair<std::string, lang::Mode>> emitted_kinds(const TaskTemplate & tmpl);

}  // namespace cam::task
