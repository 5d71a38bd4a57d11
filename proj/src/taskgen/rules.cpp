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
#include <sstream>

#include "cam/error.hpp"
#include "cam/taskgen.hpp"

namespace cam::task
{

namespace
{

constexpr std::string_view kDefaultRules = R"RULES(
# Recovery rules: task kind mode -> action
# Actions:
#   repick   pick the object again, then redo the steps after its pick
#   relevel  restore the held object's orientation, then redo the failed step
#   realign  redo the step before the failed one, then the failed one
#   retry    redo the failed step
#   stop     stop the policy and finish with a stop subgoal
#   abort    give up

stack_in_order grasped on_completion -> repick
stack_in_order held during -> repick
stack_in_order base_placed on_completion -> repick
stack_in_order stacked_on on_completion -> repick

sweep_half half_reached during -> stop
sweep_half count_band on_completion -> abort

slot_pen pen_still during -> repick
slot_pen grasped on_completion -> repick
slot_pen held during -> repick
slot_pen held on_completion -> repick
slot_pen aligned on_completion -> retry
slot_pen upright on_completion -> retry
slot_pen holder_still during -> realign
slot_pen in_holder on_completion -> repick

stow_book grasp_rotation during -> repick
stow_book held during -> repick
stow_book held on_completion -> repick
stow_book upright on_completion -> retry
stow_book upright during -> relevel
stow_book above_shelf on_completion -> retry
stow_book stays_upright during -> repick
stow_book on_shelf on_completion -> repick

pour_tea held on_completion -> repick
pour_tea held during -> repick
pour_tea level_surface during -> relevel
pour_tea over_cup on_completion -> retry
pour_tea pour_hold during -> retry
pour_tea poured on_completion -> retry
pour_tea level_surface on_completion -> retry
)RULES";

std::vector<std::string> words(std::string_view line)
{
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  for (std::string w; in >> w; ) {
    out.push_back(w);
  }
  return out;
}

}  // namespace

const char * action_name(RecoveryAction a)
{
  switch (a) {
    case RecoveryAction::Repick: return "repick";
    case RecoveryAction::Relevel: return "relevel";
    case RecoveryAction::Realign: return "realign";
    case RecoveryAction::Retry: return "retry";
    case RecoveryAction::Stop: return "stop";
    case RecoveryAction::Abort: return "abort";
  }
  return "?";
}

const RecoveryRule * RuleTable::match(
  const std::string & task, const std::string & kind, lang::Mode mode) const
{
  for (const auto & r : rules) {
    if (r.task == task && r.kind == kind && r.mode == mode) {
      return &r;
    }
  }
  return nullptr;
}

RuleTable parse_rules(std::string_view text)
{
  static const RecoveryAction kActions[] = {
    RecoveryAction::Repick, RecoveryAction::Relevel, RecoveryAction::Realign,
    RecoveryAction::Retry, RecoveryAction::Stop, RecoveryAction::Abort};
  RuleTable table;
  int lineno = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineno;
    const auto w = words(line.substr(0, line.find('#')));
    if (w.empty()) {
      continue;
    }
    const auto where = "recovery rules line " + std::to_string(lineno);
    if (w.size() != 5 || w[3] != "->") {
      throw ConfigError(where + ": expected 'task kind mode -> action'");
    }
    task_from_name(w[0]);
    RecoveryRule r;
    r.task = w[0];
    r.kind = w[1];
    if (w[2] == "during") {
      r.mode = lang::Mode::During;
    } else if (w[2] == "on_completion") {
      r.mode = lang::Mode::OnCompletion;
    } else {
      throw ConfigError(where + ": bad mode '" + w[2] + "'");
    }
    bool found = false;
    for (auto a : kActions) {
      if (w[4] == action_name(a)) {
        r.action = a;
        found = true;
      }
    }
    if (!found) {
      throw ConfigError(where + ": unknown action '" + w[4] + "'");
    }
    if (table.match(r.task, r.kind, r.mode)) {
      throw ConfigError(where + ": duplicate rule");
    }
    table.rules.push_back(std::move(r));
  }
  return table;
}

RuleTable load_rules(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_rules(ss.str());
}

std::string_view default_rules_text()
{
  return kDefaultRules.substr(1);
}

const RuleTable & default_rules()
{
  static const RuleTable t = parse_rules(default_rules_text());
  return t;
}

}  // namespace cam::task
