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
#include <stdexcept>

#include "cam/error.hpp"
#include "cam/taskgen.hpp"

namespace cam::task
{

const char * control_name(Control c)
{
  switch (c) {
    case Control::Continue: return "CONTINUE";
    case Control::HaltAndReplan: return "HALT_AND_REPLAN";
    case Control::Done: return "DONE";
  }
  return "?";
}

Control halt_policy_hook(const mon::Verdict & v, bool last_subgoal)
{
  if (v.outcome == mon::Outcome::Violation) {
    return Control::HaltAndReplan;
  }
  if (v.outcome == mon::Outcome::SubgoalComplete && last_subgoal) {
    return Control::Done;
  }
  return Control::Continue;
}

Planner::Planner(
  TaskTemplate tmpl, const RuleTable & rules, const lang::ThresholdKB & kb, int max_retries)
: tmpl_(std::move(tmpl)), rules_(rules), kb_(kb), max_retries_(max_retries)
{
  if (max_retries < 0) {
    throw ConfigError("max_retries must be non-negative");
  }
  nominal_ = nominal_sequence(tmpl_);
}

int Planner::retries_for(int nominal_index) const
{
  auto it = retries_.find(nominal_index);
  return it == retries_.end() ? 0 : it->second;
}

EmittedConstraints Planner::relaxed(const Subgoal & sg) const
{
  return emit_constraints(sg, tmpl_, kb_, 1.5);
}

Subgoal Planner::instantiate(Subgoal sg, bool recovery)
{
  sg.id = next_id_++;
  sg.recovery = recovery;
  auto e = emit_constraints(sg, tmpl_, kb_);
  sg.during_sources = std::move(e.during);
  sg.completion_sources = std::move(e.completion);
  return sg;
}

PlanResult Planner::advance()
{
  if (current_ && current_->terminal) {
    pending_.clear();
    cursor_ = nominal_.size();
  }
  if (!pending_.empty()) {
    current_ = pending_.front();
    pending_.pop_front();
    return *current_;
  }
  if (cursor_ < nominal_.size()) {
    current_ = instantiate(nominal_[cursor_++], false);
    return *current_;
  }
  finished_ = true;
  current_.reset();
  return TaskDone{};
}

PlanResult Planner::plan_next(
  const SceneSummary & scene, std::optional<int> l_pre, const std::optional<FailureFeedback> & f_pre)
{
  if (!scene.objects.empty()) {
    for (const auto & o : tmpl_.objects) {
      if (std::find(scene.objects.begin(), scene.objects.end(), o) == scene.objects.end()) {
        throw ConfigError("template object '" + o + "' is not in the scene");
      }
    }
  }
  if (finished_) {
    throw std::logic_error("plan_next called after the plan ended");
  }
  if (!started_) {
    if (l_pre || f_pre) {
      throw std::logic_error("first plan_next call takes no previous subgoal");
    }
    started_ = true;
    return advance();
  }
  if (!l_pre || !current_ || *l_pre != current_->id) {
    throw std::logic_error("l_pre does not name the current subgoal");
  }
  if (!f_pre) {
    return advance();
  }
  if (f_pre->reason.empty()) {
    throw std::invalid_argument("failure feedback needs a reason");
  }

  const Subgoal failed = *current_;
  const auto * rule = rules_.match(task_name(tmpl_.name), f_pre->constraint_kind, f_pre->mode);
  const auto abort = [&](std::string why) -> PlanResult {
      finished_ = true;
      current_.reset();
      return TaskAborted{std::move(why)};
    };
  if (!rule) {
    return abort(
      "no recovery rule for " + f_pre->constraint_kind + " (" +
      lang::mode_name(f_pre->mode) + "): " + f_pre->reason);
  }
  if (rule->action == RecoveryAction::Abort) {
    return abort(f_pre->reason);
  }
  const int n = failed.nominal_index;
  if (++retries_[n] > max_retries_) {
    return abort("retry limit reached for '" + nominal_[n].text + "': " + f_pre->reason);
  }

  std::vector<Subgoal> prefix;
  std::size_t resume = static_cast<std::size_t>(n);
  switch (rule->action) {
    case RecoveryAction::Repick: {
        std::size_t p = 0;
        while (p < nominal_.size() &&
          !(nominal_[p].action == "pick" && nominal_[p].object == failed.object))
        {
          ++p;
        }
        if (p == nominal_.size()) {
          return abort("nothing to re-pick for '" + failed.text + "'");
        }
        auto sg = make_subgoal(tmpl_, "pick", failed.object, "");
        sg.nominal_index = static_cast<int>(p);
        sg.text = "re-pick " + failed.object + (tmpl_.name == TaskName::StackInOrder ? " block" : "");
        prefix.push_back(std::move(sg));
        resume = p + 1;
        break;
      }
    case RecoveryAction::Relevel: {
        auto sg = make_subgoal(tmpl_, "relevel", failed.object, "");
        sg.nominal_index = n;
        prefix.push_back(std::move(sg));
        break;
      }
    case RecoveryAction::Realign:
      resume = n > 0 ? static_cast<std::size_t>(n - 1) : 0;
      break;
    case RecoveryAction::Retry:
      if (failed.recovery) {
        Subgoal again = failed;
        prefix.push_back(std::move(again));
      }
      break;
    case RecoveryAction::Stop: {
        auto sg = make_subgoal(tmpl_, "retract", failed.object, "");
        sg.nominal_index = n;
        prefix.push_back(std::move(sg));
        resume = cursor_ = nominal_.size();
        break;
      }
    case RecoveryAction::Abort:
      break;
  }

  pending_.clear();
  for (auto & sg : prefix) {
    pending_.push_back(instantiate(std::move(sg), true));
  }
  for (std::size_t k = resume; k < cursor_; ++k) {
    pending_.push_back(instantiate(nominal_[k], true));
  }
  current_ = pending_.front();
  pending_.pop_front();
  return *current_;
}

}  // namespace cam::task
