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

#include "cam/monitor.hpp"

#include <algorithm>

namespace cam::mon
{

void DebouncePolicy::validate() const
{
  if (k < 1 || h < 1) {
    throw ConfigError("debounce K and H must be at least 1");
  }
}

const char * outcome_name(Outcome o)
{
  switch (o) {
    case Outcome::Ok: return "ok";
    case Outcome::Violation: return "violation";
    case Outcome::SubgoalComplete: return "subgoal_complete";
    case Outcome::NotYet: return "not_yet";
  }
  return "?";
}

Monitor::Monitor(DebouncePolicy policy)
: policy_(policy)
{
  policy_.validate();
}

void Monitor::load(
  std::vector<lang::MonitorProgram> programs, const elem::ElementSet & elems,
  std::size_t history_capacity)
{
  for (const auto & p : programs) {
    if (static_cast<std::size_t>(p.max_lag()) >= history_capacity) {
      throw ConfigError(
        "program '" + p.name + "' reads " + std::to_string(p.max_lag()) +
        " ticks back but history holds " + std::to_string(history_capacity));
    }
  }
  std::stable_sort(
    programs.begin(), programs.end(), [](const auto & a, const auto & b) {return a.id < b.id;});
  programs_ = std::move(programs);
  false_run_.assign(programs_.size(), 0);
  elems_ = elems;
  latched_ = false;
  settle_ticks_ = 0;
  hold_run_ = 0;
}

Verdict Monitor::monitor_tick(const lang::HistoryView & history, int tick)
{
  Verdict v{tick, Outcome::Ok, -1, lang::Mode::During, {}};
  if (latched_) {
    return v;
  }
  const lang::EvalContext ctx{tick, &elems_, &history};
  std::optional<std::size_t> winner;
  std::string reason;
  for (std::size_t i = 0; i < programs_.size(); ++i) {
    const auto & p = programs_[i];
    if (p.mode != lang::Mode::During) {
      continue;
    }
    auto r = lang::evaluate(p, ctx);
    false_run_[i] = r.satisfied ? 0 : false_run_[i] + 1;
    if (!winner && false_run_[i] >= policy_.k) {
      winner = i;
      reason = r.reason.value_or("");
    }
  }
  if (winner) {
    v.outcome = Outcome::Violation;
    v.constraint_id = programs_[*winner].id;
    v.reason = std::move(reason);
    latched_ = true;
    std::fill(false_run_.begin(), false_run_.end(), 0);
  }
  return v;
}

Verdict Monitor::check_completion(const lang::HistoryView & history, int tick)
{
  Verdict v{tick, Outcome::NotYet, -1, lang::Mode::OnCompletion, {}};
  if (latched_) {
    v.outcome = Outcome::Ok;
    return v;
  }
  ++settle_ticks_;
  const lang::EvalContext ctx{tick, &elems_, &history};
  std::optional<std::size_t> first_false;
  std::string reason;
  for (std::size_t i = 0; i < programs_.size(); ++i) {
    if (programs_[i].mode != lang::Mode::OnCompletion) {
      continue;
    }
    auto r = lang::evaluate(programs_[i], ctx);
    if (!r.satisfied && !first_false) {
      first_false = i;
      reason = r.reason.value_or("");
    }
  }
  hold_run_ = first_false ? 0 : hold_run_ + 1;
  if (hold_run_ >= policy_.h) {
    v.outcome = Outcome::SubgoalComplete;
  } else if (first_false && settle_ticks_ >= 3 * policy_.h) {
    v.outcome = Outcome::Violation;
    v.constraint_id = programs_[*first_false].id;
    v.reason = std::move(reason);
    latched_ = true;
  }
  return v;
}

Verdict Monitor::next_verdict(const TickState & state)
{
  if (!state.history) {
    throw ConfigError("tick state has no history");
  }
  if (!state.motion_finished) {
    return monitor_tick(*state.history, state.tick);
  }
  Verdict v = check_completion(*state.history, state.tick);
  if (v.outcome == Outcome::NotYet) {
    v.outcome = Outcome::Ok;
  }
  return v;
}

void Monitor::acknowledge()
{
  latched_ = false;
  std::fill(false_run_.begin(), false_run_.end(), 0);
  settle_ticks_ = 0;
  hold_run_ = 0;
}

}  // namespace cam::mon
