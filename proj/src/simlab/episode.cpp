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


#include <map>

#include "cam/error.hpp"
#include "cam/simlab.hpp"

namespace cam::sim
{

namespace
{

using nlohmann::json;

std::uint64_t splitmix(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

json points_json(const elem::PointList & pts)
{
  json a = json::array();
  for (const auto & p : pts) {
    a.push_back({p.x(), p.y(), p.z()});
  }
  return a;
}

// Element points live rigidly in their owner's frame; the gripper owns -1.
struct Binding
{
  int owner = -1;
  elem::PointList local;
};

using LocalCache = std::map<std::pair<std::string, std::string>, elem::PointList>;

struct Extraction
{
  elem::ElementSet elems;
  std::vector<Binding> bindings;
  std::vector<std::string> fallbacks;
};

Extraction extract(
  const SimState & s, std::span<const CameraModel> cams, const task::Subgoal & sg,
  LocalCache & cache)
{
  Extraction out;
  out.elems.subgoal_id = sg.id;
  const auto views = render(s, cams);
  std::vector<DepthImage> depths;
  for (const auto & v : views) {
    depths.push_back(v.depth);
  }
  for (const auto & spec : sg.elements) {
    if (spec.entity == task::kEndEffector) {
      auto e = elem::end_effector_element({{"gripper", s.ee.translation}});
      out.elems.add(std::move(e));
      out.bindings.push_back({-1, {Vec3::Zero()}});
      continue;
    }
    const auto & o = s.object(spec.entity);
    const auto key = std::make_pair(spec.entity, spec.part);
    elem::ConstraintElement e;
    try {
      e = elem::extract_element(
        masks_for(s, views, spec.entity, spec.part, spec.type), depths, cams);
      elem::PointList local;
      for (const auto & p : e.points) {
        local.push_back(o.pose.inverse().apply(p));
      }
      cache[key] = local;
    } catch (const Error & err) {
      // occluded or degenerate this time: reuse the last good extraction
      auto it = cache.find(key);
      if (it == cache.end()) {
        throw;
      }
      e = elem::ConstraintElement{};
      e.type = spec.type;
      e.entity = spec.entity;
      e.part = spec.part;
      for (const auto & p : it->second) {
        e.points.push_back(o.pose.apply(p));
      }
      for (std::size_t i = 1; i < e.points.size(); ++i) {
        e.connections.emplace_back(static_cast<int>(i - 1), static_cast<int>(i));
      }
      if (spec.type.kind == elem::ElementKind::Surface && e.points.size() > 2) {
        e.connections.emplace_back(static_cast<int>(e.points.size() - 1), 0);
      }
      out.fallbacks.push_back(spec.entity + "/" + spec.part + ": " + err.what());
    }
    out.elems.add(std::move(e));
    elem::PointList local;
    for (const auto & p : out.elems.elements.back().points) {
      local.push_back(o.pose.inverse().apply(p));
    }
    out.bindings.push_back({o.id, std::move(local)});
  }
  return out;
}

class Runner
{
public:
  explicit Runner(const EpisodeConfig & cfg)
  : cfg_(cfg),
    rules_(cfg.rules ? *cfg.rules : task::default_rules()),
    kb_(cfg.kb ? *cfg.kb : lang::default_kb()),
    s_(build_scene(cfg.task, cfg.seed)),
    cams_(default_cameras()),
    planner_(cfg.task, rules_, kb_, cfg.max_retries),
    tracker_(tracker_config(cfg), cfg.history_capacity),
    monitor_(cfg.debounce)
  {
    arm_disturbances(s_, cfg.disturbances);
    for (const auto & o : s_.objects) {
      scene_.objects.push_back(o.name);
    }
  }

  EpisodeResult run()
  {
    if (cfg_.budget_ticks <= 0) {
      throw ConfigError("budget must be positive");
    }
    emit(
      0, "episode_start",
      {{"task", task::task_name(cfg_.task.name)}, {"mode", monitor_mode_name(cfg_.mode)},
        {"seed", cfg_.seed}, {"budget", cfg_.budget_ticks}});
    handle(planner_.plan_next(scene_, std::nullopt, std::nullopt));
    while (!ended_ && s_.tick < cfg_.budget_ticks) {
      step(s_, task::Control::Continue);
      flush_log();
      if (cfg_.mode == MonitorMode::Off) {
        if (s_.motion_finished()) {
          handle(planner_.plan_next(scene_, cur_->id, std::nullopt));
        }
        continue;
      }
      tracker_.step(truth(), s_.tick);
      const auto v = monitor_.next_verdict({s_.tick, s_.motion_finished(), &tracker_.tracks()});
      if (v.outcome != mon::Outcome::Violation && v.outcome != mon::Outcome::SubgoalComplete) {
        continue;
      }
      if (task::halt_policy_hook(v, false) == task::Control::HaltAndReplan) {
        monitor_.acknowledge();
        violated(v);
      } else {
        log_verdict(v);
        handle(planner_.plan_next(scene_, cur_->id, std::nullopt));
      }
    }
    res_.ticks = ended_ ? end_tick_ : cfg_.budget_ticks;
    if (!ended_) {
      res_.end_reason = "budget exhausted";
      emit(s_.tick, "plan_end", {{"status", "budget"}});
    }
    // the world keeps going until the budget ends; success is judged then
    while (s_.tick < cfg_.budget_ticks) {
      step(s_, task::Control::Done);
    }
    flush_log();
    res_.success = !res_.aborted && oracle_success(s_, cfg_.task);
    json end{{"success", res_.success}, {"ticks", res_.ticks}, {"aborted", res_.aborted},
      {"reason", res_.end_reason}};
    if (cfg_.task.name == task::TaskName::SweepHalf) {
      end["region_count"] = sweep_count(s_, cfg_.task);
    }
    emit(s_.tick, "episode_end", std::move(end));
    return std::move(res_);
  }

private:
  static mon::TrackerConfig tracker_config(const EpisodeConfig & cfg)
  {
    auto t = cfg.tracker;
    t.seed = splitmix(cfg.seed ^ splitmix(t.seed + 0x747261636bULL));
    return t;
  }

  void emit(int tick, std::string kind, json payload)
  {
    res_.events.push_back({tick, std::move(kind), std::move(payload)});
  }

  void flush_log()
  {
    for (; logged_ < s_.log.size(); ++logged_) {
      const auto & e = s_.log[logged_];
      if (e.kind == "inject") {
        res_.injections.push_back({e.tick, e.detail});
        emit(e.tick, "inject", {{"what", e.detail}});
      } else {
        emit(e.tick, "sim", {{"event", e.kind}, {"detail", e.detail}});
      }
    }
  }

  std::string kind_of(int constraint_id) const
  {
    for (const auto & p : monitor_.programs()) {
      if (p.id == constraint_id) {
        return p.name;
      }
    }
    for (const auto & p : programs_seen_) {
      if (p.id == constraint_id) {
        return p.name;
      }
    }
    return {};
  }

  void log_verdict(const mon::Verdict & v)
  {
    res_.verdicts.push_back(v);
    const auto kind = kind_of(v.constraint_id);
    json j{{"outcome", mon::outcome_name(v.outcome)}, {"constraint", v.constraint_id},
      {"kind", kind}, {"mode", lang::mode_name(v.mode)}, {"reason", v.reason},
      {"subgoal", cur_->id}};
    if (v.outcome == mon::Outcome::Violation) {
      const auto * r = rules_.match(task::task_name(cfg_.task.name), kind, v.mode);
      j["recovery"] = r ? task::action_name(r->action) : "none";
    }
    emit(v.tick, "verdict", std::move(j));
  }

  void violated(const mon::Verdict & v)
  {
    log_verdict(v);
    task::FailureFeedback f{cur_->id, v.reason, v.constraint_id, kind_of(v.constraint_id), v.mode};
    handle(planner_.plan_next(scene_, cur_->id, f));
  }

  std::map<int, elem::PointList> truth() const
  {
    std::map<int, elem::PointList> out;
    for (std::size_t i = 0; i < bindings_.size(); ++i) {
      const auto & b = bindings_[i];
      elem::PointList pts;
      if (b.owner < 0) {
        pts.push_back(s_.ee.translation);
      } else {
        const auto & pose = s_.objects[static_cast<std::size_t>(b.owner)].pose;
        for (const auto & p : b.local) {
          pts.push_back(pose.apply(p));
        }
      }
      out.emplace(static_cast<int>(i), std::move(pts));
    }
    return out;
  }

  void end(bool aborted, const std::string & reason)
  {
    ended_ = true;
    end_tick_ = s_.tick;
    res_.aborted = aborted;
    res_.end_reason = reason;
    emit(
      s_.tick, "plan_end", {{"status", aborted ? "aborted" : "done"}, {"reason", reason}});
  }

  void handle(task::PlanResult r)
  {
    if (std::holds_alternative<task::TaskDone>(r)) {
      end(false, "done");
      return;
    }
    if (auto * a = std::get_if<task::TaskAborted>(&r)) {
      end(true, a->reason);
      return;
    }
    cur_ = std::get<task::Subgoal>(std::move(r));
    start_subgoal();
  }

  bool wanted(lang::Mode m) const
  {
    switch (cfg_.mode) {
      case MonitorMode::Off: return false;
      case MonitorMode::ReactiveOnly: return m == lang::Mode::OnCompletion;
      case MonitorMode::ProactiveOnly: return m == lang::Mode::During;
      case MonitorMode::Full: return true;
    }
    return false;
  }

  struct BuildFailure
  {
    std::string why;
    // a during constraint that is already false: reported like a violation
    std::optional<mon::Verdict> at_start;
  };

  std::optional<BuildFailure> build_programs(
    const task::EmittedConstraints & em, std::vector<lang::MonitorProgram> & out)
  {
    out.clear();
    for (const auto * list : {&em.during, &em.completion}) {
      for (const auto & src : *list) {
        auto p = lang::parse(src);
        if (!wanted(p.mode)) {
          continue;
        }
        p.id = next_program_++;
        const auto errs = lang::typecheck(p, elems_);
        if (!errs.empty()) {
          return BuildFailure{p.name + ": " + errs.front().message, std::nullopt};
        }
        const lang::EvalContext ctx{s_.tick, &elems_, &tracker_.tracks()};
        if (auto fail = lang::whitebox_validate(p, ctx)) {
          BuildFailure f{p.name + " at " + fail->path + ": " + fail->error, std::nullopt};
          const auto now = lang::evaluate(p, ctx);
          if (p.mode == lang::Mode::During && !now.satisfied) {
            f.at_start = mon::Verdict{
              s_.tick, mon::Outcome::Violation, p.id, p.mode, now.reason.value_or(fail->error)};
            programs_seen_.push_back(p);
          }
          return f;
        }
        out.push_back(std::move(p));
      }
    }
    return std::nullopt;
  }

  void start_subgoal()
  {
    const auto & sg = *cur_;
    emit(
      s_.tick, "subgoal",
      {{"id", sg.id}, {"text", sg.text}, {"action", sg.action}, {"recovery", sg.recovery},
        {"nominal_index", sg.nominal_index}, {"during", sg.during_sources},
        {"completion", sg.completion_sources}});
    start_script(s_, make_script(s_, cfg_.task, sg));
    flush_log();
    if (cfg_.mode == MonitorMode::Off) {
      return;
    }
    Extraction ex;
    try {
      ex = extract(s_, cams_, sg, cache_);
    } catch (const Error & err) {
      end(true, std::string("element extraction failed: ") + err.what());
      return;
    }
    elems_ = std::move(ex.elems);
    bindings_ = std::move(ex.bindings);
    emit(s_.tick, "elements", {{"subgoal", sg.id},
        {"elements", elements_json(elems_, cfg_.record_elements)}, {"fallbacks", ex.fallbacks}});

    tracker_.start(elems_, s_.tick);
    std::vector<lang::MonitorProgram> programs;
    auto fail = build_programs({sg.during_sources, sg.completion_sources}, programs);
    if (fail) {
      ++res_.validation_failures;
      emit(s_.tick, "validation", {{"subgoal", sg.id}, {"error", fail->why}, {"relaxed", false}});
      fail = build_programs(planner_.relaxed(sg), programs);
    }
    if (!fail) {
      monitor_.load(std::move(programs), elems_, cfg_.history_capacity);
      return;
    }
    ++res_.validation_failures;
    emit(s_.tick, "validation", {{"subgoal", sg.id}, {"error", fail->why}, {"relaxed", true}});
    if (!fail->at_start) {
      end(true, "constraint validation failed: " + fail->why);
      return;
    }
    // the subgoal cannot even begin: recover as if it had been violated
    violated(*fail->at_start);
  }

  const EpisodeConfig & cfg_;
  const task::RuleTable & rules_;
  const lang::ThresholdKB & kb_;
  SimState s_;
  std::vector<CameraModel> cams_;
  task::Planner planner_;
  mon::Tracker tracker_;
  mon::Monitor monitor_;
  task::SceneSummary scene_;
  EpisodeResult res_;
  std::optional<task::Subgoal> cur_;
  elem::ElementSet elems_;
  std::vector<Binding> bindings_;
  LocalCache cache_;
  std::size_t logged_ = 0;
  std::vector<lang::MonitorProgram> programs_seen_;
  int next_program_ = 0;
  bool ended_ = false;
  int end_tick_ = 0;
};

}  // namespace

const char * monitor_mode_name(MonitorMode m)
{
  switch (m) {
    case MonitorMode::Off: return "off";
    case MonitorMode::ReactiveOnly: return "reactive_only";
    case MonitorMode::ProactiveOnly: return "proactive_only";
    case MonitorMode::Full: return "full";
  }
  return "?";
}

MonitorMode monitor_mode_from_name(const std::string & s)
{
  for (auto m : {MonitorMode::Off, MonitorMode::ReactiveOnly, MonitorMode::ProactiveOnly,
      MonitorMode::Full})
  {
    if (s == monitor_mode_name(m)) {
      return m;
    }
  }
  throw ConfigError("unknown monitor mode '" + s + "'");
}

int default_budget(task::TaskName t)
{
  switch (t) {
    case task::TaskName::StackInOrder: return 1400;
    case task::TaskName::SweepHalf: return 600;
    default: return 1200;
  }
}

EpisodeResult run_episode(const EpisodeConfig & cfg)
{
  return Runner(cfg).run();
}

json elements_json(const elem::ElementSet & elems, bool with_points)
{
  json list = json::array();
  for (const auto & e : elems.elements) {
    json j{{"id", e.id}, {"entity", e.entity}, {"part", e.part}, {"type", e.type.to_string()}};
    if (with_points) {
      j["points"] = points_json(e.points);
    }
    list.push_back(std::move(j));
  }
  return list;
}

elem::ElementSet first_subgoal_elements(const task::TaskTemplate & tmpl, std::uint64_t seed)
{
  auto s = build_scene(tmpl, seed);
  task::Planner planner(tmpl, task::default_rules(), lang::default_kb());
  auto r = planner.plan_next({}, std::nullopt, std::nullopt);
  LocalCache cache;
  const auto cams = default_cameras();
  return extract(s, cams, std::get<task::Subgoal>(r), cache).elems;
}

}  // namespace cam::sim
