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
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "cam/harness.hpp"

namespace cam::harness
{

namespace
{

std::string trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string & s, char sep)
{
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    out.push_back(trim(cur));
  }
  return out;
}

double number(const std::string & s, const std::string & what)
{
  double v = 0;
  const auto * end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) {
    throw ConfigError(what + ": '" + s + "' is not a number");
  }
  return v;
}

long integer(const std::string & s, const std::string & what)
{
  long v = 0;
  const auto * end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) {
    throw ConfigError(what + ": '" + s + "' is not an integer");
  }
  return v;
}

// Number with an optional unit suffix, converted to SI (m, rad).
double quantity(const std::string & s, const std::string & what)
{
  static const std::pair<const char *, double> units[] = {
    {"mm", 1e-3}, {"cm", 1e-2}, {"m", 1.0}, {"deg", std::numbers::pi / 180}, {"rad", 1.0}};
  for (const auto & [u, scale] : units) {
    const std::string_view unit(u);
    if (s.size() > unit.size() && s.ends_with(unit)) {
      const auto head = s.substr(0, s.size() - unit.size());
      if (!head.empty() && (std::isdigit(static_cast<unsigned char>(head.back())) ||
        head.back() == '.'))
      {
        return number(head, what) * scale;
      }
    }
  }
  return number(s, what);
}

// "a" or "a..b"
std::pair<double, double> range(const std::string & s, const std::string & what)
{
  const auto dots = s.find("..");
  if (dots == std::string::npos) {
    const double v = quantity(s, what);
    return {v, -1.0};
  }
  const double lo = quantity(s.substr(0, dots), what);
  const double hi = quantity(s.substr(dots + 2), what);
  if (hi < lo) {
    throw ConfigError(what + ": empty range '" + s + "'");
  }
  return {lo, hi};
}

Eigen::Vector3d axis_value(const std::string & s)
{
  if (s == "random") {
    return Eigen::Vector3d::Zero();
  }
  const bool neg = s.starts_with('-');
  const std::string a = neg ? s.substr(1) : s;
  Eigen::Vector3d v;
  if (a == "x") {
    v = Eigen::Vector3d::UnitX();
  } else if (a == "y") {
    v = Eigen::Vector3d::UnitY();
  } else if (a == "z") {
    v = Eigen::Vector3d::UnitZ();
  } else {
    const auto parts = split(s, ',');
    if (parts.size() != 3) {
      throw ConfigError("axis: expected x, y, z, random or three numbers, got '" + s + "'");
    }
    v = Eigen::Vector3d(number(parts[0], "axis"), number(parts[1], "axis"), number(parts[2], "axis"));
    if (v.norm() < 1e-12) {
      throw ConfigError("axis: zero vector (use 'random')");
    }
    return v.normalized();
  }
  return neg ? Eigen::Vector3d(-v) : v;
}

bool boolean(const std::string & s, const std::string & what)
{
  if (s == "true" || s == "yes" || s == "1") {
    return true;
  }
  if (s == "false" || s == "no" || s == "0") {
    return false;
  }
  throw ConfigError(what + ": expected true or false, got '" + s + "'");
}

}  // namespace

std::vector<sim::Disturbance> parse_disturbances(const std::string & text)
{
  std::vector<sim::Disturbance> out;
  for (const auto & item : split(text, ';')) {
    if (item.empty()) {
      continue;
    }
    std::istringstream words(item);
    std::string kind;
    words >> kind;
    sim::Disturbance d;
    d.kind = sim::disturbance_from_name(kind);
    std::string kv;
    while (words >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == kv.size()) {
        throw ConfigError(kind + ": expected key=value, got '" + kv + "'");
      }
      const std::string key = kv.substr(0, eq);
      const std::string val = kv.substr(eq + 1);
      const std::string what = kind + "." + key;
      if (key == "p") {
        d.p = number(val, what);
      } else if (key == "q") {
        d.q = quantity(val, what);
      } else if (key == "object") {
        d.object = val;
      } else if (key == "distance") {
        std::tie(d.distance, d.distance_max) = range(val, what);
      } else if (key == "angle") {
        std::tie(d.angle, d.angle_max) = range(val, what);
      } else if (key == "axis") {
        d.axis = axis_value(val);
      } else if (key == "at") {
        d.trigger.tick = static_cast<int>(integer(val, what));
      } else if (key == "after") {
        // event[+offset[..max]]
        const auto plus = val.rfind('+');
        d.trigger.event = plus == std::string::npos ? val : val.substr(0, plus);
        if (plus != std::string::npos) {
          const std::string off = val.substr(plus + 1);
          const auto dots = off.find("..");
          d.trigger.offset = static_cast<int>(integer(off.substr(0, dots), what));
          if (dots != std::string::npos) {
            d.trigger.offset_max = static_cast<int>(integer(off.substr(dots + 2), what));
            if (d.trigger.offset_max < d.trigger.offset) {
              throw ConfigError(what + ": empty offset range '" + off + "'");
            }
          }
        }
        if (d.trigger.event.empty()) {
          throw ConfigError(what + ": missing event name");
        }
      } else {
        throw ConfigError(kind + ": unknown key '" + key + "'");
      }
    }
    d.validate();
    out.push_back(std::move(d));
  }
  return out;
}

void ExperimentSpec::validate() const
{
  if (episodes < 1) {
    throw ConfigError("episodes must be at least 1");
  }
  if (modes.empty()) {
    throw ConfigError("at least one monitor mode is required");
  }
  if (budget_ticks < 0) {
    throw ConfigError("budget must be positive");
  }
  if (threads < 1) {
    throw ConfigError("threads must be at least 1");
  }
  if (max_retries < 0) {
    throw ConfigError("max_retries must be non-negative");
  }
  tracker.validate();
  debounce.validate();
  std::set<std::string> names;
  for (const auto & c : cells) {
    if (c.name.empty() || !names.insert(c.name).second) {
      throw ConfigError("cell names must be unique and non-empty ('" + c.name + "')");
    }
    for (const auto & d : c.disturbances) {
      d.validate();
    }
  }
}

std::vector<Cell> ExperimentSpec::grid_cells() const
{
  if (cells.empty()) {
    return {{"clean", {}}};
  }
  return cells;
}

ExperimentSpec parse_spec(const std::string & text)
{
  ExperimentSpec spec;
  spec.source = text;
  std::optional<task::TaskName> task;
  std::map<std::string, double> params;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    try {
      if (key != "cell" && !key.starts_with("param.") && !seen.insert(key).second) {
        throw ConfigError("duplicate key '" + key + "'");
      }
      if (key == "name") {
        spec.name = val;
      } else if (key == "task") {
        task = task::task_from_name(val);
      } else if (key.starts_with("param.")) {
        if (!params.emplace(key.substr(6), number(val, key)).second) {
          throw ConfigError("duplicate key '" + key + "'");
        }
      } else if (key == "modes") {
        spec.modes.clear();
        for (const auto & m : split(val, ',')) {
          spec.modes.push_back(sim::monitor_mode_from_name(m));
        }
      } else if (key == "episodes") {
        spec.episodes = static_cast<int>(integer(val, key));
      } else if (key == "seed") {
        spec.seed_base = static_cast<std::uint64_t>(integer(val, key));
      } else if (key == "budget") {
        spec.budget_ticks = static_cast<int>(integer(val, key));
      } else if (key == "tracker.sigma") {
        spec.tracker.sigma = quantity(val, key);
      } else if (key == "tracker.dropout") {
        spec.tracker.dropout = number(val, key);
      } else if (key == "tracker.resync") {
        spec.tracker.resync_interval = static_cast<int>(integer(val, key));
      } else if (key == "tracker.seed") {
        spec.tracker.seed = static_cast<std::uint64_t>(integer(val, key));
      } else if (key == "debounce.k") {
        spec.debounce.k = static_cast<int>(integer(val, key));
      } else if (key == "debounce.h") {
        spec.debounce.h = static_cast<int>(integer(val, key));
      } else if (key == "max_retries") {
        spec.max_retries = static_cast<int>(integer(val, key));
      } else if (key == "threads") {
        spec.threads = static_cast<int>(integer(val, key));
      } else if (key == "element_points") {
        spec.element_points = boolean(val, key);
      } else if (key == "cell") {
        const auto colon = val.find(':');
        if (colon == std::string::npos) {
          throw ConfigError("cell: expected 'name : disturbances'");
        }
        spec.cells.push_back({trim(val.substr(0, colon)), parse_disturbances(val.substr(colon + 1))});
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } catch (const ConfigError & e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!task) {
    throw ConfigError("spec has no 'task'");
  }
  spec.task = task::default_template(*task);
  for (const auto & [k, v] : params) {
    if (!spec.task.params.count(k)) {
      throw ConfigError("task " + std::string(task::task_name(*task)) + " has no parameter '" +
              k + "'");
    }
    spec.task.params[k] = v;
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_spec(const std::string & path)
{
  std::ifstream f(path);
  if (!f) {
    throw ConfigError("cannot read spec '" + path + "'");
  }
  std::stringstream ss;
  ss << f.rdbuf();
  auto spec = parse_spec(ss.str());
  if (const char * env = std::getenv("CAM_SEED"); env && *env) {
    try {
      spec.seed_base = static_cast<std::uint64_t>(integer(env, "CAM_SEED"));
    } catch (const ConfigError & e) {
      throw ConfigError(std::string(e.what()));
    }
  }
  return spec;
}

sim::EpisodeConfig episode_config(
  const ExperimentSpec & spec, const Cell & cell, sim::MonitorMode mode, int index)
{
  sim::EpisodeConfig c;
  c.task = spec.task;
  c.disturbances = cell.disturbances;
  c.mode = mode;
  c.seed = spec.seed_base + static_cast<std::uint64_t>(index);
  c.budget_ticks = spec.budget_ticks > 0 ? spec.budget_ticks : sim::default_budget(spec.task.name);
  c.tracker = spec.tracker;
  c.debounce = spec.debounce;
  c.max_retries = spec.max_retries;
  c.record_elements = spec.element_points;
  return c;
}

ExperimentResult run_experiment(const ExperimentSpec & spec, const Progress & progress)
{
  spec.validate();
  const auto cells = spec.grid_cells();
  struct Job
  {
    std::size_t cell;
    sim::MonitorMode mode;
    int index;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (auto m : spec.modes) {
      for (int i = 0; i < spec.episodes; ++i) {
        jobs.push_back({c, m, i});
      }
    }
  }
  ExperimentResult res;
  res.runs.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  int done = 0;
  std::exception_ptr failure;
  auto worker = [&] {
      for (std::size_t j = next++; j < jobs.size(); j = next++) {
        const auto & job = jobs[j];
        try {
          const auto cfg = episode_config(spec, cells[job.cell], job.mode, job.index);
          auto r = sim::run_episode(cfg);
          res.runs[j] = {cells[job.cell].name, job.mode, cfg.seed, std::move(r.events)};
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) {
            failure = std::current_exception();
          }
          next = jobs.size();
          return;
        }
        std::lock_guard lock(mu);
        ++done;
        if (progress) {
          progress(done, static_cast<int>(jobs.size()));
        }
      }
    };
  const int n = std::min<int>(spec.threads, static_cast<int>(jobs.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) {
      pool.emplace_back(worker);
    }
    for (auto & t : pool) {
      t.join();
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  res.report = aggregate(spec.name, res.runs);
  return res;
}

}  // namespace cam::harness
