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


#include <climits>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cam/harness.hpp"

namespace cam::harness
{

using nlohmann::json;

EpisodeSummary summarize(const std::vector<sim::LogEvent> & events)
{
  EpisodeSummary out;
  std::vector<mon::Marker> injections;
  std::vector<mon::Verdict> violations;
  for (const auto & e : events) {
    if (e.kind == "inject") {
      injections.push_back({e.tick, e.payload.value("what", "")});
    } else if (e.kind == "verdict") {
      const std::string outcome = e.payload.at("outcome");
      const std::string kind = e.payload.value("kind", "");
      ++out.verdicts[kind.empty() ? outcome : outcome + ":" + kind];
      // a designed halt (the sweep's stop signal) is neither a detection nor a false alarm
      if (outcome == "violation" && e.payload.value("recovery", "") != "stop") {
        mon::Verdict v;
        v.tick = e.tick;
        v.outcome = mon::Outcome::Violation;
        v.constraint_id = e.payload.value("constraint", -1);
        violations.push_back(v);
      }
    } else if (e.kind == "episode_end") {
      out.success = e.payload.at("success");
      out.aborted = e.payload.at("aborted");
      out.ticks = e.payload.at("ticks");
    }
  }
  const auto lat = mon::latency_report(injections, violations);
  out.injections = static_cast<int>(injections.size());
  for (const auto & m : lat.matched) {
    out.latencies.push_back(m.latency);
  }
  // a second violation caused by the same injection (say, the pen left unheld after the
  // holder was pushed) is a follow-on detection, not a false alarm
  const int first_injection = injections.empty() ? INT_MAX : injections.front().tick;
  for (const auto & v : violations) {
    out.false_positives += v.tick < first_injection;
  }
  return out;
}

ProportionCi normal_ci(int successes, int n, double z)
{
  if (n <= 0) {
    return {0.0, 1.0};
  }
  const double p = static_cast<double>(successes) / n;
  const double half = z * std::sqrt(p * (1.0 - p) / n);
  return {std::max(0.0, p - half), std::min(1.0, p + half)};
}

ZTest two_proportion_z(int successes_a, int n_a, int successes_b, int n_b)
{
  if (n_a <= 0 || n_b <= 0) {
    throw ConfigError("two_proportion_z: sample sizes must be positive");
  }
  const double pa = static_cast<double>(successes_a) / n_a;
  const double pb = static_cast<double>(successes_b) / n_b;
  const double pooled = static_cast<double>(successes_a + successes_b) / (n_a + n_b);
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / n_a + 1.0 / n_b));
  double z = 0.0;
  if (se > 0.0) {
    z = (pa - pb) / se;
  } else if (pa != pb) {
    z = pa > pb ? INFINITY : -INFINITY;
  }
  return {z, 0.5 * std::erfc(z / std::sqrt(2.0))};
}

MetricsReport aggregate(const std::string & name, const std::vector<EpisodeRun> & runs)
{
  MetricsReport rep;
  rep.name = name;
  struct Acc
  {
    long ticks = 0;
    long ticks_success = 0;
    long latency_sum = 0;
  };
  std::vector<Acc> acc;
  for (const auto & run : runs) {
    const std::string mode = sim::monitor_mode_name(run.mode);
    std::size_t i = 0;
    while (i < rep.cells.size() && !(rep.cells[i].cell == run.cell && rep.cells[i].mode == mode)) {
      ++i;
    }
    if (i == rep.cells.size()) {
      rep.cells.push_back({});
      rep.cells.back().cell = run.cell;
      rep.cells.back().mode = mode;
      acc.push_back({});
    }
    auto & c = rep.cells[i];
    auto & a = acc[i];
    const auto s = summarize(run.events);
    ++c.episodes;
    c.successes += s.success;
    c.aborted += s.aborted;
    a.ticks += s.ticks;
    if (s.success) {
      a.ticks_success += s.ticks;
    }
    for (int l : s.latencies) {
      a.latency_sum += l;
    }
    c.latency_samples += static_cast<int>(s.latencies.size());
    c.injections += s.injections;
    c.false_positives += s.false_positives;
    for (const auto & [k, n] : s.verdicts) {
      c.verdicts[k] += n;
    }
  }
  for (std::size_t i = 0; i < rep.cells.size(); ++i) {
    auto & c = rep.cells[i];
    c.success_rate = static_cast<double>(c.successes) / c.episodes;
    const auto ci = normal_ci(c.successes, c.episodes);
    c.ci_low = ci.low;
    c.ci_high = ci.high;
    c.mean_ticks = static_cast<double>(acc[i].ticks) / c.episodes;
    c.mean_ticks_success = c.successes ?
      static_cast<double>(acc[i].ticks_success) / c.successes : 0.0;
    c.mean_seconds = c.mean_ticks / sim::kTickHz;
    if (c.latency_samples > 0) {
      c.mean_latency = static_cast<double>(acc[i].latency_sum) / c.latency_samples;
    }
  }
  return rep;
}

json MetricsReport::to_json() const
{
  json cells_j = json::array();
  for (const auto & c : cells) {
    cells_j.push_back(
      {{"cell", c.cell}, {"mode", c.mode}, {"episodes", c.episodes},
        {"successes", c.successes}, {"aborted", c.aborted}, {"success_rate", c.success_rate},
        {"ci95", {c.ci_low, c.ci_high}}, {"mean_ticks", c.mean_ticks},
        {"mean_ticks_success", c.mean_ticks_success}, {"mean_seconds", c.mean_seconds},
        {"mean_latency_ticks", c.mean_latency ? json(*c.mean_latency) : json(nullptr)},
        {"latency_samples", c.latency_samples}, {"injections", c.injections},
        {"false_positives", c.false_positives}, {"verdicts", c.verdicts}});
  }
  return {{"name", name}, {"cells", cells_j}};
}

std::string MetricsReport::table() const
{
  std::ostringstream out;
  char line[256];
  out << "experiment " << name << "\n";
  std::snprintf(
    line, sizeof(line), "%-14s %-15s %5s %8s %17s %9s %8s %9s %4s\n", "cell", "mode", "n",
    "success", "95% ci", "ticks", "seconds", "latency", "fp");
  out << line;
  for (const auto & c : cells) {
    char lat[32] = "-";
    if (c.mean_latency) {
      std::snprintf(lat, sizeof(lat), "%.2f", *c.mean_latency);
    }
    std::snprintf(
      line, sizeof(line), "%-14s %-15s %5d %7.1f%% [%6.1f%%, %6.1f%%] %9.1f %8.2f %9s %4d\n",
      c.cell.c_str(), c.mode.c_str(), c.episodes, 100 * c.success_rate, 100 * c.ci_low,
      100 * c.ci_high, c.mean_ticks, c.mean_seconds, lat, c.false_positives);
    out << line;
  }
  return out.str();
}

const CellMetrics & MetricsReport::at(const std::string & cell, sim::MonitorMode mode) const
{
  for (const auto & c : cells) {
    if (c.cell == cell && c.mode == sim::monitor_mode_name(mode)) {
      return c;
    }
  }
  throw ConfigError("no cell '" + cell + "' in mode " + sim::monitor_mode_name(mode));
}

}  // namespace cam::harness
