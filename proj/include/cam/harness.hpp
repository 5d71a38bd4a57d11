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

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cam/error.hpp"
#include "cam/simlab.hpp"

namespace cam::harness
{

class TruncatedLog : public Error
{
public:
  using Error::Error;
};

class ChecksumMismatch : public Error
{
public:
  using Error::Error;
};

class SchemaMismatch : public Error
{
public:
  using Error::Error;
};

inline constexpr const char * kLogSchema = "camctl-log/1";

/// One column of the disturbance matrix.
struct Cell
{
  std::string name;
  std::vector<sim::Disturbance> disturbances;
};

struct ExperimentSpec
{
  std::string name = "experiment";
  task::TaskTemplate task;
  std::vector<Cell> cells;  // empty means a single disturbance-free cell
  std::vector<sim::MonitorMode> modes{sim::MonitorMode::Full};
  int episodes = 1;
  std::uint64_t seed_base = 0;
  int budget_ticks = 0;  // 0 picks the task default
  mon::TrackerConfig tracker;
  mon::DebouncePolicy debounce;
  int max_retries = 5;
  int threads = 1;
  bool element_points = false;
  std::string source;  // spec text as read, kept in the log header

  void validate() const;
  std::vector<Cell> grid_cells() const;
};

/// `key = value` lines; see specs/README for the schema. Throws ConfigError.
ExperimentSpec parse_spec(const std::string & text);

/// Reads and parses a spec file; CAM_SEED, when set, replaces the seed base.
ExperimentSpec load_spec(const std::string & path);

/// `kind key=value ...` items separated by ';'.
std::vector<sim::Disturbance> parse_disturbances(const std::string & text);

struct EpisodeRun
{
  std::string cell;
  sim::MonitorMode mode = sim::MonitorMode::Full;
  std::uint64_t seed = 0;
  std::vector<sim::LogEvent> events;
};

/// What one episode contributes to the metrics; derived from events alone.
struct EpisodeSummary
{
  bool success = false;
  bool aborted = false;
  int ticks = 0;
  int injections = 0;
  std::vector<int> latencies;  // injection to the first violation after it
  int false_positives = 0;     // violations with no injection before them
  std::map<std::string, int> verdicts;
};

EpisodeSummary summarize(const std::vector<sim::LogEvent> & events);

struct CellMetrics
{
  std::string cell;
  std::string mode;
  int episodes = 0;
  int successes = 0;
  int aborted = 0;
  double success_rate = 0.0;
  double ci_low = 0.0;   // 95% normal approximation, clamped to [0, 1]
  double ci_high = 0.0;
  double mean_ticks = 0.0;
  double mean_ticks_success = 0.0;  // 0 when nothing succeeded
  double mean_seconds = 0.0;
  std::optional<double> mean_latency;
  int latency_samples = 0;
  int injections = 0;
  int false_positives = 0;
  std::map<std::string, int> verdicts;
};

struct MetricsReport
{
  std::string name;
  std::vector<CellMetrics> cells;

  nlohmann::json to_json() const;
  std::string table() const;
  const CellMetrics & at(const std::string & cell, sim::MonitorMode mode) const;
};

/// Cells appear in first-seen order of (cell, mode).
MetricsReport aggregate(const std::string & name, const std::vector<EpisodeRun> & runs);

struct ProportionCi
{
  double low;
  double high;
};

ProportionCi normal_ci(int successes, int n, double z = 1.959963984540054);

struct ZTest
{
  double z;
  double p_one_sided;  // P(Z >= z) under equal proportions
};

/// Tests whether proportion a exceeds proportion b (pooled variance).
ZTest two_proportion_z(int successes_a, int n_a, int successes_b, int n_b);

using Progress = std::function<void(int done, int total)>;

struct ExperimentResult
{
  std::vector<EpisodeRun> runs;
  MetricsReport report;
};

/// Runs the grid cells x modes x episodes. Episode seeds are base + index, so
/// results do not depend on execution order or thread count.
ExperimentResult run_experiment(const ExperimentSpec & spec, const Progress & progress = {});

sim::EpisodeConfig episode_config(
  const ExperimentSpec & spec, const Cell & cell, sim::MonitorMode mode, int index);

// ---- monitor benchmark ----

struct BenchConfig
{
  int elements = 16;  // surfaces, lines and points in equal thirds
  int programs = 8;
  int ticks = 10000;
  std::uint64_t seed = 0;
};

struct BenchResult
{
  int ticks = 0;
  int elements = 0;
  int programs = 0;
  double median_us = 0.0;
  double p99_us = 0.0;
  double mean_us = 0.0;
  double max_us = 0.0;
  int violations = 0;  // should stay 0: the scene is static and the tolerances loose

  nlohmann::json to_json() const;
};

/// Times monitor_tick alone (tracker update excluded) over a noisy static scene.
BenchResult bench_monitor(const BenchConfig & cfg = {});

// ---- logs ----

/// FNV-1a 64 over `data`, continuing from `seed`.
std::uint64_t fnv1a(const std::string & data, std::uint64_t seed = 0xcbf29ce484222325ULL);

void write_log(std::ostream & out, const ExperimentSpec & spec, const std::vector<EpisodeRun> & runs);

struct LogContents
{
  std::string name;
  std::string spec_source;
  std::vector<EpisodeRun> runs;
};

/// Verifies the checksum chain and trailer. Throws SchemaMismatch,
/// ChecksumMismatch or TruncatedLog.
LogContents read_log(std::istream & in);

MetricsReport replay(std::istream & in);

}  // namespace cam::harness
