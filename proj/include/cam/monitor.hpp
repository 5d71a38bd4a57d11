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
#include <map>
#include <random>
#include <string>
#include <vector>

#include "cam/conlang.hpp"

namespace cam::mon
{

using geom::PointList;
using geom::Vec3;

class TrackError : public Error
{
public:
  using Error::Error;
};

struct TrackerConfig
{
  double sigma = 0.002;
  double dropout = 0.01;
  int resync_interval = 20;  // 0 disables resync
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrackEntry
{
  int tick = 0;
  PointList points;
  std::vector<std::uint8_t> valid;
};

/// Fixed-capacity ring buffer of an element's tracked points.
class ElementTrack
{
public:
  explicit ElementTrack(int id = 0, std::size_t capacity = 256);

  int id() const {return id_;}
  std::size_t size() const {return count_;}
  std::size_t capacity() const {return buf_.size();}
  bool empty() const {return count_ == 0;}

  /// Throws TrackError when the tick does not increase or the point count changes.
  void push(TrackEntry entry);
  const TrackEntry & latest() const;
  /// Clamped to the oldest retained entry.
  const TrackEntry & at_lag(int lag) const;

private:
  int id_;
  std::vector<TrackEntry> buf_;
  std::size_t head_ = 0;  // slot of the next write
  std::size_t count_ = 0;
};

class TrackSet : public lang::HistoryView
{
public:
  explicit TrackSet(std::size_t capacity = 256)
  : capacity_(capacity) {}

  void clear() {tracks_.clear();}
  ElementTrack & add(int id);
  ElementTrack & at(int id);
  const ElementTrack & at(int id) const;
  std::size_t capacity() const {return capacity_;}
  const std::map<int, ElementTrack> & all() const {return tracks_;}

  bool has(int id) const override;
  const PointList & points(int id, int lag) const override;

private:
  std::size_t capacity_;
  std::map<int, ElementTrack> tracks_;
};

/// Stand-in for a learned point tracker: truth plus noise, dropout, and resync.
class Tracker
{
public:
  explicit Tracker(TrackerConfig cfg, std::size_t capacity = 256);

  /// Starts fresh tracks for every element, initialized to truth.
  void start(const elem::ElementSet & elems, int tick);
  void step(const std::map<int, PointList> & truth, int tick);

  const TrackSet & tracks() const {return tracks_;}
  const TrackerConfig & config() const {return cfg_;}

private:
  TrackerConfig cfg_;
  TrackSet tracks_;
  std::mt19937_64 rng_;
  int start_tick_ = 0;
};

void track_step(
  TrackSet & tracks, const std::map<int, PointList> & truth, const TrackerConfig & cfg,
  int tick, int start_tick, std::mt19937_64 & rng);

struct DebouncePolicy
{
  int k = 3;
  int h = 5;

  void validate() const;
};

enum class Outcome { Ok, Violation, SubgoalComplete, NotYet };

const char * outcome_name(Outcome o);

struct Verdict
{
  int tick = 0;
  Outcome outcome = Outcome::Ok;
  int constraint_id = -1;
  lang::Mode mode = lang::Mode::During;
  std::string reason;
};

struct TickState
{
  int tick = 0;
  bool motion_finished = false;
  const lang::HistoryView * history = nullptr;
};

class Monitor
{
public:
  explicit Monitor(DebouncePolicy policy = {});

  /// Replaces the loaded programs and resets all debounce state. Throws
  /// ConfigError when a program reads further back than the history holds.
  void load(
    std::vector<lang::MonitorProgram> programs, const elem::ElementSet & elems,
    std::size_t history_capacity);

  Verdict monitor_tick(const lang::HistoryView & history, int tick);
  /// Ok while settling maps to NotYet.
  Verdict check_completion(const lang::HistoryView & history, int tick);
  /// Pull interface: during programs until motion ends, then completion.
  Verdict next_verdict(const TickState & state);

  /// Clears the violation latch after the planner has reacted.
  void acknowledge();
  bool latched() const {return latched_;}

  const std::vector<lang::MonitorProgram> & programs() const {return programs_;}
  const DebouncePolicy & policy() const {return policy_;}

private:
  DebouncePolicy policy_;
  std::vector<lang::MonitorProgram> programs_;
  std::vector<int> false_run_;
  elem::ElementSet elems_;
  bool latched_ = false;
  int settle_ticks_ = 0;
  int hold_run_ = 0;
};

struct Marker
{
  int tick = 0;
  std::string label;
};

struct LatencyEntry
{
  int injection_tick;
  int verdict_tick;
  int latency;
  std::string injection;
  int constraint_id;
};

struct LatencyReport
{
  std::vector<LatencyEntry> matched;
  std::vector<Verdict> false_positives;

  double mean_latency() const;
  int max_latency() const;
};

/// Pairs each violation with the most recent unmatched injection at or before it.
LatencyReport latency_report(
  const std::vector<Marker> & injections, const std::vector<Verdict> & violations);

}  // namespace cam::mon
