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

#include <cmath>

namespace cam::mon
{

void TrackerConfig::validate() const
{
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("tracker sigma must be non-negative");
  }
  // dropout = 1 is accepted as a degenerate "tracker lost everything" setting
  if (!(dropout >= 0.0 && dropout <= 1.0)) {
    throw ConfigError("tracker dropout must lie in [0, 1]");
  }
  if (resync_interval < 0) {
    throw ConfigError("resync interval must be non-negative");
  }
}

ElementTrack::ElementTrack(int id, std::size_t capacity)
: id_(id), buf_(capacity)
{
  if (capacity == 0) {
    throw ConfigError("track capacity must be positive");
  }
}

void ElementTrack::push(TrackEntry entry)
{
  if (count_ > 0) {
    const auto & last = latest();
    if (entry.tick <= last.tick) {
      throw TrackError("track " + std::to_string(id_) + ": ticks must increase");
    }
    if (entry.points.size() != last.points.size()) {
      throw TrackError("track " + std::to_string(id_) + ": point count changed");
    }
  }
  if (entry.valid.size() != entry.points.size()) {
    entry.valid.assign(entry.points.size(), 1);
  }
  buf_[head_] = std::move(entry);
  head_ = (head_ + 1) % buf_.size();
  count_ = std::min(count_ + 1, buf_.size());
}

const TrackEntry & ElementTrack::latest() const
{
  return at_lag(0);
}

const TrackEntry & ElementTrack::at_lag(int lag) const
{
  if (count_ == 0) {
    throw TrackError("track " + std::to_string(id_) + " is empty");
  }
  const std::size_t back = std::min<std::size_t>(static_cast<std::size_t>(std::max(lag, 0)), count_ - 1);
  return buf_[(head_ + buf_.size() - 1 - back) % buf_.size()];
}

ElementTrack & TrackSet::add(int id)
{
  auto [it, inserted] = tracks_.try_emplace(id, id, capacity_);
  if (!inserted) {
    it->second = ElementTrack(id, capacity_);
  }
  return it->second;
}

ElementTrack & TrackSet::at(int id)
{
  auto it = tracks_.find(id);
  if (it == tracks_.end()) {
    throw TrackError("unknown element id " + std::to_string(id));
  }
  return it->second;
}

const ElementTrack & TrackSet::at(int id) const
{
  auto it = tracks_.find(id);
  if (it == tracks_.end()) {
    throw TrackError("unknown element id " + std::to_string(id));
  }
  return it->second;
}

bool TrackSet::has(int id) const
{
  auto it = tracks_.find(id);
  return it != tracks_.end() && !it->second.empty();
}

const PointList & TrackSet::points(int id, int lag) const
{
  return at(id).at_lag(lag).points;
}

void track_step(
  TrackSet & tracks, const std::map<int, PointList> & truth, const TrackerConfig & cfg,
  int tick, int start_tick, std::mt19937_64 & rng)
{
  for (const auto & [id, pts] : truth) {
    if (!tracks.has(id)) {
      throw TrackError("unknown element id " + std::to_string(id));
    }
  }
  const bool resync = cfg.resync_interval > 0 && (tick - start_tick) % cfg.resync_interval == 0;
  std::bernoulli_distribution drop(cfg.dropout);
  std::normal_distribution<double> noise(0.0, cfg.sigma);
  for (auto & [id, track] : tracks.all()) {
    (void)track;
    auto it = truth.find(id);
    if (it == truth.end()) {
      throw TrackError("no ground truth for element " + std::to_string(id));
    }
    ElementTrack & t = tracks.at(id);
    const TrackEntry & prev = t.latest();
    if (it->second.size() != prev.points.size()) {
      throw TrackError("point count changed for element " + std::to_string(id));
    }
    TrackEntry entry{tick, PointList(prev.points.size()), std::vector<std::uint8_t>(prev.points.size(), 1)};
    for (std::size_t i = 0; i < entry.points.size(); ++i) {
      if (cfg.dropout > 0.0 && drop(rng)) {
        entry.points[i] = prev.points[i];
        entry.valid[i] = 0;
      } else if (resync || cfg.sigma == 0.0) {
        entry.points[i] = it->second[i];
      } else {
        entry.points[i] = it->second[i] + Vec3(noise(rng), noise(rng), noise(rng));
      }
    }
    t.push(std::move(entry));
  }
}

Tracker::Tracker(TrackerConfig cfg, std::size_t capacity)
: cfg_(cfg), tracks_(capacity), rng_(cfg.seed)
{
  cfg_.validate();
}

void Tracker::start(const elem::ElementSet & elems, int tick)
{
  tracks_.clear();
  start_tick_ = tick;
  for (const auto & e : elems.elements) {
    tracks_.add(e.id).push(TrackEntry{tick, e.points, {}});
  }
}

void Tracker::step(const std::map<int, PointList> & truth, int tick)
{
  track_step(tracks_, truth, cfg_, tick, start_tick_, rng_);
}

}  // namespace cam::mon
