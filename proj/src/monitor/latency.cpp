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

LatencyReport latency_report(
  const std::vector<Marker> & injections, const std::vector<Verdict> & violations)
{
  LatencyReport out;
  std::vector<bool> used(injections.size(), false);
  for (const auto & v : violations) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < injections.size(); ++i) {
      if (!used[i] && injections[i].tick <= v.tick &&
        (!best || injections[i].tick >= injections[*best].tick))
      {
        best = i;
      }
    }
    if (!best) {
      out.false_positives.push_back(v);
      continue;
    }
    used[*best] = true;
    const auto & inj = injections[*best];
    out.matched.push_back({inj.tick, v.tick, v.tick - inj.tick, inj.label, v.constraint_id});
  }
  return out;
}

double LatencyReport::mean_latency() const
{
  if (matched.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (const auto & m : matched) {
    sum += m.latency;
  }
  return sum / static_cast<double>(matched.size());
}

int LatencyReport::max_latency() const
{
  int m = 0;
  for (const auto & e : matched) {
    m = std::max(m, e.latency);
  }
  return m;
}

}  // namespace cam::mon
