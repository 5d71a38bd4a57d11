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


#include <cstdio>
#include <istream>
#include <ostream>

#include "cam/harness.hpp"

namespace cam::harness
{

namespace
{

using nlohmann::json;

std::string hex16(std::uint64_t v)
{
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Each line commits to its own content and the previous checksum, so edits,
// insertions and reorderings all break the chain.
class ChainWriter
{
public:
  explicit ChainWriter(std::ostream & out)
  : out_(out) {}

  void line(int tick, const std::string & kind, const json & payload)
  {
    const json body{{"tick", tick}, {"kind", kind}, {"payload", payload}};
    prev_ = fnv1a(body.dump(), prev_);
    json j = body;
    j["checksum"] = hex16(prev_);
    out_ << j.dump() << '\n';
    ++count_;
  }

  int count() const {return count_;}

private:
  std::ostream & out_;
  std::uint64_t prev_ = fnv1a(kLogSchema);
  int count_ = 0;
};

}  // namespace

std::uint64_t fnv1a(const std::string & data, std::uint64_t seed)
{
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_log(std::ostream & out, const ExperimentSpec & spec, const std::vector<EpisodeRun> & runs)
{
  ChainWriter w(out);
  w.line(0, "header", {{"schema", kLogSchema}, {"name", spec.name}, {"spec", spec.source},
      {"episodes", runs.size()}});
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto & r = runs[i];
    w.line(0, "episode", {{"cell", r.cell}, {"mode", sim::monitor_mode_name(r.mode)},
        {"seed", r.seed}, {"index", i}});
    for (const auto & e : r.events) {
      w.line(e.tick, e.kind, e.payload);
    }
  }
  // the trailer counts itself
  w.line(0, "trailer", {{"lines", w.count() + 1}, {"episodes", runs.size()}});
  out.flush();
}

LogContents read_log(std::istream & in)
{
  LogContents log;
  std::uint64_t prev = fnv1a(kLogSchema);
  std::string raw;
  int lineno = 0;
  bool trailer = false;
  std::size_t declared = 0;
  while (std::getline(in, raw)) {
    const bool complete = !in.eof();
    ++lineno;
    if (raw.empty() && !complete) {
      break;
    }
    if (trailer) {
      throw ChecksumMismatch("line " + std::to_string(lineno) + ": data after the trailer");
    }
    json j;
    try {
      j = json::parse(raw);
    } catch (const json::parse_error &) {
      if (!complete) {
        throw TruncatedLog("line " + std::to_string(lineno) + ": partial final line");
      }
      if (lineno == 1) {
        throw SchemaMismatch("not a camctl log (line 1 is not JSON)");
      }
      throw ChecksumMismatch("line " + std::to_string(lineno) + ": corrupt line");
    }
    const auto fail = [&](const std::string & why) {
        if (lineno == 1) {
          throw SchemaMismatch("not a camctl log: " + why);
        }
        throw ChecksumMismatch("line " + std::to_string(lineno) + ": " + why);
      };
    if (!j.is_object() || !j.contains("checksum") || !j.contains("kind") ||
      !j.contains("payload") || !j.contains("tick") || !j["checksum"].is_string() ||
      !j["kind"].is_string() || !j["tick"].is_number_integer())
    {
      fail("missing fields");
    }
    const json body{{"tick", j["tick"]}, {"kind", j["kind"]}, {"payload", j["payload"]}};
    const std::uint64_t sum = fnv1a(body.dump(), prev);
    const std::string kind = j["kind"];
    if (lineno == 1) {
      if (kind != "header" || !j["payload"].is_object() ||
        j["payload"].value("schema", "") != kLogSchema)
      {
        throw SchemaMismatch("expected schema " + std::string(kLogSchema));
      }
    }
    if (j["checksum"].get<std::string>() != hex16(sum)) {
      fail("checksum mismatch");
    }
    prev = sum;
    const json & p = j["payload"];
    try {
      if (kind == "header" && lineno == 1) {
        log.name = p.at("name").get<std::string>();
        log.spec_source = p.at("spec").get<std::string>();
        declared = p.at("episodes").get<std::size_t>();
      } else if (kind == "episode") {
        EpisodeRun r;
        r.cell = p.at("cell").get<std::string>();
        r.mode = sim::monitor_mode_from_name(p.at("mode").get<std::string>());
        r.seed = p.at("seed").get<std::uint64_t>();
        log.runs.push_back(std::move(r));
      } else if (kind == "trailer") {
        if (p.at("lines").get<int>() != lineno || p.at("episodes").get<std::size_t>() !=
          log.runs.size() || log.runs.size() != declared)
        {
          throw ChecksumMismatch("trailer counts do not match the log");
        }
        trailer = true;
      } else {
        if (log.runs.empty()) {
          fail("event before the first episode");
        }
        log.runs.back().events.push_back({j["tick"].get<int>(), kind, p});
      }
    } catch (const json::exception & e) {
      fail(e.what());
    } catch (const ConfigError & e) {
      fail(e.what());
    }
  }
  if (lineno == 0) {
    throw TruncatedLog("empty log");
  }
  if (!trailer) {
    throw TruncatedLog("log ends without a trailer after line " + std::to_string(lineno));
  }
  return log;
}

MetricsReport replay(std::istream & in)
{
  const auto log = read_log(in);
  return aggregate(log.name, log.runs);
}

}  // namespace cam::harness
