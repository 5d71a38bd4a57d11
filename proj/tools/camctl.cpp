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


// camctl: run experiment grids, replay logs, validate constraint programs,
// and benchmark the monitor.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cam/harness.hpp"

namespace fs = std::filesystem;
using namespace cam;

namespace
{

enum Exit { kOk = 0, kRejected = 1, kInput = 2, kInternal = 3 };

void write_file(const fs::path & path, const std::string & text)
{
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) {
    throw Error("cannot write " + path.string());
  }
}

int cmd_run(const std::string & spec_path, const std::string & out_dir, int threads, bool dump)
{
  auto spec = harness::load_spec(spec_path);
  if (threads > 0) {
    spec.threads = threads;
  }
  spec.element_points = spec.element_points || dump;
  const fs::path out = out_dir.empty() ? fs::path("runs") / fs::path(spec_path).stem() : fs::path(out_dir);
  fs::create_directories(out);

  int last = -1;
  const auto result = harness::run_experiment(
    spec, [&](int done, int total) {
      const int pct = 100 * done / total;
      if (pct / 5 != last / 5 || done == total) {
        std::fprintf(stderr, "\r%s: %d/%d episodes", spec.name.c_str(), done, total);
        last = pct;
      }
    });
  std::fprintf(stderr, "\n");

  {
    std::ofstream log(out / "log.jsonl", std::ios::binary);
    harness::write_log(log, spec, result.runs);
    if (!log) {
      throw Error("cannot write " + (out / "log.jsonl").string());
    }
  }
  write_file(out / "report.json", result.report.to_json().dump(2) + "\n");
  write_file(out / "report.txt", result.report.table());
  std::cout << result.report.table();
  std::fprintf(stderr, "wrote %s\n", out.string().c_str());
  return kOk;
}

int cmd_replay(const std::string & path, bool as_json)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot read log '" + path + "'");
  }
  const auto report = harness::replay(in);
  std::cout << (as_json ? report.to_json().dump(2) + "\n" : report.table());
  return kOk;
}

int cmd_validate(const std::string & path, const std::string & task_name, std::uint64_t seed, bool dump)
{
  const auto tmpl = task::default_template(task::task_from_name(task_name));
  std::vector<lang::MonitorProgram> programs;
  try {
    programs = lang::parse_file(path);
  } catch (const lang::SyntaxError & e) {
    std::cout << path << ": " << e.what() << "\n";
    return kRejected;
  }
  const auto elems = sim::first_subgoal_elements(tmpl, seed);
  if (dump) {
    std::cout << sim::elements_json(elems, true).dump(2) << "\n";
  }
  lang::FrameHistory history;
  history.push_all(elems);
  const lang::EvalContext ctx{0, &elems, &history};
  int bad = 0;
  for (std::size_t i = 0; i < programs.size(); ++i) {
    auto & p = programs[i];
    p.id = static_cast<int>(i);
    std::string why;
    if (const auto errs = lang::typecheck(p, elems); !errs.empty()) {
      const auto & e = errs.front();
      why = "line " + std::to_string(e.line) + ", col " + std::to_string(e.col) + ": " + e.message;
    } else if (const auto f = lang::whitebox_validate(p, ctx)) {
      why = "path " + f->path + ": " + f->error;
    }
    if (why.empty()) {
      std::cout << "ok      " << p.name << " (" << lang::mode_name(p.mode) << ")\n";
    } else {
      ++bad;
      std::cout << "reject  " << p.name << ": " << why << "\n";
    }
  }
  std::cout << programs.size() - static_cast<std::size_t>(bad) << "/" << programs.size() <<
    " programs valid against " << elems.size() << " elements of " << task_name << " seed " <<
    seed << "\n";
  return bad ? kRejected : kOk;
}

int cmd_bench(const harness::BenchConfig & cfg, bool as_json)
{
  const auto r = harness::bench_monitor(cfg);
  if (as_json) {
    std::cout << r.to_json().dump(2) << "\n";
  } else {
    std::printf(
      "monitor_tick over %d ticks, %d elements, %d programs\n"
      "  median %.2f us  p99 %.2f us  mean %.2f us  max %.2f us\n",
      r.ticks, r.elements, r.programs, r.median_us, r.p99_us, r.mean_us, r.max_us);
  }
  return kOk;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"camctl: constraint-monitoring experiments"};
  app.require_subcommand(1);

  std::string spec_path, out_dir;
  int threads = 0;
  bool dump_run = false;
  auto * run = app.add_subcommand("run", "run an experiment spec");
  run->add_option("spec", spec_path, "spec file")->required();
  run->add_option("--out", out_dir, "output directory (default runs/<spec stem>)");
  run->add_option("--threads", threads, "worker threads (overrides the spec file)")
  ->check(CLI::PositiveNumber);
  run->add_flag("--dump-elements", dump_run, "record element points in the log");

  std::string log_path;
  bool replay_json = false;
  auto * rep = app.add_subcommand("replay", "recompute the report from a log");
  rep->add_option("log", log_path, "log file")->required();
  rep->add_flag("--json", replay_json, "print the report as JSON");

  std::string dsl_path, task_name;
  std::uint64_t seed = 0;
  bool dump_val = false;
  auto * val = app.add_subcommand(
    "validate", "parse, typecheck and white-box test programs against a scene snapshot");
  val->add_option("dsl", dsl_path, "constraint program file")->required();
  val->add_option("--task", task_name, "task template providing the scene")->required();
  val->add_option("--seed", seed, "scene seed");
  val->add_flag("--dump-elements", dump_val, "print the snapshot's elements");

  harness::BenchConfig bench_cfg;
  bool bench_json = false;
  auto * bench = app.add_subcommand("bench", "monitor_tick latency benchmark");
  bench->add_option("--ticks", bench_cfg.ticks, "ticks to time")->check(CLI::PositiveNumber);
  bench->add_option("--elements", bench_cfg.elements, "tracked elements")
  ->check(CLI::Range(2, 4096));
  bench->add_option("--programs", bench_cfg.programs, "loaded programs")
  ->check(CLI::Range(1, 4096));
  bench->add_flag("--json", bench_json, "print JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    return app.exit(e) == 0 ? kOk : kInput;
  }

  try {
    if (*run) {
      return cmd_run(spec_path, out_dir, threads, dump_run);
    }
    if (*rep) {
      return cmd_replay(log_path, replay_json);
    }
    if (*val) {
      return cmd_validate(dsl_path, task_name, seed, dump_val);
    }
    return cmd_bench(bench_cfg, bench_json);
  } catch (const harness::SchemaMismatch & e) {
    std::cerr << "camctl: schema mismatch: " << e.what() << "\n";
    return kInput;
  } catch (const harness::TruncatedLog & e) {
    std::cerr << "camctl: truncated log: " << e.what() << "\n";
    return kInput;
  } catch (const harness::ChecksumMismatch & e) {
    std::cerr << "camctl: checksum mismatch: " << e.what() << "\n";
    return kInput;
  } catch (const ConfigError & e) {
    std::cerr << "camctl: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception & e) {
    std::cerr << "camctl: internal error: " << e.what() << "\n";
    return kInternal;
  }
}
