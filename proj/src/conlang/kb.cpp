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

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "cam/conlang.hpp"

namespace cam::lang
{

namespace
{

constexpr std::string_view kDefaultKb = R"KB(
# Default tolerances per (task, constraint kind).
# Format: task.kind = value unit

stack_in_order.point_coincidence = 0.03 m
stack_in_order.placement_zone = 3 cm
stack_in_order.base_zone = 5 cm
stack_in_order.stacked_on = 1.5 cm

sweep_half.band_low = 16 count
sweep_half.band_high = 24 count

slot_pen.point_coincidence = 0.03 m
slot_pen.object_still = 2 cm
slot_pen.verticality = 10 deg
slot_pen.alignment_xy = 1.5 cm

stow_book.point_coincidence = 5 cm
stow_book.grasp_rotation = 10 deg
stow_book.verticality = 10 deg

pour_tea.point_coincidence = 0.03 m
pour_tea.level_surface = 15 deg
pour_tea.alignment_xy = 3 cm
pour_tea.pour_drop = 25 deg
pour_tea.pour_tilt = 40 deg
)KB";

std::string_view trim(std::string_view s)
{
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

ThresholdKB parse_kb(std::string_view text)
{
  ThresholdKB kb;
  int lineno = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) {
      continue;
    }
    const auto where = "threshold kb line " + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(where + ": expected 'task.kind = value unit'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto dot = key.find('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 == key.size()) {
      throw ConfigError(where + ": key must be task.kind");
    }
    const auto rhs = trim(line.substr(eq + 1));
    double value = 0.0;
    const auto res = std::from_chars(rhs.data(), rhs.data() + rhs.size(), value);
    if (res.ec != std::errc()) {
      throw ConfigError(where + ": bad number");
    }
    const auto unit = trim(rhs.substr(static_cast<std::size_t>(res.ptr - rhs.data())));
    if (unit.empty()) {
      throw ConfigError(where + ": missing unit");
    }
    kb.entries[{std::string(key.substr(0, dot)), std::string(key.substr(dot + 1))}] =
      parse_quantity(value, unit);
  }
  return kb;
}

ThresholdKB load_kb(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_kb(ss.str());
}

std::string_view default_kb_text()
{
  // drop the newline that follows the raw-string opener
  return kDefaultKb.substr(1);
}

const ThresholdKB & default_kb()
{
  static const ThresholdKB kb = parse_kb(default_kb_text());
  return kb;
}

std::optional<KbEntry> kb_lookup(
  const ThresholdKB & kb, const std::string & task, const std::string & kind)
{
  if (auto it = kb.entries.find({task, kind}); it != kb.entries.end()) {
    return it->second;
  }
  if (kind == "level_surface") {
    return parse_quantity(15.0, "deg");
  }
  if (kind == "point_coincidence") {
    return parse_quantity(0.03, "m");
  }
  if (kind == "verticality") {
    return parse_quantity(10.0, "deg");
  }
  return std::nullopt;
}

}  // namespace cam::lang
