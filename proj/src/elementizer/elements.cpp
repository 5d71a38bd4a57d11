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

#include "cam/elementizer.hpp"

#include <regex>

namespace cam::elem
{

int ElementType::required_points() const
{
  switch (kind) {
    case ElementKind::Point:
      return 1;
    case ElementKind::PointSet:
      return k;
    case ElementKind::Line:
      return 2;
    case ElementKind::Surface:
      return 4;
  }
  return 1;
}

int ElementType::minimum_points() const
{
  switch (kind) {
    case ElementKind::Point:
      return 1;
    case ElementKind::PointSet:
      return k;
    case ElementKind::Line:
      return 2;
    case ElementKind::Surface:
      return 3;
  }
  return 1;
}

std::string ElementType::to_string() const
{
  switch (kind) {
    case ElementKind::Point:
      return "point";
    case ElementKind::PointSet:
      return "point_set(" + std::to_string(k) + ")";
    case ElementKind::Line:
      return "line";
    case ElementKind::Surface:
      return "surface";
  }
  return "point";
}

ElementType ElementType::parse(const std::string & text)
{
  if (text == "point") {
    return point();
  }
  if (text == "line") {
    return line();
  }
  if (text == "surface") {
    return surface();
  }
  static const std::regex set_re(R"(point_set\((\d+)\))");
  std::smatch m;
  if (std::regex_match(text, m, set_re)) {
    const int k = std::stoi(m[1]);
    if (k >= 1) {
      return point_set(k);
    }
  }
  throw ConfigError("unknown element type '" + text + "'");
}

std::array<std::uint8_t, 3> color_rgb(ColorTag tag)
{
  static constexpr std::array<std::array<std::uint8_t, 3>, kColorTagCount> table{{
    {230, 25, 75}, {60, 180, 75}, {0, 130, 200}, {255, 225, 25},
    {240, 50, 230}, {70, 240, 240}, {245, 130, 48}, {250, 250, 250}}};
  return table[static_cast<std::size_t>(tag)];
}

const char * color_name(ColorTag tag)
{
  static constexpr std::array<const char *, kColorTagCount> names{
    "red", "green", "blue", "yellow", "magenta", "cyan", "orange", "white"};
  return names[static_cast<std::size_t>(tag)];
}

void MaskBundle::validate(std::span<const CameraModel> cams) const
{
  if (views.size() != cams.size()) {
    throw DimensionMismatch("mask bundle view count differs from camera count");
  }
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto & v = views[i];
    if (!v.instance.same_shape(cams[i].width, cams[i].height) ||
      !v.part.same_shape(cams[i].width, cams[i].height))
    {
      throw DimensionMismatch("mask size does not match camera resolution");
    }
    for (std::size_t p = 0; p < v.part.data.size(); ++p) {
      if (v.part.data[p] && !v.instance.data[p]) {
        throw ConfigError("part mask is not contained in the instance mask");
      }
    }
  }
  if (type.kind == ElementKind::PointSet && type.k < 1) {
    throw ConfigError("point_set requires k >= 1");
  }
}

void ConstraintElement::validate() const
{
  const int n = static_cast<int>(points.size());
  if (n < type.minimum_points()) {
    throw ConfigError("element " + std::to_string(id) + " has too few points for " +
            type.to_string());
  }
  if (type.kind == ElementKind::Point && n != 1) {
    throw ConfigError("point element must hold exactly one point");
  }
  for (auto [a, b] : connections) {
    if (a < 0 || b < 0 || a >= n || b >= n) {
      throw ConfigError("element connection index out of range");
    }
  }
  if (type.kind == ElementKind::Surface) {
    geom::fit_plane(points);
  } else if (type.kind == ElementKind::Line) {
    geom::fit_line(points);
  }
}

int ElementSet::add(ConstraintElement e)
{
  e.id = static_cast<int>(elements.size());
  e.color = static_cast<ColorTag>(e.id % kColorTagCount);
  elements.push_back(std::move(e));
  return elements.back().id;
}

const ConstraintElement & ElementSet::at(int id) const
{
  if (!contains(id)) {
    throw ConfigError("no element with id " + std::to_string(id));
  }
  return elements[static_cast<std::size_t>(id)];
}

ConstraintElement end_effector_element(
  const std::vector<std::pair<std::string, Vec3>> & fk_points)
{
  if (fk_points.empty()) {
    throw EmptyPointSet("end effector element needs at least one point");
  }
  ConstraintElement e;
  const int n = static_cast<int>(fk_points.size());
  e.type = n == 1 ? ElementType::point() : ElementType::point_set(n);
  e.entity = "end_effector";
  for (const auto & [name, p] : fk_points) {
    if (!e.part.empty()) {
      e.part += ",";
    }
    e.part += name;
    e.points.push_back(p);
  }
  return e;
}

}  // namespace cam::elem
