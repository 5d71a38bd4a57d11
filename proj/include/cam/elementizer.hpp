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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cam/geom3d.hpp"
#include "cam/image.hpp"

namespace cam::elem
{

using geom::CameraModel;
using geom::PointList;
using geom::Vec3;

enum class ElementKind { Point, PointSet, Line, Surface };

/// Geometric type of a constraint element, with the point count it is reduced to.
struct ElementType
{
  ElementKind kind = ElementKind::Point;
  int k = 1;  // only meaningful for PointSet

  static ElementType point() {return {ElementKind::Point, 1};}
  static ElementType point_set(int k) {return {ElementKind::PointSet, k};}
  static ElementType line() {return {ElementKind::Line, 2};}
  static ElementType surface() {return {ElementKind::Surface, 4};}

  /// Number of representative points extraction produces.
  int required_points() const;
  /// Smallest point count a valid element of this type may hold.
  int minimum_points() const;

  std::string to_string() const;
  /// Inverse of to_string: "point", "line", "surface", "point_set(k)".
  static ElementType parse(const std::string & text);

  friend bool operator==(const ElementType &, const ElementType &) = default;
};

enum class ColorTag : std::uint8_t { Red, Green, Blue, Yellow, Magenta, Cyan, Orange, White };

inline constexpr int kColorTagCount = 8;

std::array<std::uint8_t, 3> color_rgb(ColorTag tag);
const char * color_name(ColorTag tag);

/// Masks for one camera view. The part mask must be a subset of the instance mask.
struct ViewMasks
{
  MaskImage instance;
  MaskImage part;
};

/// Segmentation output for one constraint across all views.
struct MaskBundle
{
  std::vector<ViewMasks> views;
  ElementType type;
  std::string constraint_text;
  std::string entity;
  std::string part;

  /// Throws DimensionMismatch or ConfigError when the bundle is malformed.
  void validate(std::span<const CameraModel> cams) const;
};

struct ConstraintElement
{
  int id = 0;
  ElementType type;
  PointList points;
  std::vector<std::pair<int, int>> connections;
  std::string entity;
  std::string part;
  int constraint_id = 0;
  ColorTag color = ColorTag::Red;

  /// Throws DegenerateGeometry or ConfigError when an invariant does not hold.
  void validate() const;
};

/// The element set bound to one subgoal. Ids are contiguous from 0.
struct ElementSet
{
  std::vector<ConstraintElement> elements;
  int subgoal_id = 0;

  /// Appends with the next id and a cycled color tag; returns the id.
  int add(ConstraintElement e);
  const ConstraintElement & at(int id) const;
  bool contains(int id) const {return id >= 0 && id < static_cast<int>(elements.size());}
  std::size_t size() const {return elements.size();}
};

/// Tunables that the pipeline leaves open.
struct PipelineParams
{
  std::size_t outlier_k = 8;
  double outlier_std_ratio = 2.0;
  double dbscan_eps_scale = 1.5;  // times the mean k-distance (k = dbscan_min_pts) in a cell
  std::size_t dbscan_min_pts = 3;
};

/// Part-masked pixels of every view lifted to world points, view order then raster order.
PointList fuse_views(
  const MaskBundle & bundle, std::span<const DepthImage> depths,
  std::span<const CameraModel> cams);

/// Statistical outlier removal on the mean distance to the k nearest neighbors.
PointList filter_outliers(std::span<const Vec3> points, std::size_t k, double std_ratio);

/// Voxel counts per canonical axis for an element type.
geom::CellIndex cells_for_type(const ElementType & type);

/// Full pipeline: fuse, filter, align, voxelize, cluster, down-select, connect.
ConstraintElement extract_element(
  const MaskBundle & bundle, std::span<const DepthImage> depths,
  std::span<const CameraModel> cams, const PipelineParams & params = {});

/// Representative points of an already filtered cloud (exposed for testing).
PointList representative_points(
  std::span<const Vec3> cloud, const ElementType & type, const PipelineParams & params = {});

/// Element from forward-kinematics points, bypassing perception.
ConstraintElement end_effector_element(
  const std::vector<std::pair<std::string, Vec3>> & fk_points);

// ---------------------------------------------------------------------------
// Annotation (debug output only)

using Rgb = std::array<std::uint8_t, 3>;

struct Stamp
{
  int element_id;
  int point_index;
  int u;
  int v;
  ColorTag color;
};

struct AnnotatedView
{
  Image<Rgb> image;
  std::vector<Stamp> stamps;
};

struct Annotation
{
  std::vector<AnnotatedView> views;
  std::vector<std::pair<int, ColorTag>> legend;
};

/// Projects each element point into every view and stamps its id color.
Annotation annotate(
  const ElementSet & elements, std::span<const DepthImage> depths,
  std::span<const CameraModel> cams);

void write_ppm(const Image<Rgb> & image, const std::filesystem::path & path);

}  // namespace cam::elem
