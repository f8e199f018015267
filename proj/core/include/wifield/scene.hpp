#pragma once

// Sensing domain, materials and targets, and rasterization onto the cell grid.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wifield/types.hpp"

namespace wifield {

struct Material {
  std::string name;
  std::uint8_t label = 0;
  cplx relative_permittivity{1.0, 0.0};
};

/// Air (label 0) plus the default synthetic wood, glass and rubber entries.
/// The permittivities are configurable inputs, not measured values.
std::map<std::uint8_t, Material> default_materials();

/// Square N x N grid of equal cells. Cell i maps row-major to (row, col) with
/// rows along +y and columns along +x.
struct SensingDomain {
  Point2 origin{-0.525, -0.525};
  double side = 1.05;
  int n = 40;

  double cell_size() const { return side / n; }
  double cell_area() const { return cell_size() * cell_size(); }
  int cell_count() const { return n * n; }
  Point2 cell_center(int index) const;
  Point2 cell_center(int row, int col) const;
  bool contains(Point2 p) const;  // closed square
  void validate() const;

  friend bool operator==(const SensingDomain&, const SensingDomain&) = default;
};

struct Rect {
  Point2 center;
  double width = 0.0;   // along x
  double height = 0.0;  // along y
};

struct Circle {
  Point2 center;
  double radius = 0.0;
};

using Shape = std::variant<Rect, Circle>;

bool shape_contains(const Shape& shape, Point2 p);

struct Target {
  std::uint8_t label = 1;
  Shape shape;
};

struct Scene {
  SensingDomain domain;
  std::vector<Target> targets;
  std::map<std::uint8_t, Material> materials = default_materials();

  static constexpr std::size_t kDefaultMaxTargets = 8;

  /// Throws ConfigError for unknown labels, bad materials or targets leaving the domain.
  void validate(std::size_t max_targets = kDefaultMaxTargets) const;
};

struct ContrastGrid {
  SensingDomain domain;
  VectorXc chi;  // eps - 1 per cell
};

struct LabelGrid {
  int n = 0;
  std::vector<std::uint8_t> labels;  // row-major n x n
};

/// Cell-center membership; later targets overwrite earlier ones.
std::pair<ContrastGrid, LabelGrid> rasterize(const Scene& scene);

// Scene JSON: {"domain":{"origin":[x,y],"side":L,"n":N},
//              "materials":[{"name":..,"label":..,"eps":[re,im]}],
//              "targets":[{"label":..,"rect":{"center":[x,y],"w":..,"h":..}} |
//                         {"label":..,"circle":{"center":[x,y],"r":..}}]}
Scene parse_scene(std::string_view json_text);
std::string scene_to_json(const Scene& scene);
Scene load_scene(const std::filesystem::path& path);
void save_scene(const Scene& scene, const std::filesystem::path& path);

}  // namespace wifield
