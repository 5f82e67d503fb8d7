#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "seg/grid.hpp"

namespace seg {

struct Circle {
  Point center;
  double radius = 0.0;
};

// Semi-axes a (local x) and b (local y), rotated by angle radians.
struct Ellipse {
  Point center;
  double a = 0.0;
  double b = 0.0;
  double angle = 0.0;
};

struct Rectangle {
  Point center;
  double half_x = 0.0;
  double half_y = 0.0;
  double angle = 0.0;
};

// Rhombus with vertices at (+-half_x, 0) and (0, +-half_y) in the local frame.
struct Diamond {
  Point center;
  double half_x = 0.0;
  double half_y = 0.0;
  double angle = 0.0;
};

using Shape = std::variant<Circle, Ellipse, Rectangle, Diamond>;

/// Obstacles plus player speeds and team sizes.
struct Scene {
  std::vector<Shape> shapes;
  double pursuer_speed = 1.0;
  double evader_speed = 1.0;
  int pursuers = 1;
  int evaders = 1;

  void validate() const;
};

Scene scene_from_json(const nlohmann::json& j);
nlohmann::json scene_to_json(const Scene& scene);

// Parse errors carry the file name and the parser's line/column.
Scene load_scene(const std::filesystem::path& path);
Scene parse_scene(const std::string& text, const std::string& origin = "<string>");

// Stable 64-bit FNV-1a of the canonical JSON form, as 16 hex digits.
std::string scene_hash(const Scene& scene);

}  // namespace seg
