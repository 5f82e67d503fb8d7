#include "seg/scene.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace seg {
namespace {

using nlohmann::json;

Point point_from(const json& j, const char* key) {
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.size() != 2) {
    throw std::invalid_argument(std::string("'") + key + "' must be [x, y]");
  }
  return {arr[0].get<double>(), arr[1].get<double>()};
}

std::pair<double, double> pair_from(const json& j, const char* key) {
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.size() != 2) {
    throw std::invalid_argument(std::string("'") + key + "' must be [a, b]");
  }
  return {arr[0].get<double>(), arr[1].get<double>()};
}

Shape shape_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  const Point c = point_from(j, "center");
  const double angle = j.value("angle", 0.0);
  if (kind == "circle") {
    return Circle{c, j.at("radius").get<double>()};
  }
  if (kind == "ellipse") {
    const auto [a, b] = pair_from(j, "semi_axes");
    return Ellipse{c, a, b, angle};
  }
  if (kind == "rectangle") {
    const auto [a, b] = pair_from(j, "half_extents");
    return Rectangle{c, a, b, angle};
  }
  if (kind == "diamond") {
    const auto [a, b] = pair_from(j, "half_extents");
    return Diamond{c, a, b, angle};
  }
  throw std::invalid_argument("unknown shape kind '" + kind + "'");
}

json shape_to_json(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        json j;
        j["center"] = {s.center.x, s.center.y};
        if constexpr (std::is_same_v<T, Circle>) {
          j["kind"] = "circle";
          j["radius"] = s.radius;
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          j["kind"] = "ellipse";
          j["semi_axes"] = {s.a, s.b};
          j["angle"] = s.angle;
        } else if constexpr (std::is_same_v<T, Rectangle>) {
          j["kind"] = "rectangle";
          j["half_extents"] = {s.half_x, s.half_y};
          j["angle"] = s.angle;
        } else {
          j["kind"] = "diamond";
          j["half_extents"] = {s.half_x, s.half_y};
          j["angle"] = s.angle;
        }
        return j;
      },
      shape);
}

// Axis-aligned half extents of the rotated primitive.
std::pair<double, double> bounding_half_extents(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> std::pair<double, double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return {s.radius, s.radius};
        } else {
          const double c = std::abs(std::cos(s.angle));
          const double sn = std::abs(std::sin(s.angle));
          double a = 0.0;
          double b = 0.0;
          if constexpr (std::is_same_v<T, Ellipse>) {
            a = s.a;
            b = s.b;
            return {std::sqrt(a * a * c * c + b * b * sn * sn),
                    std::sqrt(a * a * sn * sn + b * b * c * c)};
          } else if constexpr (std::is_same_v<T, Rectangle>) {
            a = s.half_x;
            b = s.half_y;
            return {a * c + b * sn, a * sn + b * c};
          } else {
            a = s.half_x;
            b = s.half_y;
            return {std::max(a * c, b * sn), std::max(a * sn, b * c)};
          }
        }
      },
      shape);
}

Point shape_center(const Shape& shape) {
  return std::visit([](const auto& s) { return s.center; }, shape);
}

bool shape_dims_positive(const Shape& shape) {
  return std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return s.radius > 0.0;
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          return s.a > 0.0 && s.b > 0.0;
        } else {
          return s.half_x > 0.0 && s.half_y > 0.0;
        }
      },
      shape);
}

}  // namespace

void Scene::validate() const {
  if (!(std::isfinite(pursuer_speed) && pursuer_speed > 0.0)) {
    throw std::invalid_argument("pursuer speed must be finite and positive");
  }
  if (!(std::isfinite(evader_speed) && evader_speed > 0.0)) {
    throw std::invalid_argument("evader speed must be finite and positive");
  }
  if (pursuers < 1 || evaders < 1) {
    throw std::invalid_argument("each team needs at least one player");
  }
  constexpr double kSlack = 1e-9;
  for (std::size_t s = 0; s < shapes.size(); ++s) {
    if (!shape_dims_positive(shapes[s])) {
      throw std::invalid_argument("shape " + std::to_string(s) +
                                  " has nonpositive dimensions");
    }
    const auto [ex, ey] = bounding_half_extents(shapes[s]);
    const Point c = shape_center(shapes[s]);
    if (c.x - ex < -kSlack || c.x + ex > 1.0 + kSlack || c.y - ey < -kSlack ||
        c.y + ey > 1.0 + kSlack) {
      throw std::invalid_argument("shape " + std::to_string(s) +
                                  " extends outside the unit square");
    }
  }
}

Scene scene_from_json(const json& j) {
  Scene scene;
  if (j.contains("shapes")) {
    for (const auto& s : j.at("shapes")) {
      scene.shapes.push_back(shape_from_json(s));
    }
  }
  scene.pursuer_speed = j.value("f_p", scene.pursuer_speed);
  scene.evader_speed = j.value("f_e", scene.evader_speed);
  scene.pursuers = j.value("k_p", scene.pursuers);
  scene.evaders = j.value("k_e", scene.evaders);
  scene.validate();
  return scene;
}

json scene_to_json(const Scene& scene) {
  json j;
  j["shapes"] = json::array();
  for (const auto& s : scene.shapes) {
    j["shapes"].push_back(shape_to_json(s));
  }
  j["f_p"] = scene.pursuer_speed;
  j["f_e"] = scene.evader_speed;
  j["k_p"] = scene.pursuers;
  j["k_e"] = scene.evaders;
  return j;
}

Scene parse_scene(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(origin + ": " + e.what());
  }
  try {
    return scene_from_json(j);
  } catch (const json::exception& e) {
    throw std::invalid_argument(origin + ": " + e.what());
  }
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open scene file " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scene(buffer.str(), path.string());
}

std::string scene_hash(const Scene& scene) {
  const std::string canonical = scene_to_json(scene).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k) {
    out[static_cast<std::size_t>(k)] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace seg
