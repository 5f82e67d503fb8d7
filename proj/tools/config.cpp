#include "config.hpp"

#include <sstream>
#include <stdexcept>

namespace seg::cli {
namespace {

template <class F>
void each_field(RunConfig& c, F&& f) {
  f("scene", c.scene);
  f("m", c.m);
  f("f_p", c.f_p);
  f("f_e", c.f_e);
  f("out", c.out);
  f("workers", c.workers);
  f("seed", c.seed);
  f("controller", c.controller);
  f("k_max", c.k_max);
  f("noise", c.noise);
  f("alpha", c.alpha);
  f("tau", c.tau);
  f("pursuers", c.pursuers);
  f("evaders", c.evaders);
  f("fixed_evaders", c.fixed_evaders);
  f("trace", c.trace);
  f("vantage", c.vantage);
  f("auxiliary", c.auxiliary);
  f("horizon", c.horizon);
  f("dt", c.dt);
  f("stop_tol", c.stop_tol);
  f("eps_cells", c.eps_cells);
  f("v_min", c.v_min);
  f("max_side", c.max_side);
  f("stationary", c.stationary);
  f("pursuer", c.pursuer);
  f("max_time", c.max_time);
  f("value", c.value);
  f("fix_pursuer", c.fix_pursuer);
  f("fix_evader", c.fix_evader);
  f("xp", c.xp);
  f("xe", c.xe);
  f("max_steps", c.max_steps);
  f("trace_file", c.trace_file);
  f("block", c.block);
  f("address", c.address);
  f("port", c.port);
}

std::vector<double> parse_numbers(const std::string& text, std::size_t count) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos) {
      throw std::invalid_argument("expected " + std::to_string(count) +
                                  " comma-separated numbers, got '" + text + "'");
    }
    out.push_back(v);
  }
  if (out.size() != count) {
    throw std::invalid_argument("expected " + std::to_string(count) +
                                " comma-separated numbers, got '" + text + "'");
  }
  return out;
}

}  // namespace

void apply_json(RunConfig& config, const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  std::size_t known = 0;
  each_field(config, [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    ++known;
    try {
      field = j.at(key).get<std::decay_t<decltype(field)>>();
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("config key '") + key + "': " + e.what());
    }
  });
  if (known != j.size()) {
    for (const auto& [key, value] : j.items()) {
      bool found = false;
      each_field(config, [&](const char* k, auto&) { found = found || key == k; });
      if (!found) throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
}

nlohmann::json to_json(const RunConfig& config) {
  nlohmann::json j;
  RunConfig copy = config;
  each_field(copy, [&](const char* key, auto& field) { j[key] = field; });
  return j;
}

Point parse_point(const std::string& text) {
  const auto v = parse_numbers(text, 2);
  return {v[0], v[1]};
}

Cell parse_cell(const std::string& text) {
  const auto v = parse_numbers(text, 2);
  const Cell c{static_cast<int>(v[0]), static_cast<int>(v[1])};
  if (c.i != v[0] || c.j != v[1]) throw std::invalid_argument("cell indices must be integers");
  return c;
}

std::vector<Cell> parse_cells(const std::string& text) {
  std::vector<Cell> cells;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    cells.push_back(parse_cell(item));
  }
  return cells;
}

}  // namespace seg::cli
