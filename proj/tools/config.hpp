#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seg/grid.hpp"

namespace seg::cli {

/// Every CLI default lives here. A JSON config file (keys as below) is
/// applied first; command-line flags override it.
struct RunConfig {
  // Shared.
  std::string scene = "scenes/circle.json";
  int m = 16;
  double f_p = -1.0;  // negative keeps the scene's speed
  double f_e = -1.0;
  std::string out = "out";
  int workers = 0;  // 0 = all cores
  std::uint64_t seed = 0;

  // Discrete game.
  std::string controller = "blend";
  int k_max = 100;
  double noise = 0.25;
  double alpha = 0.3;
  double tau = 1.0;
  std::string pursuers;  // "i,j;i,j"; empty = default placement
  std::string evaders;
  std::string fixed_evaders;
  bool trace = false;

  // Level sets and PDE solvers.
  std::string vantage = "0.125,0.5";
  std::string auxiliary = "visibility";
  double horizon = 10.0;
  double dt = 0.0;  // 0 = scheme default
  double stop_tol = 1e-5;
  double eps_cells = 16.0;
  double v_min = 0.01;
  int max_side = 32;
  bool stationary = false;
  std::string pursuer = "0.125,0.5";
  double max_time = 100.0;

  // slice / HJI playback.
  std::string value = "out/value";
  std::string fix_pursuer;
  std::string fix_evader;
  std::string xp;
  std::string xe;
  int max_steps = 10000;

  // histogram.
  std::string trace_file;
  int block = 100;

  // serve.
  std::string address = "127.0.0.1";
  int port = 8080;
};

// Applies the keys present in `j`; unknown keys are rejected.
void apply_json(RunConfig& config, const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);

Point parse_point(const std::string& text);
Cell parse_cell(const std::string& text);
// "i,j;i,j;..." (empty string gives an empty list).
std::vector<Cell> parse_cells(const std::string& text);

}  // namespace seg::cli
