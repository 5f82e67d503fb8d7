#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "seg/geometry.hpp"
#include "seg/grid.hpp"
#include "seg/scene.hpp"
#include "seg/visibility.hpp"

namespace seg {

enum class Team { kPursuer, kEvader };

/// Player positions for both teams plus the turn counter.
struct GameState {
  std::vector<Cell> pursuers;
  std::vector<Cell> evaders;
  int turn = 0;

  friend bool operator==(const GameState&, const GameState&) = default;
};

// One cell per team member.
using JointAction = std::vector<Cell>;

/// Cells a player can reach within one turn, current cell included.
struct ActionSet {
  Cell origin;
  double dt = 0.0;
  std::vector<Cell> cells;  // lexicographic order
};

struct GameOptions {
  // Zero selects 1.5 h / f_E (8-neighbourhood plus centre for the evader).
  double dt = 0.0;
  double v_min = kDefaultMinSpeed;
  AuxiliaryBase auxiliary = AuxiliaryBase::kVisibility;
};

/// Cells with arrival time <= dt from `position` under the 8-point eikonal
/// stencil with obstacle cells slowed to v_min; only free cells are kept.
ActionSet valid_actions(Cell position, double speed, const ScalarField& phi, double dt,
                        double v_min = kDefaultMinSpeed);

/// Per-scene state shared by every game played on it: the occluder, the
/// shadow-field cache, and memoized arrival-time fields and action sets.
/// All lookups are safe to call from several threads.
class GameContext {
 public:
  GameContext(const Scene& scene, const Grid2D& grid, const GameOptions& options = {});

  const Scene& scene() const { return scene_; }
  const Grid2D& grid() const { return grid_; }
  const ScalarField& phi() const { return *phi_; }
  const ShadowCache& shadows() const { return shadows_; }
  double dt() const { return dt_; }
  double speed(Team team) const {
    return team == Team::kPursuer ? scene_.pursuer_speed : scene_.evader_speed;
  }

  bool is_free(Cell c) const { return grid_.contains(c) && phi()(c) > 0.0; }

  // Arrival time from `source` for a player of `team`, i.e. d(source, .).
  const ScalarField& arrival(Cell source, Team team) const;
  const ActionSet& actions(Cell position, Team team) const;

  // Cartesian product of each pursuer's action set; last pursuer varies fastest.
  std::vector<JointAction> joint_pursuer_actions(const GameState& state) const;

  bool is_end_game(const GameState& state) const;

  // Throws unless every position is a free cell and team sizes match the scene.
  void validate(const GameState& state) const;

  std::size_t eikonal_solves() const { return eikonal_solves_.load(); }

 private:
  Scene scene_;
  Grid2D grid_;
  std::shared_ptr<const ScalarField> phi_;
  ShadowCache shadows_;
  double dt_;
  double v_min_;

  mutable std::shared_mutex mutex_;
  mutable std::map<std::pair<Cell, Team>, std::unique_ptr<const ScalarField>> arrivals_;
  mutable std::map<std::pair<Cell, Team>, std::unique_ptr<const ActionSet>> actions_;
  mutable std::atomic<std::size_t> eikonal_solves_{0};
};

nlohmann::json to_json(Cell c);
Cell cell_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GameState& state);
GameState game_state_from_json(const nlohmann::json& j);

}  // namespace seg
